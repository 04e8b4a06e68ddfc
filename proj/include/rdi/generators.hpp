// Mesh generators for spheres, planes, cylinders, and regional refinement.
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "rdi/mesh.hpp"

namespace rdi::gen {

using Faces = std::vector<std::vector<std::uint32_t>>;

// ---------------------------------------------------------------------------
// Icosphere: Loop-style 1-to-4 subdivision of an icosahedron, vertices
// projected to the unit sphere. V = 10*4^level + 2.

inline Mesh icosphere(int level) {
  if (level < 0) throw MeshError("icosphere level must be >= 0");
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> verts = {
      {-1, phi, 0}, {1, phi, 0}, {-1, -phi, 0}, {1, -phi, 0},
      {0, -1, phi}, {0, 1, phi}, {0, -1, -phi}, {0, 1, -phi},
      {phi, 0, -1}, {phi, 0, 1}, {-phi, 0, -1}, {-phi, 0, 1}};
  for (Vec3& v : verts) v.normalize();
  Faces faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                 {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                 {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                 {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (int l = 0; l < level; ++l) {
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> midpoint;
    auto mid = [&](std::uint32_t a, std::uint32_t b) {
      const auto key = std::minmax(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      const std::uint32_t idx = static_cast<std::uint32_t>(verts.size());
      verts.push_back((verts[a] + verts[b]).normalized());
      midpoint.emplace(key, idx);
      return idx;
    };
    Faces next;
    next.reserve(faces.size() * 4);
    for (const auto& f : faces) {
      const std::uint32_t ab = mid(f[0], f[1]), bc = mid(f[1], f[2]), ca = mid(f[2], f[0]);
      next.push_back({f[0], ab, ca});
      next.push_back({f[1], bc, ab});
      next.push_back({f[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    faces = std::move(next);
  }
  return build_mesh(std::move(verts), faces);
}

// ---------------------------------------------------------------------------
// Cubed sphere: n x n gnomonic quads per cube face, welded along cube edges
// and projected radially. 6n^2 quads, 6n^2 + 2 vertices.

inline Mesh cubed_sphere(int n) {
  if (n < 1) throw MeshError("cubed_sphere n must be >= 1");
  // integer cube lattice points keyed exactly; one coordinate is +-n
  std::map<std::array<int, 3>, std::uint32_t> index;
  std::vector<Vec3> verts;
  auto vid = [&](std::array<int, 3> key) {
    auto it = index.find(key);
    if (it != index.end()) return it->second;
    const std::uint32_t idx = static_cast<std::uint32_t>(verts.size());
    verts.push_back(Vec3(key[0], key[1], key[2]).normalized());
    index.emplace(key, idx);
    return idx;
  };
  // face frames: base corner and the two in-face axes, oriented outward
  struct Frame { std::array<int, 3> base, du, dv; };
  const std::vector<Frame> cube = {
      {{n, -n, -n}, {0, 1, 0}, {0, 0, 1}},    // +x
      {{-n, -n, -n}, {0, 0, 1}, {0, 1, 0}},   // -x
      {{-n, n, -n}, {0, 0, 1}, {1, 0, 0}},    // +y
      {{-n, -n, -n}, {1, 0, 0}, {0, 0, 1}},   // -y
      {{-n, -n, n}, {1, 0, 0}, {0, 1, 0}},    // +z
      {{-n, -n, -n}, {0, 1, 0}, {1, 0, 0}}};  // -z
  Faces faces;
  faces.reserve(std::size_t(6) * n * n);
  auto at = [&](const Frame& f, int i, int j) {
    return std::array<int, 3>{f.base[0] + 2 * (i * f.du[0] + j * f.dv[0]),
                              f.base[1] + 2 * (i * f.du[1] + j * f.dv[1]),
                              f.base[2] + 2 * (i * f.du[2] + j * f.dv[2])};
  };
  for (const Frame& f : cube)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        faces.push_back({vid(at(f, i, j)), vid(at(f, i + 1, j)),
                         vid(at(f, i + 1, j + 1)), vid(at(f, i, j + 1))});
  return build_mesh(std::move(verts), faces);
}

// ---------------------------------------------------------------------------
// Flat triangulated grid over [-1,1]^2.

enum class DiagPattern { Right, Alternating };

inline Mesh flat_grid(int n, DiagPattern pattern = DiagPattern::Right) {
  if (n < 1) throw MeshError("flat_grid n must be >= 1");
  std::vector<Vec3> verts;
  verts.reserve(std::size_t(n + 1) * (n + 1));
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i)
      verts.push_back({-1.0 + 2.0 * i / n, -1.0 + 2.0 * j / n, 0.0});
  auto vid = [n](int i, int j) { return std::uint32_t(j * (n + 1) + i); };
  Faces faces;
  faces.reserve(std::size_t(2) * n * n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const std::uint32_t a = vid(i, j), b = vid(i + 1, j), c = vid(i + 1, j + 1),
                          d = vid(i, j + 1);
      const bool flip = pattern == DiagPattern::Alternating && ((i + j) % 2 == 1);
      if (!flip) {
        faces.push_back({a, b, c});
        faces.push_back({a, c, d});
      } else {
        faces.push_back({a, b, d});
        faces.push_back({b, c, d});
      }
    }
  return build_mesh(std::move(verts), faces);
}

// ---------------------------------------------------------------------------
// Bowyer-Watson Delaunay triangulation of random points in [-1,1]^2.

namespace detail {

struct DelTri {
  std::uint32_t a, b, c;
  Vec2 center;
  double r2;
};

inline DelTri make_tri(const std::vector<Vec2>& pts, std::uint32_t a, std::uint32_t b,
                       std::uint32_t c) {
  const Vec2 &pa = pts[a], &pb = pts[b], &pc = pts[c];
  const double d = 2.0 * ((pb.x() - pa.x()) * (pc.y() - pa.y()) -
                          (pb.y() - pa.y()) * (pc.x() - pa.x()));
  const double b2 = (pb - pa).squaredNorm(), c2 = (pc - pa).squaredNorm();
  Vec2 center;
  center.x() = pa.x() + ((pc.y() - pa.y()) * b2 - (pb.y() - pa.y()) * c2) / d;
  center.y() = pa.y() + ((pb.x() - pa.x()) * c2 - (pc.x() - pa.x()) * b2) / d;
  return {a, b, c, center, (center - pa).squaredNorm()};
}

}  // namespace detail

inline Mesh delaunay(const std::vector<Vec2>& input_pts) {
  std::vector<Vec2> pts = input_pts;
  const std::uint32_t n = static_cast<std::uint32_t>(pts.size());
  if (n < 3) throw MeshError("delaunay needs at least 3 points");
  // super-triangle enclosing everything
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const Vec2& p : pts) {
    lo = std::min({lo, p.x(), p.y()});
    hi = std::max({hi, p.x(), p.y()});
  }
  const double span = std::max(hi - lo, 1.0);
  pts.push_back({lo - 10.0 * span, lo - 10.0 * span});
  pts.push_back({hi + 20.0 * span, lo - 10.0 * span});
  pts.push_back({lo - 10.0 * span, hi + 20.0 * span});
  const double tol = 1e-12 * span * span;

  std::vector<detail::DelTri> tris{detail::make_tri(pts, n, n + 1, n + 2)};
  for (std::uint32_t p = 0; p < n; ++p) {
    std::vector<std::array<std::uint32_t, 2>> boundary;
    std::vector<detail::DelTri> keep;
    keep.reserve(tris.size() + 2);
    for (const auto& t : tris) {
      if ((pts[p] - t.center).squaredNorm() < t.r2 + tol) {
        const std::array<std::array<std::uint32_t, 2>, 3> edges = {
            {{t.a, t.b}, {t.b, t.c}, {t.c, t.a}}};
        for (const auto& e : edges) {
          bool cancelled = false;
          for (auto it = boundary.begin(); it != boundary.end(); ++it)
            if ((*it)[0] == e[1] && (*it)[1] == e[0]) {
              boundary.erase(it);
              cancelled = true;
              break;
            }
          if (!cancelled) boundary.push_back(e);
        }
      } else {
        keep.push_back(t);
      }
    }
    for (const auto& e : boundary) keep.push_back(detail::make_tri(pts, e[0], e[1], p));
    tris = std::move(keep);
  }
  Faces faces;
  for (const auto& t : tris)
    if (t.a < n && t.b < n && t.c < n) faces.push_back({t.a, t.b, t.c});
  std::vector<Vec3> verts(n);
  for (std::uint32_t i = 0; i < n; ++i) verts[i] = {input_pts[i].x(), input_pts[i].y(), 0.0};
  return build_mesh(std::move(verts), faces);
}

inline Mesh flat_random(int npoints, std::uint64_t seed = 1) {
  if (npoints < 3) throw MeshError("flat_random needs at least 3 points");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<Vec2> pts(npoints);
  for (auto& p : pts) {
    p.x() = dist(rng);
    p.y() = dist(rng);
  }
  return delaunay(pts);
}

// ---------------------------------------------------------------------------
// Closed triangulated cylinder: radius 1, z in [-1,1], lateral grid plus
// concentric-ring caps sharing the rim vertices.

inline Mesh cylinder(int nr, int nz) {
  if (nr < 3 || nz < 1) throw MeshError("cylinder needs nr >= 3, nz >= 1");
  const double pi = std::numbers::pi;
  std::vector<Vec3> verts;
  Faces faces;
  auto angle = [&](int i) { return 2.0 * pi * i / nr; };

  // lateral rings bottom to top: (nz+1) rings of nr vertices
  for (int j = 0; j <= nz; ++j) {
    const double z = -1.0 + 2.0 * j / nz;
    for (int i = 0; i < nr; ++i)
      verts.push_back({std::cos(angle(i)), std::sin(angle(i)), z});
  }
  auto lat = [&](int i, int j) { return std::uint32_t(j * nr + (i % nr)); };
  for (int j = 0; j < nz; ++j)
    for (int i = 0; i < nr; ++i) {
      faces.push_back({lat(i, j), lat(i + 1, j), lat(i + 1, j + 1)});
      faces.push_back({lat(i, j), lat(i + 1, j + 1), lat(i, j + 1)});
    }

  // caps: rings at radii k/m, k = m-1..1, then a center vertex
  const int m = std::max(1, nr / 8);
  for (int side = 0; side < 2; ++side) {
    const double z = side == 0 ? -1.0 : 1.0;
    const int rim_row = side == 0 ? 0 : nz;
    std::vector<std::uint32_t> outer(nr);
    for (int i = 0; i < nr; ++i) outer[i] = lat(i, rim_row);
    for (int k = m - 1; k >= 1; --k) {
      const double r = double(k) / m;
      std::vector<std::uint32_t> inner(nr);
      for (int i = 0; i < nr; ++i) {
        inner[i] = static_cast<std::uint32_t>(verts.size());
        verts.push_back({r * std::cos(angle(i)), r * std::sin(angle(i)), z});
      }
      for (int i = 0; i < nr; ++i) {
        const std::uint32_t o0 = outer[i], o1 = outer[(i + 1) % nr];
        const std::uint32_t i0 = inner[i], i1 = inner[(i + 1) % nr];
        if (side == 0) {  // -z cap faces downward
          faces.push_back({o0, i1, o1});
          faces.push_back({o0, i0, i1});
        } else {
          faces.push_back({o0, o1, i1});
          faces.push_back({o0, i1, i0});
        }
      }
      outer = std::move(inner);
    }
    const std::uint32_t center = static_cast<std::uint32_t>(verts.size());
    verts.push_back({0.0, 0.0, z});
    for (int i = 0; i < nr; ++i) {
      const std::uint32_t o0 = outer[i], o1 = outer[(i + 1) % nr];
      if (side == 0)
        faces.push_back({o0, center, o1});
      else
        faces.push_back({o0, o1, center});
    }
  }
  return build_mesh(std::move(verts), faces);
}

// ---------------------------------------------------------------------------
// Regional refinement: 1-to-4 subdivision of triangles inside the predicate
// region with red-green conforming closure, optionally projecting new
// vertices back onto an analytic surface.

using RegionPredicate = std::function<bool(const Vec3&)>;
using SurfaceProjector = std::function<Vec3(const Vec3&)>;

inline Mesh refine_region(const Mesh& mesh, const RegionPredicate& inside, int levels,
                          const SurfaceProjector& project = nullptr) {
  Mesh m = mesh;
  for (std::uint32_t e = 0; e < m.num_elements(); ++e)
    if (m.arity(e) != 3) throw MeshError("refine_region supports triangle meshes only");
  for (int level = 0; level < levels; ++level) {
    const std::uint32_t ne = m.num_elements();
    std::vector<char> red(ne, 0);
    for (std::uint32_t e = 0; e < ne; ++e)
      if (inside(cell_center(m, e))) red[e] = 1;

    // conforming closure: any triangle with >= 2 split edges is promoted
    auto edge_key = [&](std::uint32_t e, std::uint32_t k) {
      std::uint32_t a = m.vertex(e, k), b = m.vertex(e, (k + 1) % 3);
      if (a > b) std::swap(a, b);
      return (std::uint64_t(a) << 32) | b;
    };
    std::unordered_map<std::uint64_t, std::uint32_t> split_edges;  // key -> midpoint
    bool changed = true;
    while (changed) {
      changed = false;
      split_edges.clear();
      for (std::uint32_t e = 0; e < ne; ++e)
        if (red[e])
          for (std::uint32_t k = 0; k < 3; ++k) split_edges.emplace(edge_key(e, k), kNoIndex);
      for (std::uint32_t e = 0; e < ne; ++e) {
        if (red[e]) continue;
        int cnt = 0;
        for (std::uint32_t k = 0; k < 3; ++k)
          if (split_edges.count(edge_key(e, k))) ++cnt;
        if (cnt >= 2) {
          red[e] = 1;
          changed = true;
        }
      }
    }

    std::vector<Vec3> verts = m.xyz;
    auto midpoint = [&](std::uint64_t key) {
      auto& slot = split_edges[key];
      if (slot == kNoIndex) {
        const std::uint32_t a = static_cast<std::uint32_t>(key >> 32);
        const std::uint32_t b = static_cast<std::uint32_t>(key & 0xffffffffu);
        Vec3 p = 0.5 * (verts[a] + verts[b]);
        if (project) p = project(p);
        slot = static_cast<std::uint32_t>(verts.size());
        verts.push_back(p);
      }
      return slot;
    };

    Faces faces;
    faces.reserve(ne * 2);
    for (std::uint32_t e = 0; e < ne; ++e) {
      const std::uint32_t v0 = m.vertex(e, 0), v1 = m.vertex(e, 1), v2 = m.vertex(e, 2);
      if (red[e]) {
        const std::uint32_t m01 = midpoint(edge_key(e, 0));
        const std::uint32_t m12 = midpoint(edge_key(e, 1));
        const std::uint32_t m20 = midpoint(edge_key(e, 2));
        faces.push_back({v0, m01, m20});
        faces.push_back({v1, m12, m01});
        faces.push_back({v2, m20, m12});
        faces.push_back({m01, m12, m20});
      } else {
        int split_k = -1;
        for (std::uint32_t k = 0; k < 3; ++k)
          if (split_edges.count(edge_key(e, k))) split_k = static_cast<int>(k);
        if (split_k < 0) {
          faces.push_back({v0, v1, v2});
        } else {  // green bisection across the single split edge
          const std::uint32_t a = m.vertex(e, split_k);
          const std::uint32_t b = m.vertex(e, (split_k + 1) % 3);
          const std::uint32_t c = m.vertex(e, (split_k + 2) % 3);
          const std::uint32_t mid = midpoint(edge_key(e, static_cast<std::uint32_t>(split_k)));
          faces.push_back({a, mid, c});
          faces.push_back({mid, b, c});
        }
      }
    }
    m = build_mesh(std::move(verts), faces);
  }
  return m;
}

// ---------------------------------------------------------------------------
// Coarse/fine junction fixture: one large triangle below the origin and a fan
// of `fan` small triangles above it, all meeting at vertex 0. The edge-length
// contrast is 6:1, so cell areas differ by ~36x across the junction.

inline Mesh coarse_fine_junction(int fan) {
  // fan = 1 would place the two arc endpoints and the apex on one line
  if (fan < 2) throw MeshError("coarse_fine_junction needs fan >= 2");
  const double pi = std::numbers::pi;
  std::vector<Vec3> verts = {{0, 0, 0}, {6, -6, 0}, {-6, -6, 0}};
  Faces faces = {{0, 2, 1}};  // oriented +z like the fan
  std::vector<std::uint32_t> arc(fan + 1);
  for (int i = 0; i <= fan; ++i) {
    arc[i] = static_cast<std::uint32_t>(verts.size());
    const double a = pi * i / fan;
    verts.push_back({std::cos(a), std::sin(a), 0.0});
  }
  for (int i = 0; i < fan; ++i) faces.push_back({0, arc[i], arc[i + 1]});
  return build_mesh(std::move(verts), faces);
}

inline SurfaceProjector unit_sphere_projector() {
  return [](const Vec3& p) { return Vec3(p.normalized()); };
}

}  // namespace rdi::gen
