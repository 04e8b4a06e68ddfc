// Array-based half-facet surface mesh (triangles and quads) with
// neighborhood queries, geometric measures, feature detection, and
// virtual splitting along feature curves.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <queue>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace rdi {

using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;

// Sentinel for "no half-facet" / boundary.
inline constexpr std::uint32_t kNoHalfFacet = 0xffffffffu;
inline constexpr std::uint32_t kNoIndex = 0xffffffffu;

class MeshError : public std::runtime_error {
public:
  explicit MeshError(const std::string& what) : std::runtime_error(what) {}
};

// A half-facet is identified by its position in the flattened connectivity
// array: h = elem_offset + local_edge. Edge k of an m-gon runs from local
// vertex k to vertex (k+1) mod m.
struct Mesh {
  std::vector<Vec3> xyz;                 // vertex coordinates, length N
  std::vector<std::uint32_t> conn;       // flattened connectivity
  std::vector<std::uint32_t> offs;       // element offsets, length M+1
  std::vector<std::uint32_t> twin;       // twin half-facet per half-facet
  std::vector<std::uint32_t> v2hf;       // one incident half-facet per vertex
  std::vector<std::uint32_t> patch;      // per-element patch id
  std::uint32_t num_patches = 1;

  std::uint32_t num_vertices() const { return static_cast<std::uint32_t>(xyz.size()); }
  std::uint32_t num_elements() const { return static_cast<std::uint32_t>(offs.size()) - 1; }
  std::uint32_t arity(std::uint32_t e) const { return offs[e + 1] - offs[e]; }
  std::uint32_t vertex(std::uint32_t e, std::uint32_t k) const { return conn[offs[e] + k]; }

  // element containing half-facet h (binary search over offs)
  std::uint32_t hf_element(std::uint32_t h) const {
    auto it = std::upper_bound(offs.begin(), offs.end(), h);
    return static_cast<std::uint32_t>(it - offs.begin()) - 1;
  }
  std::uint32_t hf_local(std::uint32_t h) const { return h - offs[hf_element(h)]; }
};

// ---------------------------------------------------------------------------
// Construction

namespace detail {

struct EdgeKeyHash {
  std::size_t operator()(const std::pair<std::uint32_t, std::uint32_t>& k) const {
    return std::hash<std::uint64_t>()((std::uint64_t(k.first) << 32) | k.second);
  }
};

}  // namespace detail

// Build half-facet adjacency for an indexed face set. Faces must be triangles
// or quadrilaterals; every interior edge must have exactly two incident faces.
inline Mesh build_mesh(std::vector<Vec3> vertices,
                       const std::vector<std::vector<std::uint32_t>>& faces) {
  Mesh m;
  m.xyz = std::move(vertices);
  const std::uint32_t n = m.num_vertices();
  m.offs.push_back(0);
  for (const auto& f : faces) {
    if (f.size() != 3 && f.size() != 4)
      throw MeshError("unsupported polygon arity " + std::to_string(f.size()) +
                      " (triangles and quads only)");
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (f[i] >= n) throw MeshError("face vertex index out of range");
      for (std::size_t j = i + 1; j < f.size(); ++j)
        if (f[i] == f[j]) throw MeshError("degenerate element with repeated vertex");
    }
    m.conn.insert(m.conn.end(), f.begin(), f.end());
    m.offs.push_back(static_cast<std::uint32_t>(m.conn.size()));
  }
  m.twin.assign(m.conn.size(), kNoHalfFacet);
  m.patch.assign(faces.size(), 0);
  m.v2hf.assign(n, kNoHalfFacet);

  // Match half-facets through their unordered vertex pair.
  std::unordered_map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t,
                     detail::EdgeKeyHash> open;
  open.reserve(m.conn.size());
  for (std::uint32_t e = 0; e < m.num_elements(); ++e) {
    const std::uint32_t ar = m.arity(e);
    for (std::uint32_t k = 0; k < ar; ++k) {
      const std::uint32_t h = m.offs[e] + k;
      const std::uint32_t a = m.vertex(e, k);
      const std::uint32_t b = m.vertex(e, (k + 1) % ar);
      m.v2hf[a] = h;
      auto key = std::minmax(a, b);
      auto it = open.find(key);
      if (it == open.end()) {
        open.emplace(key, h);
      } else if (it->second == kNoHalfFacet) {
        throw MeshError("non-manifold edge (" + std::to_string(key.first) + "," +
                        std::to_string(key.second) + "): more than two incident faces");
      } else {
        m.twin[h] = it->second;
        m.twin[it->second] = h;
        it->second = kNoHalfFacet;  // closed; a third face is non-manifold
      }
    }
  }
  return m;
}

// ---------------------------------------------------------------------------
// Local traversal

// Elements incident to vertex v reachable from seed element by rotating
// through twin half-facets. Never crosses boundary or virtually split edges,
// so after splitting this yields only the wedge of v that contains seed.
inline std::vector<std::uint32_t> incident_elements(const Mesh& m, std::uint32_t v,
                                                    std::uint32_t seed) {
  std::vector<std::uint32_t> out;
  std::vector<std::uint32_t> stack{seed};
  while (!stack.empty()) {
    const std::uint32_t e = stack.back();
    stack.pop_back();
    if (std::find(out.begin(), out.end(), e) != out.end()) continue;
    out.push_back(e);
    const std::uint32_t ar = m.arity(e);
    std::uint32_t k = kNoIndex;
    for (std::uint32_t i = 0; i < ar; ++i)
      if (m.vertex(e, i) == v) { k = i; break; }
    if (k == kNoIndex) throw MeshError("seed element does not contain vertex");
    // cross the two edges of e incident on v
    const std::uint32_t h_out = m.offs[e] + k;                    // edge v -> next
    const std::uint32_t h_in = m.offs[e] + (k + ar - 1) % ar;     // edge prev -> v
    for (std::uint32_t h : {h_out, h_in}) {
      const std::uint32_t t = m.twin[h];
      if (t != kNoHalfFacet) stack.push_back(m.hf_element(t));
    }
  }
  std::sort(out.begin() + 1, out.end());
  return out;
}

inline std::vector<std::uint32_t> incident_elements(const Mesh& m, std::uint32_t v) {
  if (m.v2hf[v] == kNoHalfFacet) throw MeshError("isolated vertex " + std::to_string(v));
  return incident_elements(m, v, m.hf_element(m.v2hf[v]));
}

// True if some half-facet bordering v's wedge (seeded at `seed`) is open.
inline bool is_wedge_boundary_vertex(const Mesh& m, std::uint32_t v, std::uint32_t seed) {
  for (std::uint32_t e : incident_elements(m, v, seed)) {
    const std::uint32_t ar = m.arity(e);
    for (std::uint32_t i = 0; i < ar; ++i) {
      if (m.vertex(e, i) == v) {
        if (m.twin[m.offs[e] + i] == kNoHalfFacet) return true;
        if (m.twin[m.offs[e] + (i + ar - 1) % ar] == kNoHalfFacet) return true;
      }
    }
  }
  return false;
}

// Per-vertex flag: touches an open half-facet in any wedge (mesh boundary or
// virtually split edge).
inline std::vector<char> boundary_vertex_flags(const Mesh& m) {
  std::vector<char> flags(m.num_vertices(), 0);
  for (std::uint32_t e = 0; e < m.num_elements(); ++e) {
    const std::uint32_t ar = m.arity(e);
    for (std::uint32_t i = 0; i < ar; ++i)
      if (m.twin[m.offs[e] + i] == kNoHalfFacet) {
        flags[m.vertex(e, i)] = 1;
        flags[m.vertex(e, (i + 1) % ar)] = 1;
      }
  }
  return flags;
}

// Ordered vertex neighborhood used as a WLS stencil.
struct Stencil {
  std::uint32_t anchor = kNoIndex;
  std::vector<std::uint32_t> verts;  // anchor first
  std::vector<std::uint32_t> elems;  // ring elements, ascending
};

// k-ring neighborhood of v with half-integer ring sizes. Growth goes only
// through twin half-facets, so rings never cross boundaries or virtual
// splits; seed selects the wedge for vertices on split curves.
inline Stencil k_ring(const Mesh& m, std::uint32_t v, double k, std::uint32_t seed) {
  if (k < 1.0 || k > 7.0 || std::fmod(k * 2.0, 1.0) != 0.0)
    throw MeshError("ring size must be a half-integer >= 1");
  std::vector<std::uint32_t> elems = incident_elements(m, v, seed);
  std::vector<char> in_elems(m.num_elements(), 0);
  for (std::uint32_t e : elems) in_elems[e] = 1;

  auto add_elem = [&](std::uint32_t e, std::vector<std::uint32_t>& dst) {
    if (!in_elems[e]) { in_elems[e] = 1; dst.push_back(e); }
  };

  const int full_steps = static_cast<int>(k) - 1;
  const bool half_step = std::fmod(k, 1.0) != 0.0;

  for (int step = 0; step < full_steps; ++step) {
    // vertices of current element set
    std::vector<std::uint32_t> vs;
    std::vector<char> seen_v(m.num_vertices(), 0);
    for (std::uint32_t e : elems)
      for (std::uint32_t i = 0; i < m.arity(e); ++i) {
        const std::uint32_t u = m.vertex(e, i);
        if (!seen_v[u]) { seen_v[u] = 1; vs.push_back(u); }
      }
    // expand around each ring vertex through its wedge containing a current elem
    std::vector<std::uint32_t> grown;
    for (std::uint32_t u : vs)
      for (std::uint32_t e : elems) {
        bool has = false;
        for (std::uint32_t i = 0; i < m.arity(e); ++i)
          if (m.vertex(e, i) == u) { has = true; break; }
        if (!has) continue;
        for (std::uint32_t g : incident_elements(m, u, e)) add_elem(g, grown);
      }
    elems.insert(elems.end(), grown.begin(), grown.end());
  }
  if (half_step) {
    std::vector<std::uint32_t> grown;
    for (std::uint32_t e : elems)
      for (std::uint32_t h = m.offs[e]; h < m.offs[e + 1]; ++h)
        if (m.twin[h] != kNoHalfFacet) add_elem(m.hf_element(m.twin[h]), grown);
    elems.insert(elems.end(), grown.begin(), grown.end());
  }

  Stencil s;
  s.anchor = v;
  std::sort(elems.begin(), elems.end());
  s.elems = std::move(elems);
  std::vector<char> seen(m.num_vertices(), 0);
  seen[v] = 1;
  s.verts.push_back(v);
  std::vector<std::uint32_t> others;
  for (std::uint32_t e : s.elems)
    for (std::uint32_t i = 0; i < m.arity(e); ++i) {
      const std::uint32_t u = m.vertex(e, i);
      if (!seen[u]) { seen[u] = 1; others.push_back(u); }
    }
  std::sort(others.begin(), others.end());
  s.verts.insert(s.verts.end(), others.begin(), others.end());
  return s;
}

inline Stencil k_ring(const Mesh& m, std::uint32_t v, double k) {
  if (m.v2hf[v] == kNoHalfFacet) throw MeshError("isolated vertex " + std::to_string(v));
  return k_ring(m, v, k, m.hf_element(m.v2hf[v]));
}

// ---------------------------------------------------------------------------
// Geometric measures

inline Vec3 cell_center(const Mesh& m, std::uint32_t e) {
  Vec3 c = Vec3::Zero();
  const std::uint32_t ar = m.arity(e);
  for (std::uint32_t i = 0; i < ar; ++i) c += m.xyz[m.vertex(e, i)];
  return c / double(ar);
}

// Newell normal (not normalized); robust for mildly non-planar quads.
inline Vec3 face_normal(const Mesh& m, std::uint32_t e) {
  Vec3 n = Vec3::Zero();
  const std::uint32_t ar = m.arity(e);
  for (std::uint32_t i = 0; i < ar; ++i) {
    const Vec3& a = m.xyz[m.vertex(e, i)];
    const Vec3& b = m.xyz[m.vertex(e, (i + 1) % ar)];
    n += a.cross(b);
  }
  return n;
}

// Triangle area by cross product; quads split along the 0-2 diagonal.
inline double element_area(const Mesh& m, std::uint32_t e) {
  const std::uint32_t ar = m.arity(e);
  const Vec3& a = m.xyz[m.vertex(e, 0)];
  const Vec3& b = m.xyz[m.vertex(e, 1)];
  const Vec3& c = m.xyz[m.vertex(e, 2)];
  double area = 0.5 * (b - a).cross(c - a).norm();
  if (ar == 4) {
    const Vec3& d = m.xyz[m.vertex(e, 3)];
    area += 0.5 * (c - a).cross(d - a).norm();
  }
  return area;
}

// Global average edge length (each undirected edge counted once).
inline double global_edge_length(const Mesh& m) {
  double sum = 0.0;
  std::size_t count = 0;
  for (std::uint32_t e = 0; e < m.num_elements(); ++e) {
    const std::uint32_t ar = m.arity(e);
    for (std::uint32_t i = 0; i < ar; ++i) {
      const std::uint32_t h = m.offs[e] + i;
      if (m.twin[h] != kNoHalfFacet && m.twin[h] < h) continue;  // visited via twin
      sum += (m.xyz[m.vertex(e, (i + 1) % ar)] - m.xyz[m.vertex(e, i)]).norm();
      ++count;
    }
  }
  return count ? sum / double(count) : 0.0;
}

// ---------------------------------------------------------------------------
// Features and virtual splitting

struct FeatureEdgeSet {
  std::vector<std::uint32_t> halffacets;  // both twins of every feature edge
  std::vector<std::uint32_t> corners;     // vertices where feature curves turn or meet
};

// Mark edges whose dihedral angle exceeds the threshold. Boundary edges are
// already open and never listed.
inline FeatureEdgeSet detect_features(const Mesh& m, double dihedral_threshold) {
  FeatureEdgeSet fs;
  const double cos_thresh = std::cos(dihedral_threshold);
  for (std::uint32_t e = 0; e < m.num_elements(); ++e) {
    const std::uint32_t ar = m.arity(e);
    for (std::uint32_t i = 0; i < ar; ++i) {
      const std::uint32_t h = m.offs[e] + i;
      const std::uint32_t t = m.twin[h];
      if (t == kNoHalfFacet || t < h) continue;
      const Vec3 n0 = face_normal(m, e).normalized();
      const Vec3 n1 = face_normal(m, m.hf_element(t)).normalized();
      if (n0.dot(n1) < cos_thresh) {
        fs.halffacets.push_back(h);
        fs.halffacets.push_back(t);
      }
    }
  }
  std::sort(fs.halffacets.begin(), fs.halffacets.end());

  // corner vertices: >= 3 incident feature edges, or exactly 2 whose tangents
  // turn by more than 60 degrees
  std::unordered_map<std::uint32_t, std::vector<std::pair<std::uint32_t, std::uint32_t>>> at_vertex;
  for (std::size_t i = 0; i < fs.halffacets.size(); i += 2) {
    const std::uint32_t h = fs.halffacets[i];
    const std::uint32_t e = m.hf_element(h);
    const std::uint32_t k = h - m.offs[e];
    const std::uint32_t a = m.vertex(e, k);
    const std::uint32_t b = m.vertex(e, (k + 1) % m.arity(e));
    at_vertex[a].push_back({a, b});
    at_vertex[b].push_back({b, a});
  }
  for (const auto& [v, edges] : at_vertex) {
    if (edges.size() >= 3) {
      fs.corners.push_back(v);
    } else if (edges.size() == 2) {
      const Vec3 d0 = (m.xyz[edges[0].second] - m.xyz[v]).normalized();
      const Vec3 d1 = (m.xyz[edges[1].second] - m.xyz[v]).normalized();
      // straight continuation has d0.dot(d1) = -1; corner if turn > 60 deg
      if (d0.dot(d1) > -0.5) fs.corners.push_back(v);
    }
  }
  std::sort(fs.corners.begin(), fs.corners.end());
  return fs;
}

// Disconnect twin half-facets along feature edges and label the resulting
// edge-connected components. Coordinates and connectivity are unchanged.
inline Mesh virtual_split(const Mesh& mesh, const FeatureEdgeSet& features) {
  Mesh m = mesh;
  for (std::uint32_t h : features.halffacets) {
    if (h >= m.twin.size()) throw MeshError("feature half-facet out of range");
    m.twin[h] = kNoHalfFacet;
  }
  // connected components over twin adjacency
  m.patch.assign(m.num_elements(), kNoIndex);
  std::uint32_t next = 0;
  for (std::uint32_t start = 0; start < m.num_elements(); ++start) {
    if (m.patch[start] != kNoIndex) continue;
    std::queue<std::uint32_t> q;
    q.push(start);
    m.patch[start] = next;
    while (!q.empty()) {
      const std::uint32_t e = q.front();
      q.pop();
      for (std::uint32_t h = m.offs[e]; h < m.offs[e + 1]; ++h) {
        const std::uint32_t t = m.twin[h];
        if (t == kNoHalfFacet) continue;
        const std::uint32_t g = m.hf_element(t);
        if (m.patch[g] == kNoIndex) { m.patch[g] = next; q.push(g); }
      }
    }
    ++next;
  }
  m.num_patches = next;
  return m;
}

// Full-scan structural checks: twin involution, index validity.
inline void check_mesh(const Mesh& m) {
  for (std::uint32_t h = 0; h < m.twin.size(); ++h) {
    const std::uint32_t t = m.twin[h];
    if (t == kNoHalfFacet) continue;
    if (t >= m.twin.size() || m.twin[t] != h) throw MeshError("twin relation is not an involution");
  }
  for (std::uint32_t c : m.conn)
    if (c >= m.num_vertices()) throw MeshError("connectivity index out of range");
}

}  // namespace rdi
