// Local tangent-plane projection, weighted least-squares polynomial fitting
// with condition monitoring and stencil enlargement, and WALF evaluation.
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "rdi/mesh.hpp"

namespace rdi {

class FitError : public std::runtime_error {
public:
  explicit FitError(const std::string& what) : std::runtime_error(what) {}
};

struct LocalFrame {
  Vec3 origin = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();
  Vec3 t1 = Vec3::UnitX();
  Vec3 t2 = Vec3::UnitY();

  Vec2 project(const Vec3& x) const {
    const Vec3 d = x - origin;
    return Vec2(t1.dot(d), t2.dot(d));
  }
};

// Vertex normal = area-weighted mean of wedge face normals; tangent basis by
// deterministic completion from the coordinate axis least aligned with n.
inline LocalFrame local_frame(const Mesh& m, std::uint32_t v, std::uint32_t seed) {
  LocalFrame fr;
  fr.origin = m.xyz[v];
  Vec3 n = Vec3::Zero();
  for (std::uint32_t e : incident_elements(m, v, seed)) n += 0.5 * face_normal(m, e);
  const double len = n.norm();
  if (len < 1e-14)
    throw FitError("degenerate vertex normal (fold-over) at vertex " + std::to_string(v));
  fr.normal = n / len;
  int axis = 0;
  fr.normal.cwiseAbs().minCoeff(&axis);
  fr.t1 = Vec3::Unit(axis).cross(fr.normal).normalized();
  fr.t2 = fr.normal.cross(fr.t1);
  return fr;
}

inline LocalFrame local_frame(const Mesh& m, std::uint32_t v) {
  if (m.v2hf[v] == kNoHalfFacet) throw FitError("isolated vertex " + std::to_string(v));
  return local_frame(m, v, m.hf_element(m.v2hf[v]));
}

inline int num_coefficients(int degree) { return (degree + 1) * (degree + 2) / 2; }

// Rows of scaled monomials (u/h, v/h) in graded lexicographic order:
// 1, u, v, u^2, uv, v^2, ...
inline Eigen::RowVectorXd monomial_row(const Vec2& uv, int degree, double h) {
  const double u = uv.x() / h, v = uv.y() / h;
  Eigen::RowVectorXd row(num_coefficients(degree));
  int c = 0;
  for (int d = 0; d <= degree; ++d)
    for (int i = d; i >= 0; --i) row(c++) = std::pow(u, i) * std::pow(v, d - i);
  return row;
}

inline Eigen::MatrixXd vandermonde(const std::vector<Vec2>& uv, int degree, double h) {
  Eigen::MatrixXd a(uv.size(), num_coefficients(degree));
  for (std::size_t i = 0; i < uv.size(); ++i) a.row(i) = monomial_row(uv[i], degree, h);
  return a;
}

// C2 compactly supported radial profile, phi(0)=1, phi(t)=0 for t>=1.
inline double radial_profile(double t) {
  if (t >= 1.0) return 0.0;
  const double s = 1.0 - t;
  const double s2 = s * s;
  return s2 * s2 * (4.0 * t + 1.0);
}

inline std::vector<double> radial_weights(const std::vector<Vec2>& uv, double rho) {
  if (rho <= 0.0) throw FitError("support radius must be positive");
  std::vector<double> w(uv.size());
  bool any = false;
  for (std::size_t i = 0; i < uv.size(); ++i) {
    w[i] = radial_profile(uv[i].norm() / rho);
    any = any || w[i] > 0.0;
  }
  if (!any) throw FitError("all radial weights vanished; increase support radius");
  return w;
}

struct RingPolicy {
  double interior = 1.5;        // default stencil ring for interior vertices
  double boundary = 3.0;        // default near patch boundaries
  double cap = 3.5;             // enlargement stops here
  double cond_threshold = 1e4;  // on the scaled Vandermonde estimate
};

// The value-independent part of a vertex fit: uv coordinates, length scale,
// and the matrix P with coefficients = P * f_stencil. P absorbs the weights
// and the rank-revealing solve, so composing a monomial row with P yields the
// nodal weights of any point evaluation.
struct VertexFit {
  std::uint32_t vertex = kNoIndex;
  LocalFrame frame;
  Stencil stencil;
  std::vector<Vec2> uv;        // per stencil vertex, anchor at (0,0)
  double h = 1.0;              // local uv length scale used for column scaling
  Eigen::MatrixXd coeff_map;   // num_coefficients x stencil size
  double cond = 0.0;
  double ring_used = 0.0;
  bool flagged = false;        // still ill-conditioned at the ring cap
};

// Mean uv edge length over the stencil's elements, each undirected edge once.
inline double local_uv_edge_length(const Mesh& m, const Stencil& st,
                                   const std::vector<Vec2>& uv) {
  std::vector<std::uint32_t> pos(m.num_vertices(), kNoIndex);
  for (std::size_t i = 0; i < st.verts.size(); ++i) pos[st.verts[i]] = static_cast<std::uint32_t>(i);
  std::vector<std::uint64_t> edges;
  for (std::uint32_t e : st.elems) {
    const std::uint32_t ar = m.arity(e);
    for (std::uint32_t i = 0; i < ar; ++i) {
      const std::uint32_t a = m.vertex(e, i);
      const std::uint32_t b = m.vertex(e, (i + 1) % ar);
      if (pos[a] == kNoIndex || pos[b] == kNoIndex) continue;
      const auto [lo, hi] = std::minmax(a, b);
      edges.push_back((std::uint64_t(lo) << 32) | hi);
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  double sum = 0.0;
  for (std::uint64_t key : edges) {
    const std::uint32_t a = static_cast<std::uint32_t>(key >> 32);
    const std::uint32_t b = static_cast<std::uint32_t>(key & 0xffffffffu);
    sum += (uv[pos[a]] - uv[pos[b]]).norm();
  }
  return edges.empty() ? 1.0 : sum / double(edges.size());
}

inline VertexFit build_vertex_fit(const Mesh& m, std::uint32_t v, std::uint32_t seed,
                                  int degree, double ring_start, const RingPolicy& policy) {
  VertexFit fit;
  fit.vertex = v;
  fit.frame = local_frame(m, v, seed);
  for (double ring = ring_start;; ring += 0.5) {
    fit.stencil = k_ring(m, v, ring, seed);
    fit.ring_used = ring;
    fit.uv.resize(fit.stencil.verts.size());
    for (std::size_t i = 0; i < fit.uv.size(); ++i)
      fit.uv[i] = fit.frame.project(m.xyz[fit.stencil.verts[i]]);
    fit.h = local_uv_edge_length(m, fit.stencil, fit.uv);

    const int ncoef = num_coefficients(degree);
    if (static_cast<int>(fit.uv.size()) >= ncoef) {
      double max_r = 0.0;
      for (const Vec2& p : fit.uv) max_r = std::max(max_r, p.norm());
      const double rho = 1.1 * max_r;
      const Eigen::MatrixXd a = vandermonde(fit.uv, degree, fit.h);
      const std::vector<double> w = radial_weights(fit.uv, rho);
      Eigen::MatrixXd wa = a;
      for (Eigen::Index i = 0; i < wa.rows(); ++i) wa.row(i) *= w[i];
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(wa);
      const Eigen::VectorXd rdiag = qr.matrixR().diagonal().cwiseAbs();
      const double rmin = rdiag.minCoeff();
      fit.cond = rmin > 0.0 ? rdiag.maxCoeff() / rmin
                            : std::numeric_limits<double>::infinity();
      if (fit.cond <= policy.cond_threshold || ring >= policy.cap) {
        Eigen::MatrixXd wdiag = Eigen::MatrixXd::Zero(wa.rows(), wa.rows());
        for (Eigen::Index i = 0; i < wa.rows(); ++i) wdiag(i, i) = w[i];
        fit.coeff_map = qr.solve(wdiag);
        fit.flagged = fit.cond > policy.cond_threshold;
        return fit;
      }
    } else if (ring >= policy.cap) {
      // rank-deficient by construction; best effort with whatever we have
      const Eigen::MatrixXd a = vandermonde(fit.uv, degree, fit.h);
      fit.coeff_map = a.completeOrthogonalDecomposition().pseudoInverse();
      fit.cond = std::numeric_limits<double>::infinity();
      fit.flagged = true;
      return fit;
    }
  }
}

inline VertexFit build_vertex_fit(const Mesh& m, std::uint32_t v, int degree,
                                  const RingPolicy& policy = {}) {
  if (m.v2hf[v] == kNoHalfFacet) throw FitError("isolated vertex " + std::to_string(v));
  const std::uint32_t seed = m.hf_element(m.v2hf[v]);
  const double start =
      is_wedge_boundary_vertex(m, v, seed) ? policy.boundary : policy.interior;
  return build_vertex_fit(m, v, seed, degree, start, policy);
}

struct WlsFit {
  int degree = 2;
  Eigen::VectorXd coefficients;  // graded lex monomial coefficients
  double cond = 0.0;
  bool flagged = false;
  VertexFit basis;  // frame, stencil, uv, h
};

// Fit nodal values over the vertex stencil. The coefficient vector lives in
// the scaled monomial basis of basis.h.
inline WlsFit wls_fit(const Mesh& m, std::uint32_t v, const std::vector<double>& values,
                      int degree = 2, const RingPolicy& policy = {}) {
  WlsFit out;
  out.degree = degree;
  out.basis = build_vertex_fit(m, v, degree, policy);
  Eigen::VectorXd f(out.basis.stencil.verts.size());
  for (std::size_t i = 0; i < out.basis.stencil.verts.size(); ++i) {
    const std::uint32_t u = out.basis.stencil.verts[i];
    if (u >= values.size()) throw FitError("values not defined on all stencil vertices");
    f(static_cast<Eigen::Index>(i)) = values[u];
  }
  out.coefficients = out.basis.coeff_map * f;
  out.cond = out.basis.cond;
  out.flagged = out.basis.flagged;
  return out;
}

inline double eval_fit(const WlsFit& fit, const Vec3& p) {
  const Vec2 uv = fit.basis.frame.project(p);
  return monomial_row(uv, fit.degree, fit.basis.h).dot(fit.coefficients);
}

// WALF: convex combination of per-vertex fits evaluated at p. xi must hold
// one natural-coordinate weight per element vertex.
inline double walf_eval(const Mesh& m, std::uint32_t elem, const std::vector<WlsFit>& fits,
                        const Vec3& p, const std::vector<double>& xi) {
  const std::uint32_t ar = m.arity(elem);
  if (fits.size() != ar || xi.size() != ar)
    throw FitError("walf_eval needs one fit and one weight per element vertex");
  double val = 0.0;
  for (std::uint32_t i = 0; i < ar; ++i) val += xi[i] * eval_fit(fits[i], p);
  return val;
}

// Per-vertex local average uv edge length (default stencil), plus the global
// xyz edge-length mean.
struct LengthScales {
  double global = 0.0;
  std::vector<double> local;  // per vertex
};

inline LengthScales length_scales(const Mesh& m, double ring = 1.5) {
  LengthScales ls;
  ls.global = global_edge_length(m);
  ls.local.resize(m.num_vertices(), 0.0);
  for (std::uint32_t v = 0; v < m.num_vertices(); ++v) {
    if (m.v2hf[v] == kNoHalfFacet) continue;
    const LocalFrame fr = local_frame(m, v);
    const Stencil st = k_ring(m, v, ring);
    std::vector<Vec2> uv(st.verts.size());
    for (std::size_t i = 0; i < uv.size(); ++i) uv[i] = fr.project(m.xyz[st.verts[i]]);
    ls.local[v] = local_uv_edge_length(m, st, uv);
  }
  return ls;
}

}  // namespace rdi
