// Element thresholds, node-based oscillation indicator, and the
// dual-thresholding marker pipeline.
#pragma once

#include <cfloat>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "rdi/mesh.hpp"
#include "rdi/osus.hpp"

namespace rdi {

enum class WeightMode { Unit, Area };

// Default coefficients are calibrated empirically on the built-in sphere
// experiments (banded-cap profile on a level-4 icosphere, crossing waves on a
// 48x48 cubed sphere): with the compact radial weight used by the WLS fits,
// the overshoot next to a jump is only a few percent of the local data range,
// so the pre-filter constants must sit well below that ratio for the jump
// tube to pass; the node screening thresholds are then chosen so that C0
// jumps promote to marker 2 while smooth extrema and creases demote. With
// these values the calibration meshes give >= 0.95 C0 recall, zero or
// sub-percent false-positive rates away from the discontinuities, and all
// smooth-extremum nodes reverted.
struct DetectConfig {
  double c_local = 3e-4;   // local threshold coefficient
  double c_global = 1e-3;  // global threshold coefficient
  double kappa0 = 0.45;    // C0 node threshold
  double kappa1 = 0.1;     // C1 node threshold, kappa1 < kappa0
  double eps_beta = 1e-3;  // denominator safeguard
  WeightMode weights = WeightMode::Area;
  int beta_ring_interior = 1;
  int beta_ring_boundary = 2;  // at patch boundaries
  bool compute_all_beta = false;

  void validate() const {
    if (!(kappa0 > kappa1 && kappa1 > 0.0))
      throw OperatorError("thresholds must satisfy kappa0 > kappa1 > 0");
    if (c_local < 0.0 || c_global < 0.0 || eps_beta <= 0.0)
      throw OperatorError("invalid threshold coefficients");
  }
};

// Markers: 0 smooth, 1 C1 discontinuity, 2 C0 discontinuity.
struct IndicatorResult {
  std::vector<double> alpha;   // per cell
  std::vector<double> tau;     // per cell
  std::vector<double> beta;    // per node; NaN where not computed
  std::vector<std::uint8_t> markers;  // per node
};

// Smallest positive normal double; fixed safeguard in the beta denominator.
inline constexpr double kEpsMin = DBL_MIN;

// tau_sigma = max{ C_l * local_range * h_l^0.5, C_g * global_range * h_g^1.5 }.
// The local range of f is taken over the row support of the operator, which
// is exactly the union of the WLS stencils of the cell's vertices. A floor of
// 1e-11 * max|f| over the support keeps round-off-level alpha on locally
// constant data (where both ranges vanish and tau would be exactly zero) from
// passing the strict |alpha| > tau pre-filter.
inline double element_threshold(const OsusOperator& op, const std::vector<double>& f,
                                std::uint64_t cell, const DetectConfig& cfg,
                                double delta_f_global, double h_global) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  double amp = 0.0;
  for (std::uint64_t k = op.row_offsets[cell]; k < op.row_offsets[cell + 1]; ++k) {
    lo = std::min(lo, f[op.cols[k]]);
    hi = std::max(hi, f[op.cols[k]]);
    amp = std::max(amp, std::abs(f[op.cols[k]]));
  }
  const double delta_local = hi > lo ? hi - lo : 0.0;
  const double h_local = op.cell_h_local[cell];
  return std::max({cfg.c_local * delta_local * std::sqrt(h_local),
                   cfg.c_global * delta_f_global * h_global * std::sqrt(h_global),
                   1e-11 * amp});
}

namespace detail {

// Cells incident to each vertex, across all wedges.
inline std::vector<std::vector<std::uint32_t>> vertex_cells(const Mesh& m) {
  std::vector<std::vector<std::uint32_t>> inc(m.num_vertices());
  for (std::uint32_t e = 0; e < m.num_elements(); ++e)
    for (std::uint32_t i = 0; i < m.arity(e); ++i) inc[m.vertex(e, i)].push_back(e);
  return inc;
}

}  // namespace detail

// Cells entering the beta sum at v: the incident cells for ring 1, or the
// union over v's wedges of patch-local k-ring element sets for larger rings.
inline std::vector<std::uint32_t> beta_cells(const Mesh& m, std::uint32_t v, int ring,
                                             const std::vector<std::uint32_t>& incident) {
  if (ring <= 1) return incident;
  std::vector<std::uint32_t> out;
  std::vector<char> seen_elem(m.num_elements(), 0);
  std::vector<char> seeded(m.num_elements(), 0);
  for (std::uint32_t e : incident) {
    if (seeded[e]) continue;
    const Stencil st = k_ring(m, v, double(ring), e);
    for (std::uint32_t w : incident_elements(m, v, e)) seeded[w] = 1;
    for (std::uint32_t g : st.elems)
      if (!seen_elem[g]) { seen_elem[g] = 1; out.push_back(g); }
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline double beta_from_cells(const std::vector<std::uint32_t>& cells,
                              const std::vector<double>& alpha,
                              const std::vector<double>& cell_weight,
                              double eps_beta) {
  double wsum = 0.0, wa = 0.0, amax = 0.0;
  for (std::uint32_t c : cells) {
    wsum += cell_weight[c];
    wa += cell_weight[c] * alpha[c];
    amax = std::max(amax, std::abs(alpha[c]));
  }
  if (wsum <= 0.0) return 0.0;
  const double abar = wa / wsum;
  double num = 0.0;
  for (std::uint32_t c : cells) num += cell_weight[c] * std::abs(alpha[c] - abar);
  return num / (wsum * (std::abs(abar) + eps_beta * amax) + kEpsMin);
}

inline double node_beta(const Mesh& m, const std::vector<double>& alpha, std::uint32_t v,
                        const DetectConfig& cfg) {
  const auto incidence = detail::vertex_cells(m);
  const auto on_boundary = boundary_vertex_flags(m);
  std::vector<double> w(m.num_elements(), 1.0);
  if (cfg.weights == WeightMode::Area)
    for (std::uint32_t e = 0; e < m.num_elements(); ++e) w[e] = element_area(m, e);
  const int ring = on_boundary[v] ? cfg.beta_ring_boundary : cfg.beta_ring_interior;
  return beta_from_cells(beta_cells(m, v, ring, incidence[v]), alpha, w, cfg.eps_beta);
}

// The dual-thresholding pipeline: alpha from the operator, element pre-filter
// against tau, then beta screening of the pre-filtered nodes.
inline IndicatorResult detect(const Mesh& m, const OsusOperator& op,
                              const std::vector<double>& f, const DetectConfig& cfg = {}) {
  cfg.validate();
  if (op.fingerprint != mesh_fingerprint(m))
    throw OperatorError("operator fingerprint does not match mesh");
  IndicatorResult res;
  res.alpha = apply(op, f);

  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double x : f) { lo = std::min(lo, x); hi = std::max(hi, x); }
  const double delta_f_global = hi > lo ? hi - lo : 0.0;
  const double h_global = global_edge_length(m);

  res.tau.resize(op.num_cells);
  res.markers.assign(m.num_vertices(), 0);
  for (std::uint64_t c = 0; c < op.num_cells; ++c) {
    res.tau[c] = element_threshold(op, f, c, cfg, delta_f_global, h_global);
    if (std::abs(res.alpha[c]) > res.tau[c])
      for (std::uint32_t i = 0; i < m.arity(static_cast<std::uint32_t>(c)); ++i)
        res.markers[m.vertex(static_cast<std::uint32_t>(c), i)] = 1;
  }

  const auto incidence = detail::vertex_cells(m);
  const auto on_boundary = boundary_vertex_flags(m);
  std::vector<double> w(m.num_elements(), 1.0);
  if (cfg.weights == WeightMode::Area)
    for (std::uint32_t e = 0; e < m.num_elements(); ++e) w[e] = element_area(m, e);

  res.beta.assign(m.num_vertices(), std::numeric_limits<double>::quiet_NaN());
  for (std::uint32_t v = 0; v < m.num_vertices(); ++v) {
    if (res.markers[v] != 1 && !cfg.compute_all_beta) continue;
    if (incidence[v].empty()) continue;
    const int ring = on_boundary[v] ? cfg.beta_ring_boundary : cfg.beta_ring_interior;
    const double beta =
        beta_from_cells(beta_cells(m, v, ring, incidence[v]), res.alpha, w, cfg.eps_beta);
    res.beta[v] = beta;
    if (res.markers[v] == 1) {
      if (beta > cfg.kappa0)
        res.markers[v] = 2;
      else if (beta <= cfg.kappa1)
        res.markers[v] = 0;
    }
  }
  return res;
}

// Local jump approximation: 1-ring range of f on detected nodes, zero
// elsewhere.
inline std::vector<double> jump_function(const Mesh& m, const std::vector<double>& f,
                                         const std::vector<std::uint8_t>& markers) {
  const auto incidence = detail::vertex_cells(m);
  std::vector<double> jump(m.num_vertices(), 0.0);
  for (std::uint32_t v = 0; v < m.num_vertices(); ++v) {
    if (markers[v] == 0) continue;
    double lo = f[v], hi = f[v];
    for (std::uint32_t e : incidence[v])
      for (std::uint32_t i = 0; i < m.arity(e); ++i) {
        lo = std::min(lo, f[m.vertex(e, i)]);
        hi = std::max(hi, f[m.vertex(e, i)]);
      }
    jump[v] = hi - lo;
  }
  return jump;
}

}  // namespace rdi
