// Offline assembly of the sparse overshoot-undershoot operator and its
// online application. Row i of the operator maps nodal values to the
// difference between quadratic WALF and linear/bilinear interpolation at the
// center of cell i.
#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "rdi/mesh.hpp"
#include "rdi/wls.hpp"

namespace rdi {

class OperatorError : public std::runtime_error {
public:
  explicit OperatorError(const std::string& what) : std::runtime_error(what) {}
};

// FNV-1a over counts, coordinates, and connectivity.
inline std::uint64_t mesh_fingerprint(const Mesh& m) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= p[i];
      h *= 1099511628211ull;
    }
  };
  const std::uint64_t n = m.num_vertices(), cells = m.num_elements();
  mix(&n, sizeof n);
  mix(&cells, sizeof cells);
  for (const Vec3& p : m.xyz) {
    const double c[3] = {p.x(), p.y(), p.z()};
    mix(c, sizeof c);
  }
  mix(m.conn.data(), m.conn.size() * sizeof(std::uint32_t));
  mix(m.offs.data(), m.offs.size() * sizeof(std::uint32_t));
  return h;
}

struct OsusOperator {
  std::uint64_t num_nodes = 0;
  std::uint64_t num_cells = 0;
  std::uint64_t fingerprint = 0;
  std::vector<std::uint64_t> row_offsets;  // num_cells + 1
  std::vector<std::uint32_t> cols;
  std::vector<double> vals;
  std::vector<double> cell_h_local;        // per-cell mean local uv edge length
  std::vector<std::uint32_t> flagged_cells;  // rows built from ill-conditioned fits

  std::uint64_t nnz() const { return vals.size(); }

  bool operator==(const OsusOperator& o) const {
    return num_nodes == o.num_nodes && num_cells == o.num_cells &&
           fingerprint == o.fingerprint && row_offsets == o.row_offsets &&
           cols == o.cols && vals == o.vals && cell_h_local == o.cell_h_local &&
           flagged_cells == o.flagged_cells;
  }
};

struct AssembleOptions {
  int degree = 2;
  RingPolicy rings;
};

inline OsusOperator assemble(const Mesh& m, const AssembleOptions& opt = {}) {
  OsusOperator op;
  op.num_nodes = m.num_vertices();
  op.num_cells = m.num_elements();
  op.fingerprint = mesh_fingerprint(m);
  op.row_offsets.push_back(0);

  const std::vector<char> on_boundary = boundary_vertex_flags(m);

  // One fit per (vertex, wedge); a vertex on a split curve has one fit per
  // incident patch. The wedge is keyed by its smallest element index.
  std::map<std::pair<std::uint32_t, std::uint32_t>, VertexFit> fits;
  auto fit_for = [&](std::uint32_t v, std::uint32_t seed) -> const VertexFit& {
    const std::vector<std::uint32_t> wedge = incident_elements(m, v, seed);
    const std::uint32_t wedge_id = *std::min_element(wedge.begin(), wedge.end());
    const auto key = std::make_pair(v, wedge_id);
    auto it = fits.find(key);
    if (it != fits.end()) return it->second;
    const double start = on_boundary[v] ? opt.rings.boundary : opt.rings.interior;
    VertexFit fit = build_vertex_fit(m, v, seed, opt.degree, start, opt.rings);
    return fits.emplace(key, std::move(fit)).first->second;
  };

  for (std::uint32_t e = 0; e < m.num_elements(); ++e) {
    const std::uint32_t ar = m.arity(e);
    const double xi = 1.0 / double(ar);  // barycentric / bilinear center weights
    const Vec3 center = cell_center(m, e);
    std::map<std::uint32_t, double> row;
    bool flagged = false;
    double h_sum = 0.0;
    for (std::uint32_t i = 0; i < ar; ++i) {
      const std::uint32_t v = m.vertex(e, i);
      const VertexFit& fit = fit_for(v, e);
      flagged = flagged || fit.flagged;
      h_sum += fit.h;
      const Eigen::RowVectorXd mono =
          monomial_row(fit.frame.project(center), opt.degree, fit.h);
      Eigen::RowVectorXd w = mono * fit.coeff_map;
      // pin exact constant reproduction onto the anchor entry
      w(0) += 1.0 - w.sum();
      for (Eigen::Index j = 0; j < w.size(); ++j)
        row[fit.stencil.verts[static_cast<std::size_t>(j)]] += xi * w(j);
      row[v] -= xi;  // linear/bilinear layer
    }
    for (const auto& [col, val] : row) {
      op.cols.push_back(col);
      op.vals.push_back(val);
    }
    op.row_offsets.push_back(op.vals.size());
    op.cell_h_local.push_back(h_sum / double(ar));
    if (flagged) op.flagged_cells.push_back(e);
  }
  return op;
}

inline std::vector<double> apply(const OsusOperator& op, const std::vector<double>& f) {
  if (f.size() != op.num_nodes)
    throw OperatorError("nodal vector length " + std::to_string(f.size()) +
                        " does not match operator (" + std::to_string(op.num_nodes) + ")");
  std::vector<double> alpha(op.num_cells, 0.0);
  for (std::uint64_t i = 0; i < op.num_cells; ++i) {
    double s = 0.0;
    for (std::uint64_t k = op.row_offsets[i]; k < op.row_offsets[i + 1]; ++k)
      s += op.vals[k] * f[op.cols[k]];
    alpha[i] = s;
  }
  return alpha;
}

// ---------------------------------------------------------------------------
// Binary file format (little-endian):
//   magic "OSUS", version u32, N u64, M u64, nnz u64, fingerprint 8 bytes,
//   row offsets (M+1) u64, column indices u32, values f64,
//   per-cell local length scales f64.

inline constexpr std::uint32_t kOperatorFileVersion = 1;

namespace detail {

template <class T>
void write_pod(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
void read_pod(std::istream& in, T& v) {
  in.read(reinterpret_cast<char*>(&v), sizeof v);
}

template <class T>
void write_vec(std::ostream& out, const std::vector<T>& v) {
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(T)));
}

template <class T>
void read_vec(std::istream& in, std::vector<T>& v, std::size_t count) {
  v.resize(count);
  in.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(count * sizeof(T)));
}

}  // namespace detail

inline void save_operator(const OsusOperator& op, std::ostream& out) {
  out.write("OSUS", 4);
  detail::write_pod(out, kOperatorFileVersion);
  detail::write_pod(out, op.num_nodes);
  detail::write_pod(out, op.num_cells);
  const std::uint64_t nnz = op.nnz();
  detail::write_pod(out, nnz);
  detail::write_pod(out, op.fingerprint);
  detail::write_vec(out, op.row_offsets);
  detail::write_vec(out, op.cols);
  detail::write_vec(out, op.vals);
  detail::write_vec(out, op.cell_h_local);
  const std::uint64_t nflag = op.flagged_cells.size();
  detail::write_pod(out, nflag);
  detail::write_vec(out, op.flagged_cells);
}

inline void save_operator(const OsusOperator& op, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw OperatorError("cannot write " + path);
  save_operator(op, out);
}

inline OsusOperator load_operator(std::istream& in) {
  char magic[4] = {};
  in.read(magic, 4);
  if (std::memcmp(magic, "OSUS", 4) != 0) throw OperatorError("not an OSUS operator file");
  std::uint32_t version = 0;
  detail::read_pod(in, version);
  if (version != kOperatorFileVersion)
    throw OperatorError("unsupported operator file version " + std::to_string(version));
  OsusOperator op;
  std::uint64_t nnz = 0;
  detail::read_pod(in, op.num_nodes);
  detail::read_pod(in, op.num_cells);
  detail::read_pod(in, nnz);
  detail::read_pod(in, op.fingerprint);
  detail::read_vec(in, op.row_offsets, op.num_cells + 1);
  detail::read_vec(in, op.cols, nnz);
  detail::read_vec(in, op.vals, nnz);
  detail::read_vec(in, op.cell_h_local, op.num_cells);
  std::uint64_t nflag = 0;
  detail::read_pod(in, nflag);
  detail::read_vec(in, op.flagged_cells, nflag);
  if (!in) throw OperatorError("truncated operator file");
  return op;
}

inline OsusOperator load_operator(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw OperatorError("cannot open " + path);
  return load_operator(in);
}

inline OsusOperator load_operator(const std::string& path, const Mesh& m) {
  OsusOperator op = load_operator(path);
  if (op.fingerprint != mesh_fingerprint(m))
    throw OperatorError(path + ": operator fingerprint does not match mesh");
  return op;
}

}  // namespace rdi
