// CSV and legacy-VTK exports of detection results.
#pragma once

#include <cmath>
#include <fstream>
#include <ostream>
#include <string>

#include "rdi/indicator.hpp"
#include "rdi/mesh.hpp"

namespace rdi {

inline void write_cell_csv(const IndicatorResult& res, std::ostream& out) {
  out.precision(17);
  out << "cell_id,alpha,tau\n";
  for (std::size_t c = 0; c < res.alpha.size(); ++c)
    out << c << "," << res.alpha[c] << "," << res.tau[c] << "\n";
}

inline void write_node_csv(const IndicatorResult& res, std::ostream& out) {
  out.precision(17);
  out << "node_id,beta,marker\n";
  for (std::size_t v = 0; v < res.markers.size(); ++v) {
    out << v << ",";
    if (std::isnan(res.beta[v]))
      out << "";
    else
      out << res.beta[v];
    out << "," << int(res.markers[v]) << "\n";
  }
}

inline void write_truth_csv(const std::vector<std::uint8_t>& labels, std::ostream& out) {
  out << "node_id,class\n";
  for (std::size_t v = 0; v < labels.size(); ++v) out << v << "," << int(labels[v]) << "\n";
}

// Legacy ASCII VTK with per-node beta/marker and per-cell alpha/tau.
inline void write_vtk(const Mesh& m, const IndicatorResult& res, std::ostream& out) {
  out << "# vtk DataFile Version 3.0\ndiscontinuity indicators\nASCII\n"
      << "DATASET UNSTRUCTURED_GRID\n";
  out.precision(17);
  out << "POINTS " << m.num_vertices() << " double\n";
  for (const Vec3& p : m.xyz) out << p.x() << " " << p.y() << " " << p.z() << "\n";
  std::size_t list_len = 0;
  for (std::uint32_t e = 0; e < m.num_elements(); ++e) list_len += 1 + m.arity(e);
  out << "CELLS " << m.num_elements() << " " << list_len << "\n";
  for (std::uint32_t e = 0; e < m.num_elements(); ++e) {
    out << m.arity(e);
    for (std::uint32_t i = 0; i < m.arity(e); ++i) out << " " << m.vertex(e, i);
    out << "\n";
  }
  out << "CELL_TYPES " << m.num_elements() << "\n";
  for (std::uint32_t e = 0; e < m.num_elements(); ++e)
    out << (m.arity(e) == 3 ? 5 : 9) << "\n";  // VTK_TRIANGLE / VTK_QUAD
  out << "POINT_DATA " << m.num_vertices() << "\n";
  out << "SCALARS marker int 1\nLOOKUP_TABLE default\n";
  for (std::uint8_t v : res.markers) out << int(v) << "\n";
  out << "SCALARS beta double 1\nLOOKUP_TABLE default\n";
  for (double b : res.beta) out << (std::isnan(b) ? 0.0 : b) << "\n";
  out << "CELL_DATA " << m.num_elements() << "\n";
  out << "SCALARS alpha double 1\nLOOKUP_TABLE default\n";
  for (double a : res.alpha) out << a << "\n";
  out << "SCALARS tau double 1\nLOOKUP_TABLE default\n";
  for (double t : res.tau) out << t << "\n";
}

}  // namespace rdi
