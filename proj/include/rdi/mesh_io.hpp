// OFF/OBJ readers, OFF writer, and CSV exports.
#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "rdi/mesh.hpp"

namespace rdi {

class IoError : public std::runtime_error {
public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

inline std::string next_content_line(std::istream& in) {
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream probe(line);
    std::string tok;
    if (probe >> tok) return line;
  }
  return {};
}

}  // namespace detail

inline Mesh read_off(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string header = detail::next_content_line(in);
  {
    std::istringstream hs(header);
    std::string tag;
    hs >> tag;
    if (tag != "OFF") throw IoError(path + ": missing OFF header");
  }
  std::size_t nv = 0, nf = 0, ne = 0;
  {
    std::istringstream cs(detail::next_content_line(in));
    if (!(cs >> nv >> nf >> ne)) throw IoError(path + ": bad OFF counts line");
  }
  std::vector<Vec3> verts(nv);
  for (std::size_t i = 0; i < nv; ++i) {
    std::istringstream ls(detail::next_content_line(in));
    if (!(ls >> verts[i].x() >> verts[i].y() >> verts[i].z()))
      throw IoError(path + ": bad vertex line " + std::to_string(i));
  }
  std::vector<std::vector<std::uint32_t>> faces(nf);
  for (std::size_t i = 0; i < nf; ++i) {
    std::istringstream ls(detail::next_content_line(in));
    std::size_t cnt = 0;
    if (!(ls >> cnt)) throw IoError(path + ": bad face line " + std::to_string(i));
    faces[i].resize(cnt);
    for (std::size_t j = 0; j < cnt; ++j)
      if (!(ls >> faces[i][j])) throw IoError(path + ": truncated face line " + std::to_string(i));
  }
  return build_mesh(std::move(verts), faces);
}

// Vertices and faces only; normals/texcoords in f-records are stripped.
inline Mesh read_obj(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<Vec3> verts;
  std::vector<std::vector<std::uint32_t>> faces;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    if (tag == "v") {
      Vec3 p;
      if (!(ls >> p.x() >> p.y() >> p.z())) throw IoError(path + ": bad vertex line");
      verts.push_back(p);
    } else if (tag == "f") {
      std::vector<std::uint32_t> face;
      std::string ref;
      while (ls >> ref) {
        const auto slash = ref.find('/');
        if (slash != std::string::npos) ref.erase(slash);
        const long idx = std::stol(ref);
        const long n = static_cast<long>(verts.size());
        const long resolved = idx > 0 ? idx - 1 : n + idx;  // negative = relative
        if (resolved < 0 || resolved >= n) throw IoError(path + ": face index out of range");
        face.push_back(static_cast<std::uint32_t>(resolved));
      }
      faces.push_back(std::move(face));
    }
  }
  return build_mesh(std::move(verts), faces);
}

inline Mesh load_mesh(const std::string& path) {
  const auto dot = path.rfind('.');
  const std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
  if (ext == "off" || ext == "OFF") return read_off(path);
  if (ext == "obj" || ext == "OBJ") return read_obj(path);
  throw IoError("unrecognized mesh format: " + path);
}

inline void write_off(const Mesh& m, std::ostream& out) {
  out << "OFF\n" << m.num_vertices() << " " << m.num_elements() << " 0\n";
  out.precision(17);
  for (const Vec3& p : m.xyz) out << p.x() << " " << p.y() << " " << p.z() << "\n";
  for (std::uint32_t e = 0; e < m.num_elements(); ++e) {
    out << m.arity(e);
    for (std::uint32_t i = 0; i < m.arity(e); ++i) out << " " << m.vertex(e, i);
    out << "\n";
  }
}

inline void write_off(const Mesh& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  write_off(m, out);
}

inline void write_feature_csv(const Mesh& m, const FeatureEdgeSet& fs, std::ostream& out) {
  out << "element_id,edge_local_id\n";
  for (std::uint32_t h : fs.halffacets) {
    const std::uint32_t e = m.hf_element(h);
    out << e << "," << (h - m.offs[e]) << "\n";
  }
}

inline void write_patch_csv(const Mesh& m, std::ostream& out) {
  out << "element_id,patch_id\n";
  for (std::uint32_t e = 0; e < m.num_elements(); ++e) out << e << "," << m.patch[e] << "\n";
}

inline FeatureEdgeSet read_feature_csv(const Mesh& m, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  FeatureEdgeSet fs;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::uint32_t e, k;
    char comma;
    if (!(ls >> e >> comma >> k)) throw IoError(path + ": bad feature line");
    if (e >= m.num_elements() || k >= m.arity(e)) throw IoError(path + ": feature edge out of range");
    const std::uint32_t h = m.offs[e] + k;
    fs.halffacets.push_back(h);
    if (m.twin[h] != kNoHalfFacet) fs.halffacets.push_back(m.twin[h]);
  }
  std::sort(fs.halffacets.begin(), fs.halffacets.end());
  fs.halffacets.erase(std::unique(fs.halffacets.begin(), fs.halffacets.end()),
                      fs.halffacets.end());
  return fs;
}

}  // namespace rdi
