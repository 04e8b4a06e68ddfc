// Command-line front end: mesh generation, operator build, detection, and
// study tables, each emitting a JSON run manifest alongside its outputs.
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rdi/rdi.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;
using namespace rdi;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitInput = 3;
constexpr int kExitNumerical = 4;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// All file outputs go through a temp-then-rename so failed runs leave nothing
// partial behind.
void atomic_write(const std::string& path, const std::string& content) {
  const fs::path target(path);
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << content;
    if (!out) throw IoError("failed writing " + tmp.string());
  }
  fs::rename(tmp, target);
}

void write_manifest(const std::string& path, json manifest) {
  atomic_write(path, manifest.dump(2) + "\n");
}

int env_threads() {
  const char* v = std::getenv("RDI_THREADS");
  if (!v) return 1;
  const int n = std::atoi(v);
  return n > 0 ? n : 1;
}

// --------------------------------------------------------------------------
// Detection configuration: defaults, then config-file values, then CLI flags.

struct CliConfig {
  DetectConfig detect;
  std::string weights = "area";
  std::string features = "auto";  // auto | none | path to a feature CSV
  double feature_angle_deg = 30.0;

  void finalize() {
    if (weights == "unit")
      detect.weights = WeightMode::Unit;
    else if (weights == "area")
      detect.weights = WeightMode::Area;
    else
      throw IoError("weights must be 'unit' or 'area', got '" + weights + "'");
    detect.validate();
  }
};

void load_config_file(const std::string& path, CliConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::string trimmed;
    for (char ch : line)
      if (!std::isspace(static_cast<unsigned char>(ch))) trimmed += ch;
    if (trimmed.empty()) continue;
    const auto eq = trimmed.find('=');
    if (eq == std::string::npos)
      throw IoError(path + ":" + std::to_string(lineno) + ": expected key=value");
    const std::string key = trimmed.substr(0, eq), value = trimmed.substr(eq + 1);
    try {
      if (key == "cl" || key == "c_local")
        cfg.detect.c_local = std::stod(value);
      else if (key == "cg" || key == "c_global")
        cfg.detect.c_global = std::stod(value);
      else if (key == "kappa0")
        cfg.detect.kappa0 = std::stod(value);
      else if (key == "kappa1")
        cfg.detect.kappa1 = std::stod(value);
      else if (key == "eps_beta")
        cfg.detect.eps_beta = std::stod(value);
      else if (key == "beta_ring_interior")
        cfg.detect.beta_ring_interior = std::stoi(value);
      else if (key == "beta_ring_boundary")
        cfg.detect.beta_ring_boundary = std::stoi(value);
      else if (key == "weights")
        cfg.weights = value;
      else if (key == "features")
        cfg.features = value;
      else if (key == "feature_angle_deg")
        cfg.feature_angle_deg = std::stod(value);
      else
        throw IoError(path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
    } catch (const std::invalid_argument&) {
      throw IoError(path + ":" + std::to_string(lineno) + ": bad value for '" + key + "'");
    }
  }
}

json config_snapshot(const CliConfig& cfg) {
  return json{{"c_local", cfg.detect.c_local},
              {"c_global", cfg.detect.c_global},
              {"kappa0", cfg.detect.kappa0},
              {"kappa1", cfg.detect.kappa1},
              {"eps_beta", cfg.detect.eps_beta},
              {"weights", cfg.weights},
              {"beta_ring_interior", cfg.detect.beta_ring_interior},
              {"beta_ring_boundary", cfg.detect.beta_ring_boundary},
              {"features", cfg.features},
              {"feature_angle_deg", cfg.feature_angle_deg}};
}

// Shared flag plumbing: every subcommand takes --config plus overrides.
struct ConfigFlags {
  std::string config_path;
  CLI::Option *opt_cl, *opt_cg, *opt_k0, *opt_k1, *opt_eps, *opt_w, *opt_feat, *opt_angle;
  double cl, cg, k0, k1, eps, angle;
  std::string weights, features;

  void attach(CLI::App& cmd) {
    cmd.add_option("--config", config_path, "key=value config file");
    opt_cl = cmd.add_option("--cl", cl, "local threshold coefficient");
    opt_cg = cmd.add_option("--cg", cg, "global threshold coefficient");
    opt_k0 = cmd.add_option("--kappa0", k0, "strong-discontinuity threshold");
    opt_k1 = cmd.add_option("--kappa1", k1, "weak-discontinuity threshold");
    opt_eps = cmd.add_option("--eps-beta", eps, "beta denominator safeguard");
    opt_w = cmd.add_option("--weights", weights, "beta weighting: unit|area");
    opt_feat = cmd.add_option("--features", features,
                              "feature handling: auto, none, or a feature CSV path");
    opt_angle = cmd.add_option("--feature-angle", angle, "dihedral threshold in degrees");
  }

  CliConfig resolve() const {
    CliConfig cfg;
    if (!config_path.empty()) load_config_file(config_path, cfg);
    if (opt_cl->count()) cfg.detect.c_local = cl;
    if (opt_cg->count()) cfg.detect.c_global = cg;
    if (opt_k0->count()) cfg.detect.kappa0 = k0;
    if (opt_k1->count()) cfg.detect.kappa1 = k1;
    if (opt_eps->count()) cfg.detect.eps_beta = eps;
    if (opt_w->count()) cfg.weights = weights;
    if (opt_feat->count()) cfg.features = features;
    if (opt_angle->count()) cfg.feature_angle_deg = angle;
    cfg.finalize();
    return cfg;
  }
};

// Resolve the feature handling mode to a virtually split mesh.
Mesh split_by_features(const Mesh& m, const CliConfig& cfg, json& manifest) {
  FeatureEdgeSet features;
  if (cfg.features == "auto")
    features = detect_features(m, cfg.feature_angle_deg * M_PI / 180.0);
  else if (cfg.features != "none")
    features = read_feature_csv(m, cfg.features);
  const Mesh split = virtual_split(m, features);
  manifest["feature_halffacets"] = features.halffacets.size();
  manifest["patches"] = split.num_patches;
  return split;
}

// --------------------------------------------------------------------------
// gen-mesh

struct GenMeshArgs {
  std::string kind, output, pattern = "right";
  int level = 3, n = 16, nr = 32, nz = 16, npoints = 400;
  std::uint64_t seed = 1;
};

int run_gen_mesh(const GenMeshArgs& a) {
  const auto t0 = Clock::now();
  Mesh m;
  try {
    if (a.kind == "icosphere") {
      m = gen::icosphere(a.level);
    } else if (a.kind == "cubed-sphere") {
      m = gen::cubed_sphere(a.n);
    } else if (a.kind == "flat-grid") {
      const auto pat =
          a.pattern == "alternating" ? gen::DiagPattern::Alternating : gen::DiagPattern::Right;
      m = gen::flat_grid(a.n, pat);
    } else if (a.kind == "flat-random") {
      m = gen::flat_random(a.npoints, a.seed);
    } else if (a.kind == "cylinder") {
      m = gen::cylinder(a.nr, a.nz);
    } else {
      std::cerr << "unknown mesh kind: " << a.kind << "\n";
      return kExitUsage;
    }
  } catch (const MeshError& e) {
    // bad generator parameters are usage errors
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  std::ostringstream off;
  write_off(m, off);
  atomic_write(a.output, off.str());

  json manifest{{"command", "gen-mesh"},
                {"kind", a.kind},
                {"output", a.output},
                {"vertices", m.num_vertices()},
                {"elements", m.num_elements()},
                {"fingerprint", mesh_fingerprint(m)},
                {"threads", env_threads()},
                {"timings", {{"generate", seconds_since(t0)}}}};
  write_manifest(a.output + ".manifest.json", manifest);
  std::cout << "wrote " << a.output << " (" << m.num_vertices() << " vertices, "
            << m.num_elements() << " elements)\n";
  return 0;
}

// --------------------------------------------------------------------------
// build-op

int run_build_op(const std::string& mesh_path, const std::string& output,
                 const ConfigFlags& flags) {
  const CliConfig cfg = flags.resolve();
  json manifest{{"command", "build-op"},
                {"mesh", mesh_path},
                {"output", output},
                {"config", config_snapshot(cfg)},
                {"threads", env_threads()}};

  const Mesh base = load_mesh(mesh_path);
  const Mesh m = split_by_features(base, cfg, manifest);

  const auto t0 = Clock::now();
  const OsusOperator op = assemble(m);
  const double t_assemble = seconds_since(t0);
  if (op.num_cells > 0 && op.flagged_cells.size() == op.num_cells)
    throw FitError("every cell produced an ill-conditioned fit");

  std::ostringstream buf;
  save_operator(op, buf);
  atomic_write(output, buf.str());

  std::ostringstream flagged;
  flagged << "cell_id\n";
  for (std::uint32_t c : op.flagged_cells) flagged << c << "\n";
  atomic_write(output + ".flagged.csv", flagged.str());

  manifest["fingerprint"] = op.fingerprint;
  manifest["nnz"] = op.nnz();
  manifest["flagged_cells"] = op.flagged_cells.size();
  manifest["timings"] = {{"assemble", t_assemble}};
  write_manifest(output + ".manifest.json", manifest);
  std::cout << "wrote " << output << " (" << op.num_cells << " rows, " << op.nnz()
            << " nonzeros, " << m.num_patches << " patches)\n";
  return 0;
}

// --------------------------------------------------------------------------
// detect

std::vector<double> load_nodal_csv(const std::string& path, std::size_t expected) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<double> values;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string first, second;
    std::getline(ls, first, ',');
    const bool has_second = static_cast<bool>(std::getline(ls, second, ','));
    try {
      values.push_back(std::stod(has_second ? second : first));
    } catch (const std::invalid_argument&) {
      if (values.empty()) continue;  // header line
      throw IoError(path + ": malformed value '" + line + "'");
    }
  }
  if (values.size() != expected)
    throw IoError(path + ": " + std::to_string(values.size()) + " values for " +
                  std::to_string(expected) + " nodes");
  return values;
}

int run_detect(const std::string& mesh_path, const std::string& op_path,
               const std::string& function, const std::string& output,
               const ConfigFlags& flags) {
  const CliConfig cfg = flags.resolve();
  json manifest{{"command", "detect"},
                {"mesh", mesh_path},
                {"operator", op_path.empty() ? json() : json(op_path)},
                {"function", function},
                {"output_prefix", output},
                {"config", config_snapshot(cfg)},
                {"threads", env_threads()}};

  const Mesh base = load_mesh(mesh_path);
  const Mesh m = split_by_features(base, cfg, manifest);

  std::vector<double> f;
  if (function.size() > 4 && function.substr(function.size() - 4) == ".csv")
    f = load_nodal_csv(function, m.num_vertices());
  else
    try {
      f = testfns::sample(function, m);
    } catch (const std::invalid_argument& e) {
      throw IoError(e.what());
    }

  double t_assemble = 0.0;
  OsusOperator op;
  {
    const auto t0 = Clock::now();
    if (op_path.empty()) {
      op = assemble(m);
    } else {
      try {
        op = load_operator(op_path, m);
      } catch (const OperatorError& e) {
        throw IoError(e.what());
      }
    }
    t_assemble = seconds_since(t0);
  }
  if (op.num_cells > 0 && op.flagged_cells.size() == op.num_cells)
    throw FitError("every cell produced an ill-conditioned fit");

  const auto t1 = Clock::now();
  rdi::apply(op, f);  // timed separately; detect recomputes alpha internally
  const double t_apply = seconds_since(t1);

  const auto t2 = Clock::now();
  const IndicatorResult res = detect(m, op, f, cfg.detect);
  const double t_detect = seconds_since(t2);

  std::ostringstream cells, nodes, vtk;
  write_cell_csv(res, cells);
  write_node_csv(res, nodes);
  write_vtk(m, res, vtk);
  atomic_write(output + "_cells.csv", cells.str());
  atomic_write(output + "_nodes.csv", nodes.str());
  atomic_write(output + ".vtk", vtk.str());

  std::size_t counts[3] = {0, 0, 0};
  for (std::uint8_t mk : res.markers) ++counts[mk];
  manifest["fingerprint"] = op.fingerprint;
  manifest["summary"] = {{"smooth_nodes", counts[0]},
                         {"weak_discontinuity_nodes", counts[1]},
                         {"strong_discontinuity_nodes", counts[2]}};
  manifest["timings"] = {{op_path.empty() ? "assemble" : "load_operator", t_assemble},
                         {"apply", t_apply},
                         {"threshold_and_beta", std::max(0.0, t_detect - t_apply)}};
  write_manifest(output + ".manifest.json", manifest);
  std::cout << "marked nodes: " << counts[2] << " strong, " << counts[1] << " weak, "
            << counts[0] << " smooth\n";
  return 0;
}

// --------------------------------------------------------------------------
// study

double fitted_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::string study_convergence() {
  std::ostringstream out;
  out.precision(12);
  out << "n,h,smooth_max_alpha,c1_band_max_alpha,c0_band_max_alpha\n";
  std::vector<double> log_h, log_smooth, log_c1, log_c0;
  for (int n : {16, 32, 64, 128}) {
    const Mesh m = gen::flat_grid(n);
    const OsusOperator op = assemble(m);
    const double h = 2.0 / n;
    auto band_max = [&](const std::function<double(const Vec3&)>& fn, bool banded) {
      std::vector<double> f(m.num_vertices());
      for (std::uint32_t v = 0; v < m.num_vertices(); ++v) f[v] = fn(m.xyz[v]);
      const auto alpha = rdi::apply(op, f);
      double worst = 0.0;
      for (std::uint32_t e = 0; e < m.num_elements(); ++e)
        if (!banded || std::abs(cell_center(m, e).x()) <= 2.0 * h)
          worst = std::max(worst, std::abs(alpha[e]));
      return worst;
    };
    const double smooth =
        band_max([](const Vec3& p) { return std::sin(p.x()) * std::cos(p.y()); }, false);
    const double c1 = band_max([](const Vec3& p) { return std::abs(p.x()); }, true);
    const double c0 = band_max([](const Vec3& p) { return p.x() < 0.0 ? 0.0 : 1.0; }, true);
    out << n << "," << h << "," << smooth << "," << c1 << "," << c0 << "\n";
    log_h.push_back(std::log(h));
    log_smooth.push_back(std::log(smooth));
    log_c1.push_back(std::log(c1));
    log_c0.push_back(std::log(c0));
  }
  out << "slope,," << fitted_slope(log_h, log_smooth) << "," << fitted_slope(log_h, log_c1)
      << "," << fitted_slope(log_h, log_c0) << "\n";
  return out.str();
}

std::string study_nonuniform() {
  std::ostringstream out;
  out.precision(12);
  out << "fan_cells,beta_unit,beta_area,asymptote_2n_over_n_plus_1\n";
  for (int fan = 2; fan <= 8; ++fan) {
    const Mesh m = gen::coarse_fine_junction(fan);
    const OsusOperator op = assemble(m);
    std::vector<double> f(m.num_vertices());
    for (std::uint32_t v = 0; v < m.num_vertices(); ++v) f[v] = m.xyz[v].squaredNorm();
    const auto alpha = rdi::apply(op, f);
    DetectConfig cfg;
    cfg.beta_ring_boundary = 1;
    cfg.weights = WeightMode::Unit;
    const double unit = node_beta(m, alpha, 0, cfg);
    cfg.weights = WeightMode::Area;
    const double area = node_beta(m, alpha, 0, cfg);
    out << fan << "," << unit << "," << area << "," << 2.0 * fan / (fan + 1.0) << "\n";
  }
  return out.str();
}

std::string study_timing() {
  std::ostringstream out;
  out.precision(12);
  out << "level,nodes,cells,assemble_seconds,apply_seconds\n";
  std::vector<double> log_size, log_assemble, log_apply;
  for (int level : {2, 3, 4, 5}) {
    const Mesh m = gen::icosphere(level);
    double t_assemble = 1e99;
    OsusOperator op;
    for (int rep = 0; rep < 3; ++rep) {
      const auto t0 = Clock::now();
      op = assemble(m);
      t_assemble = std::min(t_assemble, seconds_since(t0));
    }
    std::vector<double> f(m.num_vertices());
    for (std::uint32_t v = 0; v < m.num_vertices(); ++v)
      f[v] = std::sin(3.0 * m.xyz[v].x()) * m.xyz[v].y();
    const int reps = 200;
    const auto t0 = Clock::now();
    for (int rep = 0; rep < reps; ++rep) rdi::apply(op, f);
    const double t_apply = seconds_since(t0) / reps;
    out << level << "," << m.num_vertices() << "," << m.num_elements() << "," << t_assemble
        << "," << t_apply << "\n";
    log_size.push_back(std::log(double(m.num_vertices()) + m.num_elements()));
    log_assemble.push_back(std::log(t_assemble));
    log_apply.push_back(std::log(t_apply));
  }
  out << "slope,,," << fitted_slope(log_size, log_assemble) << ","
      << fitted_slope(log_size, log_apply) << "\n";
  return out.str();
}

int run_study(const std::string& kind, const std::string& output) {
  const auto t0 = Clock::now();
  std::string table;
  if (kind == "convergence")
    table = study_convergence();
  else if (kind == "nonuniform")
    table = study_nonuniform();
  else if (kind == "timing")
    table = study_timing();
  else {
    std::cerr << "unknown study kind: " << kind << "\n";
    return kExitUsage;
  }
  atomic_write(output, table);
  json manifest{{"command", "study"},
                {"kind", kind},
                {"output", output},
                {"threads", env_threads()},
                {"timings", {{"total", seconds_since(t0)}}}};
  write_manifest(output + ".manifest.json", manifest);
  std::cout << "wrote " << output << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"surface-mesh discontinuity detection"};
  app.require_subcommand(1);

  GenMeshArgs gen_args;
  CLI::App* cmd_gen = app.add_subcommand("gen-mesh", "generate a mesh as an OFF file");
  cmd_gen->add_option("kind", gen_args.kind,
                      "icosphere|cubed-sphere|flat-grid|flat-random|cylinder")
      ->required();
  cmd_gen->add_option("-o,--output", gen_args.output, "output OFF path")->required();
  cmd_gen->add_option("--level", gen_args.level, "icosphere subdivision level");
  cmd_gen->add_option("--n", gen_args.n, "grid resolution");
  cmd_gen->add_option("--nr", gen_args.nr, "cylinder circumferential resolution");
  cmd_gen->add_option("--nz", gen_args.nz, "cylinder axial resolution");
  cmd_gen->add_option("--npoints", gen_args.npoints, "random point count");
  cmd_gen->add_option("--seed", gen_args.seed, "random seed");
  cmd_gen->add_option("--pattern", gen_args.pattern, "flat-grid diagonals: right|alternating");

  std::string op_mesh, op_out;
  ConfigFlags op_flags;
  CLI::App* cmd_op = app.add_subcommand("build-op", "assemble and save the cell operator");
  cmd_op->add_option("--mesh", op_mesh, "input mesh (OFF/OBJ)")->required();
  cmd_op->add_option("-o,--output", op_out, "output operator path")->required();
  op_flags.attach(*cmd_op);

  std::string det_mesh, det_op, det_fn, det_out;
  ConfigFlags det_flags;
  CLI::App* cmd_det = app.add_subcommand("detect", "run discontinuity detection");
  cmd_det->add_option("--mesh", det_mesh, "input mesh (OFF/OBJ)")->required();
  cmd_det->add_option("--op", det_op, "operator file (assembled on the fly if omitted)");
  cmd_det->add_option("--function", det_fn, "builtin function name or nodal CSV path")
      ->required();
  cmd_det->add_option("-o,--output", det_out, "output prefix")->required();
  det_flags.attach(*cmd_det);

  std::string study_kind, study_out;
  CLI::App* cmd_study = app.add_subcommand("study", "run a study and write its table");
  cmd_study->add_option("kind", study_kind, "convergence|nonuniform|timing")->required();
  cmd_study->add_option("-o,--output", study_out, "output CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (cmd_gen->parsed()) return run_gen_mesh(gen_args);
    if (cmd_op->parsed()) return run_build_op(op_mesh, op_out, op_flags);
    if (cmd_det->parsed()) return run_detect(det_mesh, det_op, det_fn, det_out, det_flags);
    if (cmd_study->parsed()) return run_study(study_kind, study_out);
  } catch (const FitError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitUsage;
}
