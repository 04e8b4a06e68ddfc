// Analytic piecewise-smooth test functions with ground-truth discontinuity
// classification per mesh node.
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <utility>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "rdi/mesh.hpp"

namespace rdi::testfns {

inline constexpr double kPi = std::numbers::pi;

// colatitude in [0,pi], longitude in [0,2pi)
inline std::pair<double, double> to_spherical(const Vec3& p) {
  const double r = p.norm();
  const double theta = std::acos(std::clamp(p.z() / r, -1.0, 1.0));
  double phi = std::atan2(p.y(), p.x());
  if (phi < 0.0) phi += 2.0 * kPi;
  return {theta, phi};
}

inline double sgn(double x) { return x >= 0.0 ? 1.0 : -1.0; }

// "interacting waves": constant cap, linear ramp, then three constant bands.
// Branch bounds are applied against the next listed bound, which makes the
// ramp end at pi/2 where it meets the 0.44 band continuously.
inline double f1(double theta, double /*phi*/) {
  if (theta < 5.0 * kPi / 18.0) return 1.0;
  if (theta < kPi / 2.0) return 1.7 - 2.52 * theta / kPi;
  if (theta < 13.0 * kPi / 18.0) return 0.44;
  if (theta < 9.0 * kPi / 10.0) return 0.24;
  return 0.12;
}

// "crossing waves"
inline double f2(double theta, double phi) {
  double b;
  if (theta < kPi / 4.0)
    b = 0.5;
  else if (theta < kPi / 2.0)
    b = -4.0 * (theta / kPi - 0.5);
  else if (theta < 3.0 * kPi / 4.0)
    b = 4.0 * (theta / kPi - 0.5);
  else if (theta < 7.0 * kPi / 8.0)
    b = 1.0;
  else
    b = -64.0 * theta * theta / (kPi * kPi) + 112.0 * theta / kPi - 48.0;
  return -1000.0 + 2000.0 * sgn(std::cos(phi)) * b;
}

inline double f3(double x, double y) {
  const double base = x * y + std::cos(2.0 * kPi * x * x) - std::sin(2.0 * kPi * x * x);
  return x * x + y * y <= 0.25 ? base : base + 10.0 * x - 5.0;
}

inline double f5(double x, double y) {
  const double r = std::hypot(x, y);
  const double wave = std::sin(2.0 * kPi * r) / 12.0;
  return (r < 0.5 ? -(r - 0.5) : (r - 0.5)) + wave;
}

inline double f6(double x, double y, double z) {
  return std::tanh(x) * sgn(y) + std::tanh(y) * sgn(z) + std::tanh(z) * sgn(x);
}

// piecewise ramp/plateau/cubic profile used by f7
inline double g_profile(double x) {
  if (x < 0.25) return x;
  if (x < 0.5) return 0.5 - x;
  if (x < 0.75) return 0.75;
  const double d = x - 0.75;
  return 16.0 * d * d * d + 0.75;
}

using Evaluator = std::function<double(const Vec3&)>;

// f7 rescales g over the mesh's x-extent, so the evaluator binds the mesh.
inline Evaluator make_evaluator(const std::string& name, const Mesh& mesh) {
  if (name == "f1")
    return [](const Vec3& p) { auto [t, ph] = to_spherical(p); return f1(t, ph); };
  if (name == "f2")
    return [](const Vec3& p) { auto [t, ph] = to_spherical(p); return f2(t, ph); };
  if (name == "f3") return [](const Vec3& p) { return f3(p.x(), p.y()); };
  if (name == "f5") return [](const Vec3& p) { return f5(p.x(), p.y()); };
  if (name == "f6") return [](const Vec3& p) { return f6(p.x(), p.y(), p.z()); };
  if (name == "f7") {
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    for (const Vec3& p : mesh.xyz) {
      xmin = std::min(xmin, p.x());
      xmax = std::max(xmax, p.x());
    }
    const double span = xmax - xmin;
    return [xmin, span](const Vec3& p) {
      return span > 0.0 ? span * g_profile((p.x() - xmin) / span) : 0.0;
    };
  }
  if (name == "const") return [](const Vec3&) { return 1.0; };
  if (name == "linear-z") return [](const Vec3& p) { return p.z() + 2.0; };
  throw std::invalid_argument("unknown test function: " + name);
}

inline std::vector<double> sample(const std::string& name, const Mesh& mesh) {
  const Evaluator f = make_evaluator(name, mesh);
  std::vector<double> values(mesh.num_vertices());
  for (std::uint32_t v = 0; v < mesh.num_vertices(); ++v) values[v] = f(mesh.xyz[v]);
  return values;
}

// ---------------------------------------------------------------------------
// Ground truth: per-node class labels {0 smooth, 1 C1, 2 C0} within a
// distance band of the analytic discontinuity loci. C0 takes precedence.

inline std::vector<std::uint8_t> truth_set(const std::string& name, const Mesh& mesh,
                                           double band) {
  std::vector<std::uint8_t> labels(mesh.num_vertices(), 0);
  auto classify = [&](std::uint32_t v, const Vec3& p) -> std::uint8_t {
    if (name == "f1") {
      auto [theta, phi] = to_spherical(p);
      (void)phi;
      // jumps between the constant bands; creases where the ramp joins
      for (double t0 : {13.0 * kPi / 18.0, 9.0 * kPi / 10.0})
        if (std::abs(theta - t0) <= band) return 2;
      for (double t0 : {5.0 * kPi / 18.0, kPi / 2.0})
        if (std::abs(theta - t0) <= band) return 1;
      return 0;
    }
    if (name == "f2") {
      auto [theta, phi] = to_spherical(p);
      (void)phi;
      // geodesic distance to the x=0 meridian great circle
      const double meridian_dist = std::asin(std::min(1.0, std::abs(p.x()) / p.norm()));
      const bool on_meridian = meridian_dist <= band;
      // the meridian jump amplitude vanishes at theta = pi/2
      if (std::abs(theta - kPi / 4.0) <= band) return 2;
      if (on_meridian && std::abs(theta - kPi / 2.0) > 2.0 * band) return 2;
      if (on_meridian) return 1;
      // creases at pi/2 and 3pi/4; the 7pi/8 circle is a curvature jump,
      // classed with the weak discontinuities
      for (double t0 : {kPi / 2.0, 3.0 * kPi / 4.0, 7.0 * kPi / 8.0})
        if (std::abs(theta - t0) <= band) return 1;
      return 0;
    }
    if (name == "f3") {
      if (std::abs(std::hypot(p.x(), p.y()) - 0.5) <= band) return 2;
      return 0;
    }
    if (name == "f5") {
      const double r = std::hypot(p.x(), p.y());
      if (r <= band || std::abs(r - 1.0) <= band) return 1;
      return 0;
    }
    throw std::invalid_argument("no analytic truth for function: " + name);
  };
  for (std::uint32_t v = 0; v < mesh.num_vertices(); ++v)
    labels[v] = classify(v, mesh.xyz[v]);
  return labels;
}

}  // namespace rdi::testfns
