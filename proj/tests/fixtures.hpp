#pragma once

// Shared spaces and kernels used across the test binaries.

#include <cmath>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "nld/kernel.hpp"
#include "nld/nonlocal_operator.hpp"
#include "nld/space.hpp"

namespace fixture {

using SpacePtr = std::shared_ptr<const nld::DiscreteMeasureSpace>;

inline SpacePtr share(nld::DiscreteMeasureSpace s) {
  return std::make_shared<const nld::DiscreteMeasureSpace>(std::move(s));
}

inline SpacePtr interval(std::size_t n, double a = 0.0, double b = 1.0) {
  return share(nld::build_interval(a, b, n));
}

inline SpacePtr unit_square(std::size_t per_side) {
  const double lo[] = {0, 0}, hi[] = {1, 1};
  const std::size_t n[] = {per_side, per_side};
  return share(nld::build_box(lo, hi, n));
}

inline std::vector<nld::Polyline> triangle_edges() {
  const double h = std::numbers::sqrt3 / 2.0;
  nld::Polyline a(2, 2), b(2, 2), c(2, 2);
  a << 0, 0, 1, 0;
  b << 1, 0, 0.5, h;
  c << 0.5, h, 0, 0;
  return {a, b, c};
}

inline SpacePtr triangle(std::size_t m) { return share(nld::build_graph(triangle_edges(), m)); }

inline SpacePtr circle(std::size_t n) {
  const double lo[] = {0.0};
  const double hi[] = {2.0 * std::numbers::pi};
  const std::size_t counts[] = {n};
  return share(nld::build_manifold_chart(
      lo, hi, counts,
      [](const Eigen::VectorXd& t) {
        Eigen::VectorXd x(2);
        x << std::cos(t(0)), std::sin(t(0));
        return x;
      },
      [](const Eigen::VectorXd&) { return 1.0; }));
}

inline SpacePtr sierpinski(std::size_t level) { return share(nld::build_sierpinski(level)); }

/// A named symmetric builtin kernel evaluated on a builtin space.
struct Case {
  std::string name;
  nld::KernelMatrix kernel;
};

/// The symmetric space/kernel matrix: every builtin space paired with the
/// radial families sized to its diameter.
inline std::vector<Case> symmetric_matrix() {
  struct Named {
    std::string name;
    SpacePtr space;
    double scale;
  };
  const std::vector<Named> spaces = {
      {"interval", interval(120), 1.0},
      {"box", unit_square(10), 1.0},
      {"triangle", triangle(20), 1.0},
      {"circle", circle(96), 2.0},
      {"sierpinski4", sierpinski(4), 1.0},
  };
  std::vector<Case> out;
  for (const auto& s : spaces) {
    out.push_back({s.name + "/gaussian", nld::evaluate(nld::KernelSpec::gaussian_truncated(1.0, 0.2 * s.scale, 0.5 * s.scale), s.space)});
    out.push_back({s.name + "/uniform", nld::evaluate(nld::KernelSpec::truncated_uniform(1.0, 0.3 * s.scale), s.space)});
    out.push_back({s.name + "/exp", nld::evaluate(nld::KernelSpec::convolution([](double r) { return std::exp(-2.0 * r); }, "exp", {}), s.space)});
    Eigen::VectorXd f = (1.0 + s.space->coords().col(0).array().square()).matrix();
    f /= std::sqrt((s.space->weights().array() * f.array().square()).sum());  // unit top eigenvalue
    out.push_back({s.name + "/separable", nld::evaluate(nld::KernelSpec::separable(f, f), s.space)});
  }
  return out;
}

/// Same problems as operators whose norm stays below 5, used for method
/// cross-agreement.
inline std::vector<std::pair<std::string, nld::NonlocalOperator>> standard_operators() {
  std::vector<std::pair<std::string, nld::NonlocalOperator>> out;
  for (auto& c : symmetric_matrix()) {
    out.emplace_back(c.name + "/h0", nld::assemble(c.kernel, nld::HMode::row_mass()));
    out.emplace_back(c.name + "/const", nld::assemble(c.kernel, nld::HMode::constant(1.5)));
  }
  return out;
}

}  // namespace fixture
