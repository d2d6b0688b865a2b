#include "nld/nonlocal_operator.hpp"

#include <cmath>
#include <random>

#include "nld/errors.hpp"
#include "nld/parallel/dense_kernels.hpp"

namespace nld {

std::string to_string(HMode::Kind kind) {
  switch (kind) {
    case HMode::Kind::zero: return "zero";
    case HMode::Kind::constant: return "constant";
    case HMode::Kind::h0: return "h0";
    case HMode::Kind::custom: return "custom";
  }
  return "unknown";
}

NonlocalOperator assemble(KernelMatrix kernel, HMode mode) {
  const auto n = static_cast<Eigen::Index>(kernel.size());
  const auto& w = kernel.weights();
  Eigen::MatrixXd K = kernel.values * w.asDiagonal();
  Eigen::VectorXd h;
  switch (mode.kind) {
    case HMode::Kind::zero:
      h = Eigen::VectorXd::Zero(n);
      break;
    case HMode::Kind::constant:
      require(std::isfinite(mode.constant_value), ErrorKind::invalid_argument,
              "constant damping must be finite");
      h = Eigen::VectorXd::Constant(n, mode.constant_value);
      break;
    case HMode::Kind::h0:
      h = nld::h0(kernel);
      break;
    case HMode::Kind::custom:
      require(mode.custom.size() == n, ErrorKind::invalid_argument,
              "custom damping has length " + std::to_string(mode.custom.size()) + ", expected " +
                  std::to_string(n));
      require(mode.custom.allFinite(), ErrorKind::invalid_argument,
              "custom damping entries must be finite");
      h = mode.custom;
      break;
  }
  Eigen::MatrixXd L = K;
  L.diagonal() -= h;
  return NonlocalOperator{std::move(kernel), std::move(K), std::move(h), std::move(L), std::move(mode)};
}

Eigen::VectorXd apply(const NonlocalOperator& op, const Eigen::VectorXd& u) {
  require(u.size() == Eigen::Index(op.size()), ErrorKind::invalid_argument,
          "vector length " + std::to_string(u.size()) + " does not match operator size " +
              std::to_string(op.size()));
  return parallel::matvec(op.L, u);
}

Eigen::VectorXd apply_integral(const NonlocalOperator& op, const Eigen::VectorXd& u) {
  require(u.size() == Eigen::Index(op.size()), ErrorKind::invalid_argument,
          "vector length " + std::to_string(u.size()) + " does not match operator size " +
              std::to_string(op.size()));
  return parallel::matvec(op.K, u);
}

double weighted_norm(const Eigen::VectorXd& u, const Eigen::VectorXd& weights, double p) {
  require(p >= 1.0, ErrorKind::invalid_argument, "norm exponent must lie in [1, inf]");
  require(u.size() == weights.size(), ErrorKind::invalid_argument, "vector/weight length mismatch");
  if (u.size() == 0) return 0.0;
  if (std::isinf(p)) return u.cwiseAbs().maxCoeff();
  double s = 0.0;
  if (p == 1.0) {
    for (Eigen::Index i = 0; i < u.size(); ++i) s += weights(i) * std::abs(u(i));
    return s;
  }
  if (p == 2.0) {
    for (Eigen::Index i = 0; i < u.size(); ++i) s += weights(i) * u(i) * u(i);
    return std::sqrt(s);
  }
  for (Eigen::Index i = 0; i < u.size(); ++i) s += weights(i) * std::pow(std::abs(u(i)), p);
  return std::pow(s, 1.0 / p);
}

double weighted_dot(const Eigen::VectorXd& u, const Eigen::VectorXd& v, const Eigen::VectorXd& weights) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) s += weights(i) * u(i) * v(i);
  return s;
}

double weighted_adjoint_defect(const NonlocalOperator& op) {
  const auto& w = op.weights();
  const Eigen::MatrixXd left = w.asDiagonal() * op.K;
  const Eigen::MatrixXd right = op.K.transpose() * w.asDiagonal();
  return (left - right).cwiseAbs().maxCoeff();
}

double conjugate_exponent(double p) {
  require(p >= 1.0, ErrorKind::invalid_argument, "norm exponent must lie in [1, inf]");
  if (p == 1.0) return infinity;
  if (std::isinf(p)) return 1.0;
  return p / (p - 1.0);
}

OperatorBoundReport check_operator_bound(const NonlocalOperator& op, double p, double q,
                                         std::size_t trials, std::uint64_t seed) {
  require(trials >= 1, ErrorKind::invalid_argument, "need at least one trial");
  OperatorBoundReport report;
  report.p = p;
  report.q = q;
  report.trials = trials;
  report.bound = bochner_norm(op.kernel, q, conjugate_exponent(p));

  // 1/r = 1 + 1/q - 1/p must land in [0, 1].
  const double inv_r = 1.0 + (std::isinf(q) ? 0.0 : 1.0 / q) - (std::isinf(p) ? 0.0 : 1.0 / p);
  if (inv_r >= 0.0 && inv_r <= 1.0) {
    const double r = inv_r == 0.0 ? infinity : 1.0 / inv_r;
    if (auto young = lattice_profile_norm(op.kernel, r)) {
      report.young_bound = *young;
      report.young_exponent = r;
    }
  }

  const auto& w = op.weights();
  const auto n = static_cast<Eigen::Index>(op.size());
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);

  for (std::size_t t = 0; t < trials; ++t) {
    Eigen::VectorXd u(n);
    // Cycle through constant, Gaussian, nonnegative and sparse draws.
    switch (t % 4) {
      case 0:
        if (t == 0) {
          u.setOnes();
          break;
        }
        [[fallthrough]];
      case 1:
        for (auto& x : u) x = normal(rng);
        break;
      case 2:
        for (auto& x : u) x = std::abs(normal(rng));
        break;
      default: {
        u.setZero();
        const auto centre = pick(rng);
        u(centre) = 1.0;
        u(pick(rng)) += normal(rng);
      }
    }
    const double unorm = weighted_norm(u, w, p);
    if (unorm == 0.0) continue;
    u /= unorm;
    const double out = weighted_norm(apply_integral(op, u), w, q);
    report.max_ratio = std::max(report.max_ratio, out);
    if (out > report.bound + 1e-10)
      throw PropertyFailure("||K u||_q = " + std::to_string(out) + " exceeds the mixed-norm bound " +
                                std::to_string(report.bound),
                            u);
    if (report.young_bound) {
      report.max_young_ratio = std::max(report.max_young_ratio, out);
      if (out > *report.young_bound + 1e-10)
        throw PropertyFailure("||K u||_q = " + std::to_string(out) + " exceeds the Young bound " +
                                  std::to_string(*report.young_bound),
                              u);
    }
  }
  return report;
}

SupportSet support_of(const Eigen::VectorXd& u, double rel_tol) {
  SupportSet s;
  if (u.size() == 0) return s;
  const double peak = std::max(u.maxCoeff(), 0.0);
  if (peak <= 0.0) return s;
  s.threshold = rel_tol * peak;
  for (Eigen::Index i = 0; i < u.size(); ++i)
    if (u(i) > s.threshold) s.indices.push_back(static_cast<std::size_t>(i));
  return s;
}

SupportTrajectory support_trajectory(const NonlocalOperator& op, const Eigen::VectorXd& z,
                                     std::size_t n_max, const std::optional<SupportSet>& region) {
  require(z.size() == Eigen::Index(op.size()), ErrorKind::invalid_argument,
          "vector length does not match operator size");
  SupportTrajectory out;
  Eigen::VectorXd v = z;
  auto record = [&](const Eigen::VectorXd& x) {
    out.supports.push_back(support_of(x));
    if (region) {
      const double peak = x.cwiseAbs().maxCoeff();
      double leak = 0.0;
      for (Eigen::Index i = 0; i < x.size(); ++i)
        if (!region->contains(std::size_t(i))) leak = std::max(leak, std::abs(x(i)));
      out.leaked.push_back(peak > 0.0 ? leak / peak : 0.0);
    }
  };
  record(v);
  for (std::size_t k = 1; k <= n_max; ++k) {
    v = apply_integral(op, v);
    const double peak = v.cwiseAbs().maxCoeff();
    if (peak > 0.0) v /= peak;
    record(v);
  }
  return out;
}

bool SupportGrowthReport::all_contained() const {
  return std::all_of(contained.begin(), contained.end(), [](bool b) { return b; });
}

SupportGrowthReport verify_support_growth(const NonlocalOperator& op, const Eigen::VectorXd& z,
                                          std::size_t n_max) {
  const auto& kernel = op.kernel;
  require(kernel.flags.nonnegative, ErrorKind::precondition_failure,
          "support growth needs a nonnegative kernel");
  require(kernel.flags.support_radius.has_value(), ErrorKind::precondition_failure,
          "support growth needs a declared support radius");
  if (auto gap = positivity_gap(kernel))
    fail(ErrorKind::precondition_failure,
         "kernel vanishes at (" + std::to_string(gap->first) + ", " + std::to_string(gap->second) +
             ") although d < R; positivity hypothesis breached");
  require(z.size() == Eigen::Index(op.size()), ErrorKind::invalid_argument,
          "vector length does not match operator size");
  require(z.minCoeff() >= 0.0 && z.maxCoeff() > 0.0, ErrorKind::precondition_failure,
          "support growth needs z >= 0, not identically zero");

  const auto& space = op.space();
  SupportGrowthReport report;
  report.n_max = n_max;
  report.radius = *kernel.flags.support_radius;
  report.n0 = is_R_connected(space, report.radius).n0;
  const double cell = space.max_nearest_neighbor_spacing() * (1.0 + 1e-9);

  const auto trajectory = support_trajectory(op, z, n_max);
  const SupportSet seed = trajectory.supports.front();
  const std::size_t n = op.size();
  if (seed.size() == n) report.first_full = 0;
  for (std::size_t k = 1; k <= n_max; ++k) {
    const auto& actual = trajectory.supports[k];
    const SupportSet dilated = expand_support(space, seed, report.radius, k);
    bool ok = actual.includes(dilated);
    if (!ok) {
      const SupportSet layer = boundary_layer(space, dilated, cell);
      ok = std::all_of(dilated.indices.begin(), dilated.indices.end(), [&](std::size_t i) {
        return actual.contains(i) || layer.contains(i);
      });
    }
    report.contained.push_back(ok);
    if (!report.first_full && actual.size() == n) report.first_full = k;
  }
  return report;
}

}  // namespace nld
