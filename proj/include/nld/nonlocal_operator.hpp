#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "nld/kernel.hpp"
#include "nld/space.hpp"

namespace nld {

/// How the damping term h of L = K - diag(h) is chosen.
struct HMode {
  enum class Kind { zero, constant, h0, custom };

  Kind kind = Kind::h0;
  double constant_value = 0.0;
  Eigen::VectorXd custom;

  static HMode zero() { return {Kind::zero, 0.0, {}}; }
  static HMode constant(double a) { return {Kind::constant, a, {}}; }
  static HMode row_mass() { return {Kind::h0, 0.0, {}}; }
  static HMode from_values(Eigen::VectorXd h) { return {Kind::custom, 0.0, std::move(h)}; }
};

std::string to_string(HMode::Kind kind);

/// Discrete generator L = K - diag(h) with K_ij = J_ij w_j, so that
/// (K u)_i approximates the integral of J(x_i, y) u(y) dy.
struct NonlocalOperator {
  KernelMatrix kernel;
  Eigen::MatrixXd K;
  Eigen::VectorXd h;
  Eigen::MatrixXd L;
  HMode mode;

  std::size_t size() const { return static_cast<std::size_t>(K.rows()); }
  const Eigen::VectorXd& weights() const { return kernel.weights(); }
  const DiscreteMeasureSpace& space() const { return *kernel.space; }
  bool symmetric() const { return kernel.flags.symmetric; }
};

NonlocalOperator assemble(KernelMatrix kernel, HMode mode);

/// L u.
Eigen::VectorXd apply(const NonlocalOperator& op, const Eigen::VectorXd& u);

/// K u.
Eigen::VectorXd apply_integral(const NonlocalOperator& op, const Eigen::VectorXd& u);

/// (sum_i w_i |u_i|^p)^(1/p), or max |u_i| for p = inf.
double weighted_norm(const Eigen::VectorXd& u, const Eigen::VectorXd& weights, double p);

/// sum_i w_i u_i v_i.
double weighted_dot(const Eigen::VectorXd& u, const Eigen::VectorXd& v, const Eigen::VectorXd& weights);

/// max |D_w K - K^T D_w| over entries; zero for an exactly w-selfadjoint K.
double weighted_adjoint_defect(const NonlocalOperator& op);

/// Conjugate exponent p' with 1/p + 1/p' = 1.
double conjugate_exponent(double p);

struct OperatorBoundReport {
  double p = 2.0;
  double q = 2.0;
  double bound = 0.0;                   // bochner_norm(J, q, p')
  double max_ratio = 0.0;               // max ||K u||_q / ||u||_p
  std::optional<double> young_bound;    // ||J0||_r on the grid lattice, when applicable
  std::optional<double> young_exponent; // r
  double max_young_ratio = 0.0;
  std::size_t trials = 0;
};

/// Randomized check of ||K u||_q <= ||J||_{L^q(L^p')} ||u||_p (+1e-10), and of
/// the Young bound ||K u||_q <= ||J0||_r ||u||_p for radial kernels on grids
/// when 1/r = 1 + 1/q - 1/p lies in [0, 1]. Throws PropertyFailure with the
/// offending u on violation.
OperatorBoundReport check_operator_bound(const NonlocalOperator& op, double p, double q,
                                         std::size_t trials, std::uint64_t seed);

inline constexpr double default_support_rel_tol = 1e-12;

/// {i : u_i > rel_tol * max(u, 0)}; empty when u <= 0 everywhere.
SupportSet support_of(const Eigen::VectorXd& u, double rel_tol = default_support_rel_tol);

/// Supports of K^n z for n = 0..n_max, iterating on max-normalized vectors.
struct SupportTrajectory {
  std::vector<SupportSet> supports;
  /// Largest |(K^n z)_i| over nodes outside `region`, relative to max |K^n z|;
  /// filled by `support_trajectory` when a region is given.
  std::vector<double> leaked;
};

SupportTrajectory support_trajectory(const NonlocalOperator& op, const Eigen::VectorXd& z,
                                     std::size_t n_max,
                                     const std::optional<SupportSet>& region = std::nullopt);

struct SupportGrowthReport {
  std::size_t n_max = 0;
  double radius = 0.0;
  /// contained[n-1] is true when supp(K^n z) includes the n-fold dilation of
  /// supp(z), up to one boundary layer of the dilation.
  std::vector<bool> contained;
  std::optional<std::size_t> first_full;
  std::optional<std::size_t> n0;

  bool all_contained() const;
};

/// Support growth under powers of K for a nonnegative kernel positive on
/// {d < R}. Throws precondition-failure when that hypothesis is breached.
SupportGrowthReport verify_support_growth(const NonlocalOperator& op, const Eigen::VectorXd& z,
                                          std::size_t n_max);

}  // namespace nld
