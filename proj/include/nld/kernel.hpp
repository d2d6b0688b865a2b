#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>

#include <Eigen/Core>

#include "nld/space.hpp"

namespace nld {

inline constexpr double infinity = std::numeric_limits<double>::infinity();

enum class KernelFamily {
  matrix,
  convolution,
  truncated_uniform,
  gaussian_truncated,
  separable,
  counterexample,
};

std::string to_string(KernelFamily family);

/// Declared properties of a kernel; `evaluate` verifies each one.
struct KernelFlags {
  bool symmetric = true;
  bool nonnegative = true;
  std::optional<double> support_radius;
};

using RadialProfile = std::function<double(double)>;

/// A kernel family plus its parameters. Use the named constructors; each sets
/// the flags the family is known to satisfy.
struct KernelSpec {
  KernelFamily family = KernelFamily::matrix;
  KernelFlags flags;

  Eigen::MatrixXd values;           // matrix
  RadialProfile profile;            // convolution
  std::string profile_name;
  bool geodesic_profile = false;    // convolution: evaluate on dist instead of |x - y|
  double scale = 1.0;               // c in truncated_uniform / gaussian_truncated
  double sigma = 1.0;               // gaussian_truncated
  double radius = 0.0;              // truncated_uniform, gaussian_truncated, counterexample
  Eigen::VectorXd f, g;             // separable

  static KernelSpec explicit_matrix(Eigen::MatrixXd values, KernelFlags flags);
  static KernelSpec convolution(RadialProfile profile, std::string name, KernelFlags flags,
                                bool geodesic_profile = false);
  static KernelSpec truncated_uniform(double c, double radius);
  static KernelSpec gaussian_truncated(double c, double sigma, double radius);
  static KernelSpec separable(Eigen::VectorXd f, Eigen::VectorXd g);
  /// J = 1 on pairs closer than R outside the square (1/2 - R, 1/2 + R)^2 of
  /// [0, 1]^2, and 0 elsewhere. Requires 0 < R < 1/2 and a 1-D space.
  static KernelSpec counterexample(double radius);

  /// Profile J0(r) for the radially symmetric families, empty otherwise.
  std::optional<RadialProfile> radial_profile() const;
};

/// Dense evaluated kernel J_ij = J(x_i, x_j) on a space, with verified flags.
struct KernelMatrix {
  Eigen::MatrixXd values;
  KernelFlags flags;
  KernelSpec spec;
  std::shared_ptr<const DiscreteMeasureSpace> space;

  std::size_t size() const { return static_cast<std::size_t>(values.rows()); }
  const Eigen::VectorXd& weights() const { return space->weights(); }
};

/// Evaluate and verify flags; a mismatch throws contract-violation naming the
/// offending index pair.
KernelMatrix evaluate(const KernelSpec& spec, std::shared_ptr<const DiscreteMeasureSpace> space);

/// Row masses h0_i = sum_j J_ij w_j.
Eigen::VectorXd h0(const KernelMatrix& kernel);

/// Mixed norm (sum_i w_i (sum_j w_j |J_ij|^p')^(q/p'))^(1/q); an infinite
/// exponent replaces the corresponding weighted sum with a max.
double bochner_norm(const KernelMatrix& kernel, double q, double p_conj);

/// Discrete L^r norm of the radial profile over the grid difference lattice,
/// (sum_k cell_volume * Jhat(k)^r)^(1/r), where Jhat(k) is the largest |J_ij|
/// over node pairs with lattice offset k. Available for radial families on
/// interval/box spaces only; empty otherwise.
std::optional<double> lattice_profile_norm(const KernelMatrix& kernel, double r);

/// True when J_ij > 0 for every pair with d(i, j) < R (R the declared support
/// radius). Returns the first offending pair otherwise.
std::optional<std::pair<std::size_t, std::size_t>> positivity_gap(const KernelMatrix& kernel);

/// True when the graph {(i, j) : J_ij > 0} is connected.
bool positivity_graph_connected(const KernelMatrix& kernel);

}  // namespace nld
