#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "nld/nonlocal_operator.hpp"

namespace nld {

/// Spectral decomposition of L in the weighted inner product <u, v>_w.
struct EigenSystem {
  Eigen::VectorXd eigenvalues;   // descending
  Eigen::MatrixXd eigenvectors;  // columns w-orthonormal, mean-nonnegative
  double lambda1 = 0.0;
  Eigen::VectorXd phi1;
  double gap = 0.0;              // lambda1 - lambda2 (0 for n = 1)
  double rayleigh_m = 0.0;       // smallest eigenvalue
  double rayleigh_M = 0.0;       // largest eigenvalue

  /// max |lambda_k|, the w-operator norm of L.
  double operator_norm() const;
};

/// Full decomposition via the similar symmetric matrix D^1/2 J D^1/2 - diag(h).
/// Throws precondition-failure for kernels not flagged symmetric.
EigenSystem eig_full(const NonlocalOperator& op);

/// max_k ||L phi_k - lambda_k phi_k||_2.
double max_residual(const NonlocalOperator& op, const EigenSystem& es);

/// max |<phi_a, phi_b>_w - delta_ab|.
double orthonormality_defect(const Eigen::MatrixXd& vectors, const Eigen::VectorXd& weights);

/// Eigenvalue clusters (value, multiplicity) for values within `tol` of the
/// previous member, descending.
std::vector<std::pair<double, std::size_t>> cluster_eigenvalues(const Eigen::VectorXd& descending,
                                                                double tol);

struct PrincipalPair {
  double lambda = 0.0;
  Eigen::VectorXd phi;  // w-normalized, strictly positive
  std::size_t iterations = 0;
};

/// Power iteration on L + max(h) I (a nonnegative matrix) from the constant
/// vector. Preconditions: nonnegative kernel that is positive and R-connected
/// at its declared support radius, or irreducible when no radius is declared.
PrincipalPair principal_eigenpair(const NonlocalOperator& op, double tol = 1e-14,
                                  std::size_t max_iter = 200000);

struct RayleighBounds {
  double m = 0.0;
  double M = 0.0;
  double min_quotient = 0.0;  // observed over random trials
  double max_quotient = 0.0;
};

/// Extreme eigenvalues, plus seeded random Rayleigh quotients checked to lie
/// inside [m - 1e-10, M + 1e-10] (property-failure otherwise).
RayleighBounds rayleigh_bounds(const NonlocalOperator& op, std::size_t trials, std::uint64_t seed);

struct SpectrumClassification {
  std::vector<std::pair<double, std::size_t>> isolated;
  double band_lo = 0.0;  // min(-h)
  double band_hi = 0.0;  // max(-h)
  double tol = 0.0;
  double clustering_metric = 0.0;  // fraction of eigenvalues within tol of the band
  Eigen::VectorXd eigenvalues;
  /// For h = h0 on a positive connected kernel: the checked facts below.
  bool neumann_checked = false;
  double top_eigenvalue = 0.0;
  std::size_t top_multiplicity = 0;
  double top_vector_deviation = 0.0;
};

/// Split the spectrum of L into the band hull of -h and isolated eigenvalues.
/// `tol` defaults to 1e-6 ||L||. With h = h0 on a positive connected kernel,
/// also asserts that 0 is the top eigenvalue, simple, with a constant
/// eigenvector (theorem-violation otherwise).
SpectrumClassification classify_spectrum(const NonlocalOperator& op,
                                         std::optional<double> tol = std::nullopt);

struct GreenDefect {
  double quadratic_form = 0.0;  // <L u, u>_w
  double dirichlet = 0.0;       // -1/2 sum_ij w_i w_j J_ij (u_j - u_i)^2
  double defect = 0.0;          // |quadratic_form - dirichlet|
};

/// Green identity for h = h0 and symmetric J; precondition-failure otherwise.
GreenDefect green_defect(const NonlocalOperator& op, const Eigen::VectorXd& u);

struct RieszProjection {
  Eigen::MatrixXd Q;
  double imaginary_residue = 0.0;  // max |Im Q_ij|
  double idempotency_defect = 0.0; // max |Q^2 - Q|
  double radius = 0.0;
  double gap = 0.0;
  std::size_t multiplicity = 0;
};

inline constexpr std::size_t default_contour_points = 32;

/// Trapezoid rule for (1/2 pi i) \oint (z I - L)^-1 dz on the circle of radius
/// gap/2 around `target`, which must be an eigenvalue of L.
RieszProjection riesz_projection(const NonlocalOperator& op, double target,
                                 std::size_t contour_points = default_contour_points);

/// Same, reusing an existing decomposition for the gap.
RieszProjection riesz_projection(const NonlocalOperator& op, const EigenSystem& es, double target,
                                 std::size_t contour_points = default_contour_points);

/// Orthogonal projector onto span(phi) in the w-inner product: phi phi^T D_w.
Eigen::MatrixXd hilbert_projector(const Eigen::VectorXd& phi, const Eigen::VectorXd& weights);

/// Preconditions shared by the positivity results: nonnegative kernel,
/// positive on {d < R} and R-connected, or irreducible without a radius.
/// Throws precondition-failure describing the first breach.
void require_positive_connected(const KernelMatrix& kernel);

/// Non-throwing variant of require_positive_connected.
bool is_positive_connected(const KernelMatrix& kernel);

}  // namespace nld
