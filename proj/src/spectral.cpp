#include "nld/spectral.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "nld/errors.hpp"
#include "nld/parallel/dense_kernels.hpp"

namespace nld {

namespace {

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

void require_symmetric(const NonlocalOperator& op, const char* what) {
  require(op.symmetric(), ErrorKind::precondition_failure,
          std::string(what) + " needs a kernel flagged symmetric (selfadjoint case only)");
}

}  // namespace

double EigenSystem::operator_norm() const {
  return eigenvalues.size() == 0 ? 0.0 : eigenvalues.cwiseAbs().maxCoeff();
}

void require_positive_connected(const KernelMatrix& kernel) {
  require(kernel.flags.nonnegative, ErrorKind::precondition_failure,
          "kernel must be flagged nonnegative");
  if (kernel.flags.support_radius) {
    if (auto gap = positivity_gap(kernel))
      fail(ErrorKind::precondition_failure,
           "kernel vanishes at (" + std::to_string(gap->first) + ", " +
               std::to_string(gap->second) + ") although d < R; positivity hypothesis breached");
    require(is_R_connected(*kernel.space, *kernel.flags.support_radius).connected,
            ErrorKind::precondition_failure,
            "space is not R-connected at the kernel support radius");
  } else {
    require(positivity_graph_connected(kernel), ErrorKind::precondition_failure,
            "kernel positivity graph is not connected");
  }
}

bool is_positive_connected(const KernelMatrix& kernel) {
  try {
    require_positive_connected(kernel);
    return true;
  } catch (const Error&) {
    return false;
  }
}

EigenSystem eig_full(const NonlocalOperator& op) {
  require_symmetric(op, "eig_full");
  const auto& w = op.weights();
  const Eigen::VectorXd root = w.cwiseSqrt();
  Eigen::MatrixXd S = root.asDiagonal() * op.kernel.values * root.asDiagonal();
  S = 0.5 * (S + S.transpose()).eval();
  S.diagonal() -= op.h;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(S);
  require(solver.info() == Eigen::Success, ErrorKind::numerical_failure,
          "symmetric eigensolver did not converge");
  const auto n = S.rows();
  EigenSystem es;
  es.eigenvalues = solver.eigenvalues().reverse();
  es.eigenvectors = root.cwiseInverse().asDiagonal() * solver.eigenvectors().rowwise().reverse();
  for (Eigen::Index k = 0; k < n; ++k) {
    auto col = es.eigenvectors.col(k);
    const double mean = w.dot(col);
    Eigen::Index big = 0;
    col.cwiseAbs().maxCoeff(&big);
    const bool flip = std::abs(mean) > 1e-12 * col.cwiseAbs().maxCoeff() ? mean < 0.0 : col(big) < 0.0;
    if (flip) col = -col;
  }
  es.lambda1 = es.eigenvalues(0);
  es.phi1 = es.eigenvectors.col(0);
  es.gap = n > 1 ? es.eigenvalues(0) - es.eigenvalues(1) : 0.0;
  es.rayleigh_M = es.eigenvalues(0);
  es.rayleigh_m = es.eigenvalues(n - 1);
  return es;
}

double max_residual(const NonlocalOperator& op, const EigenSystem& es) {
  double worst = 0.0;
  for (Eigen::Index k = 0; k < es.eigenvalues.size(); ++k)
    worst = std::max(worst, (op.L * es.eigenvectors.col(k) - es.eigenvalues(k) * es.eigenvectors.col(k)).norm());
  return worst;
}

double orthonormality_defect(const Eigen::MatrixXd& vectors, const Eigen::VectorXd& weights) {
  const Eigen::MatrixXd gram = vectors.transpose() * weights.asDiagonal() * vectors;
  return (gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
}

std::vector<std::pair<double, std::size_t>> cluster_eigenvalues(const Eigen::VectorXd& descending,
                                                                double tol) {
  std::vector<std::pair<double, std::size_t>> clusters;
  for (Eigen::Index k = 0; k < descending.size(); ++k) {
    if (k > 0 && descending(k - 1) - descending(k) <= tol)
      ++clusters.back().second;
    else
      clusters.emplace_back(descending(k), 1);
  }
  return clusters;
}

PrincipalPair principal_eigenpair(const NonlocalOperator& op, double tol, std::size_t max_iter) {
  require_positive_connected(op.kernel);
  require(tol > 0.0, ErrorKind::invalid_argument, "tolerance must be positive");
  const auto& w = op.weights();
  const auto n = static_cast<Eigen::Index>(op.size());
  const double shift = op.h.maxCoeff();

  Eigen::VectorXd v = Eigen::VectorXd::Ones(n);
  v /= weighted_norm(v, w, 2.0);
  double rho_prev = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t it = 1; it <= max_iter; ++it) {
    Eigen::VectorXd y = parallel::matvec(op.L, v) + shift * v;
    const double rho = weighted_dot(y, v, w);
    const double ynorm = weighted_norm(y, w, 2.0);
    require(ynorm > 0.0, ErrorKind::numerical_failure, "power iterate collapsed to zero");
    y /= ynorm;
    const double step = weighted_norm(y - v, w, 2.0);
    v = std::move(y);
    if (std::abs(rho - rho_prev) <= tol * std::max(1.0, std::abs(rho)) && step <= 1e-12) {
      require(rho > 0.0, ErrorKind::theorem_violation,
              "Perron root of the shifted operator is not positive (" + fmt(rho) + ")");
      const double lambda = weighted_dot(parallel::matvec(op.L, v), v, w);
      require(v.minCoeff() > 0.0, ErrorKind::theorem_violation,
              "principal eigenvector has a nonpositive entry (" + fmt(v.minCoeff()) +
                  "); positivity hypothesis breached");
      return {lambda, std::move(v), it};
    }
    rho_prev = rho;
  }
  fail(ErrorKind::numerical_failure,
       "power iteration did not converge in " + std::to_string(max_iter) + " iterations");
}

RayleighBounds rayleigh_bounds(const NonlocalOperator& op, std::size_t trials, std::uint64_t seed) {
  const EigenSystem es = eig_full(op);
  RayleighBounds out{es.rayleigh_m, es.rayleigh_M, infinity, -infinity};
  const auto& w = op.weights();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  for (std::size_t t = 0; t < trials; ++t) {
    Eigen::VectorXd u(op.size());
    for (auto& x : u) x = normal(rng);
    const double quotient = weighted_dot(apply(op, u), u, w) / weighted_dot(u, u, w);
    out.min_quotient = std::min(out.min_quotient, quotient);
    out.max_quotient = std::max(out.max_quotient, quotient);
    if (quotient < out.m - 1e-10 || quotient > out.M + 1e-10)
      throw PropertyFailure("Rayleigh quotient " + fmt(quotient) + " outside [" + fmt(out.m) + ", " +
                                fmt(out.M) + "]",
                            u);
  }
  return out;
}

SpectrumClassification classify_spectrum(const NonlocalOperator& op, std::optional<double> tol) {
  const EigenSystem es = eig_full(op);
  const double norm = es.operator_norm();
  SpectrumClassification out;
  out.eigenvalues = es.eigenvalues;
  out.tol = tol.value_or(1e-6 * norm);
  out.band_lo = (-op.h).minCoeff();
  out.band_hi = (-op.h).maxCoeff();

  Eigen::Index inside = 0;
  std::vector<double> outside;
  for (double lambda : es.eigenvalues) {
    if (lambda >= out.band_lo - out.tol && lambda <= out.band_hi + out.tol)
      ++inside;
    else
      outside.push_back(lambda);
  }
  out.clustering_metric = static_cast<double>(inside) / static_cast<double>(es.eigenvalues.size());
  const double cluster_tol = 1e-8 * norm;
  out.isolated = cluster_eigenvalues(Eigen::Map<Eigen::VectorXd>(outside.data(), Eigen::Index(outside.size())),
                                     cluster_tol);

  if (op.mode.kind == HMode::Kind::h0 && is_positive_connected(op.kernel)) {
    out.neumann_checked = true;
    out.top_eigenvalue = es.eigenvalues(0);
    out.top_multiplicity = cluster_eigenvalues(es.eigenvalues, cluster_tol).front().second;
    const auto phi = es.eigenvectors.col(0);
    out.top_vector_deviation = (phi.maxCoeff() - phi.minCoeff()) / phi.cwiseAbs().maxCoeff();
    require(out.top_eigenvalue <= 1e-10 && out.top_eigenvalue >= -1e-10, ErrorKind::theorem_violation,
            "top eigenvalue of K - h0 is " + fmt(out.top_eigenvalue) + ", expected 0");
    require(out.top_multiplicity == 1, ErrorKind::theorem_violation,
            "eigenvalue 0 of K - h0 has multiplicity " + std::to_string(out.top_multiplicity));
    require(out.top_vector_deviation <= 1e-8, ErrorKind::theorem_violation,
            "eigenvector of 0 deviates from a constant by " + fmt(out.top_vector_deviation));
  }
  return out;
}

GreenDefect green_defect(const NonlocalOperator& op, const Eigen::VectorXd& u) {
  require_symmetric(op, "green_defect");
  require(op.mode.kind == HMode::Kind::h0, ErrorKind::precondition_failure,
          "Green identity holds for h = h0 only");
  const auto& w = op.weights();
  GreenDefect out;
  out.quadratic_form = weighted_dot(apply(op, u), u, w);
  out.dirichlet = -0.5 * parallel::dirichlet_form(op.kernel.values, w, u);
  out.defect = std::abs(out.quadratic_form - out.dirichlet);
  return out;
}

Eigen::MatrixXd hilbert_projector(const Eigen::VectorXd& phi, const Eigen::VectorXd& weights) {
  return phi * (weights.asDiagonal() * phi).transpose();
}

RieszProjection riesz_projection(const NonlocalOperator& op, double target, std::size_t contour_points) {
  return riesz_projection(op, eig_full(op), target, contour_points);
}

RieszProjection riesz_projection(const NonlocalOperator& op, const EigenSystem& es, double target,
                                 std::size_t contour_points) {
  require(contour_points >= 8, ErrorKind::invalid_argument, "contour needs at least 8 points");
  require(std::isfinite(target), ErrorKind::invalid_argument, "target must be finite");
  const double norm = es.operator_norm();
  const double cluster_tol = std::max(1e-8 * norm, 1e-14);

  RieszProjection out;
  double gap = infinity;
  for (double lambda : es.eigenvalues) {
    const double d = std::abs(lambda - target);
    if (d <= cluster_tol)
      ++out.multiplicity;
    else
      gap = std::min(gap, d);
  }
  require(out.multiplicity > 0, ErrorKind::invalid_argument,
          "target " + fmt(target) + " is not an eigenvalue of L");
  out.gap = gap;
  out.radius = std::isinf(gap) ? std::max(1.0, norm) : 0.5 * gap;

  using cplx = std::complex<double>;
  const auto n = static_cast<Eigen::Index>(op.size());
  const Eigen::MatrixXcd Lc = op.L.cast<cplx>();
  const auto N = static_cast<std::ptrdiff_t>(contour_points);
  std::vector<Eigen::MatrixXcd> terms(contour_points);
  std::vector<double> rconds(contour_points, 1.0);

#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t k = 0; k < N; ++k) {
    const double theta = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(N);
    const cplx offset = out.radius * std::polar(1.0, theta);
    Eigen::MatrixXcd shifted = -Lc;
    shifted.diagonal().array() += target + offset;
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(shifted);
    rconds[k] = lu.rcond();
    // dz = i r e^{i theta} dtheta, so each node contributes r e^{i theta} / N.
    terms[k] = (offset / static_cast<double>(N)) * lu.inverse();
  }
  for (std::size_t k = 0; k < contour_points; ++k)
    require(rconds[k] > 1e-13, ErrorKind::numerical_failure,
            "resolvent is numerically singular on the contour; reduce the radius");

  Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(n, n);
  for (const auto& t : terms) sum += t;
  out.Q = sum.real();
  out.imaginary_residue = sum.imag().cwiseAbs().maxCoeff();
  out.idempotency_defect = (out.Q * out.Q - out.Q).cwiseAbs().maxCoeff();
  require(out.imaginary_residue <= 1e-9, ErrorKind::numerical_failure,
          "imaginary residue " + fmt(out.imaginary_residue) + " exceeds 1e-9; use more contour points");
  require(out.idempotency_defect <= 1e-8, ErrorKind::numerical_failure,
          "contour projector is not idempotent (defect " + fmt(out.idempotency_defect) + ")");
  return out;
}

}  // namespace nld
