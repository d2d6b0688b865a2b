#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "nld/nonlocal_operator.hpp"
#include "nld/spectral.hpp"

namespace nld {

enum class Method { spectral, matexp, picard, rk4 };

std::string to_string(Method method);
Method parse_method(const std::string& name);

/// spectral for symmetric kernels, matexp otherwise.
Method default_method(const NonlocalOperator& op);

struct PicardStats {
  std::size_t sub_intervals = 0;
  double sub_interval_length = 0.0;
  double contraction_bound = 0.0;     // C2(T) = T e^{|h_-| T} ||K||
  double max_observed_ratio = 0.0;    // successive iterate differences
  std::size_t max_iterations = 0;
};

/// Fixed-point iteration of the variation-of-constants map
///   u(t) = e^{-h t} u0 + \int_0^t e^{-h (t - s)} K u(s) ds
/// on sub-intervals with C2(T) <= 1/2, trapezoid rule in s with `panels`
/// panels per sub-interval. Negative t runs the same map for -L.
Eigen::VectorXd picard_solve(const NonlocalOperator& op, const Eigen::VectorXd& u0, double t,
                             std::size_t panels, PicardStats* stats = nullptr);

/// Solution operator u0 -> e^{tL} u0 for one method. Construction does the
/// per-operator work (the eigendecomposition for the spectral method), after
/// which calls are const and safe to run concurrently.
class Propagator {
 public:
  Propagator(const NonlocalOperator& op, Method method);
  Propagator(const NonlocalOperator& op, Method method, EigenSystem es);

  Eigen::VectorXd operator()(const Eigen::VectorXd& u0, double t) const;

  Method method() const { return method_; }
  const NonlocalOperator& op() const { return *op_; }
  const std::optional<EigenSystem>& eigen_system() const { return es_; }

 private:
  const NonlocalOperator* op_;
  Method method_;
  std::optional<EigenSystem> es_;
};

Eigen::VectorXd evolve(const NonlocalOperator& op, const Eigen::VectorXd& u0, double t, Method method);

struct EvolutionTrace {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;
  Method method = Method::spectral;
  std::vector<std::vector<std::pair<double, double>>> norms;  // per time: (p, ||u||_p)
  std::vector<SupportSet> supports;
};

/// States at increasing `times` (the first must be 0, so states[0] is u0).
EvolutionTrace evolve_trace(const NonlocalOperator& op, const Eigen::VectorXd& u0,
                            const std::vector<double>& times, Method method,
                            const std::vector<double>& norm_ps = {1.0, 2.0, infinity});

struct WeakMaxReport {
  double min_value = 0.0;
  double worst_time = 0.0;
  std::size_t worst_node = 0;
  double tolerance = 0.0;
};

/// min over t_grid and nodes of u >= -1e-10 ||u0||_inf for u0 >= 0.
WeakMaxReport check_weak_max_principle(const NonlocalOperator& op, const Eigen::VectorXd& u0,
                                       const std::vector<double>& t_grid, Method method);

struct LadderStep {
  double s = 0.0;
  double t = 0.0;
  bool contained = false;
  std::size_t missing = 0;  // dilated nodes absent from supp u(t), boundary layer excluded
};

struct StrongMaxReport {
  double t = 0.0;
  double min_value = 0.0;
  std::size_t argmin = 0;
  std::vector<LadderStep> ladder;
  bool ladder_ok = true;
};

/// Strict positivity of u(t) for u0 >= 0 nontrivial, plus the support ladder
/// supp u(t_{k+1}) >= dilation of supp u(t_k) over the dyadic times
/// 0, t/2^levels, ..., t/2, t. Only nodes of u(t_k) large enough to lift their
/// R-ball above the support threshold at t_{k+1} are dilated; the lower bound
/// used is u(t) >= (t - s) e^{-max h (t - s)} K u(s).
StrongMaxReport check_strong_max_principle(const NonlocalOperator& op, const Eigen::VectorXd& u0,
                                           double t, std::size_t ladder_levels = 6);

struct BackwardReport {
  double t = 0.0;
  double min_value = 0.0;
  double max_value = 0.0;
  double tolerance = 0.0;
  double growth = 0.0;  // ||e^{tL}|| in the w-norm
  Eigen::VectorXd state;
};

/// For u0 >= 0 with proper support and t < 0, e^{tL} u0 changes sign.
BackwardReport check_backward_sign_change(const NonlocalOperator& op, const Eigen::VectorXd& u0,
                                          double t_neg);

struct SplitState {
  Eigen::VectorXd s1;  // e^{-h t} u0
  Eigen::VectorXd s2;  // u(t) - s1
  double t = 0.0;
  double alpha = 0.0;  // min h
};

/// Requires h >= alpha > 0; asserts ||s1||_p <= e^{-alpha t} ||u0||_p for
/// p in {1, 2, inf}.
SplitState split_S1_S2(const NonlocalOperator& op, const Eigen::VectorXd& u0, double t);

enum class RateMode { dirichlet, neumann };

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double reference = 0.0;
  double rel_err = 0.0;
};

/// Least-squares slope of log ||residual(t)||_2 over `samples` points in
/// [t_a, t_b]. dirichlet: residual e^{-lambda1 t} u(t) - C* phi1, reference
/// -(lambda1 - lambda2). neumann: residual u(t) - mean(u0), reference lambda2.
RateFit fit_asymptotic_rate(const NonlocalOperator& op, const Eigen::VectorXd& u0, double t_a,
                            double t_b, std::size_t samples, RateMode mode);

}  // namespace nld
