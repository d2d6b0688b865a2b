#include "nld/evolution.hpp"

#include <algorithm>
#include <cmath>

#include "nld/errors.hpp"
#include "nld/matrix_exponential.hpp"
#include "nld/parallel/dense_kernels.hpp"

namespace nld {

namespace {

constexpr std::size_t picard_panels = 64;
constexpr std::size_t picard_max_sweeps = 400;
constexpr std::size_t picard_max_sub_intervals = 1000000;

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

double inf_norm(const Eigen::MatrixXd& A) { return A.cwiseAbs().rowwise().sum().maxCoeff(); }

// Largest T with T e^{a T} k <= 1/2.
double contraction_length(double k, double a) {
  if (k == 0.0) return infinity;
  auto c2 = [&](double T) { return T * std::exp(a * T) * k; };
  double lo = 0.0;
  double hi = 0.5 / k;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (c2(mid) <= 0.5 ? lo : hi) = mid;
  }
  return lo;
}

Eigen::VectorXd rk4(const NonlocalOperator& op, const Eigen::VectorXd& u0, double t) {
  const double norm = inf_norm(op.L);
  const auto steps = static_cast<std::size_t>(std::ceil(64.0 * std::abs(t) * (1.0 + norm)));
  const double dt = t / static_cast<double>(steps);
  Eigen::VectorXd u = u0;
  for (std::size_t k = 0; k < steps; ++k) {
    const Eigen::VectorXd k1 = parallel::matvec(op.L, u);
    const Eigen::VectorXd k2 = parallel::matvec(op.L, u + 0.5 * dt * k1);
    const Eigen::VectorXd k3 = parallel::matvec(op.L, u + 0.5 * dt * k2);
    const Eigen::VectorXd k4 = parallel::matvec(op.L, u + dt * k3);
    u += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return u;
}

void require_nonnegative_initial(const Eigen::VectorXd& u0, bool nontrivial) {
  require(u0.allFinite(), ErrorKind::invalid_argument, "initial data must be finite");
  require(u0.minCoeff() >= 0.0, ErrorKind::precondition_failure, "initial data must be nonnegative");
  if (nontrivial)
    require(u0.maxCoeff() > 0.0, ErrorKind::precondition_failure,
            "initial data must not vanish identically");
}

}  // namespace

std::string to_string(Method method) {
  switch (method) {
    case Method::spectral: return "spectral";
    case Method::matexp: return "matexp";
    case Method::picard: return "picard";
    case Method::rk4: return "rk4";
  }
  return "unknown";
}

Method parse_method(const std::string& name) {
  if (name == "spectral") return Method::spectral;
  if (name == "matexp") return Method::matexp;
  if (name == "picard") return Method::picard;
  if (name == "rk4") return Method::rk4;
  fail(ErrorKind::invalid_argument, "unknown method '" + name + "'");
}

Method default_method(const NonlocalOperator& op) {
  return op.symmetric() ? Method::spectral : Method::matexp;
}

Eigen::VectorXd picard_solve(const NonlocalOperator& op, const Eigen::VectorXd& u0, double t,
                             std::size_t panels, PicardStats* stats) {
  require(std::isfinite(t), ErrorKind::invalid_argument, "time must be finite");
  require(panels >= 1, ErrorKind::invalid_argument, "need at least one panel");
  PicardStats local;
  PicardStats& st = stats ? *stats : local;
  st = PicardStats{};
  if (t == 0.0) return u0;

  // Backward time runs the forward map for -L = -K - diag(-h).
  const double sign = t < 0.0 ? -1.0 : 1.0;
  const double horizon = std::abs(t);
  const Eigen::MatrixXd K = sign * op.K;
  const Eigen::VectorXd h = sign * op.h;
  const double h_neg = std::max(0.0, -h.minCoeff());
  const double k_norm = inf_norm(K);

  const double T_max = contraction_length(k_norm, h_neg);
  const double count = std::ceil(horizon / T_max);
  require(count <= double(picard_max_sub_intervals), ErrorKind::numerical_failure,
          "Picard sub-interval underflow (" + fmt(T_max) + " for horizon " + fmt(horizon) + ")");
  st.sub_intervals = std::max<std::size_t>(1, static_cast<std::size_t>(count));
  const double T = horizon / static_cast<double>(st.sub_intervals);
  st.sub_interval_length = T;
  st.contraction_bound = T * std::exp(h_neg * T) * k_norm;

  const auto n = static_cast<Eigen::Index>(op.size());
  const auto P = static_cast<Eigen::Index>(panels);
  const double dt = T / static_cast<double>(panels);
  const Eigen::ArrayXd step_decay = (-h * dt).array().exp();
  Eigen::MatrixXd decay(n, P + 1);  // e^{-h tau_k}
  for (Eigen::Index k = 0; k <= P; ++k) decay.col(k) = (-h * (dt * static_cast<double>(k))).array().exp();

  Eigen::VectorXd start = u0;
  Eigen::MatrixXd U(n, P + 1);
  Eigen::MatrixXd next(n, P + 1);
  for (std::size_t sub = 0; sub < st.sub_intervals; ++sub) {
    U = start.replicate(1, P + 1);
    double previous_change = infinity;
    std::size_t sweep = 0;
    for (;; ++sweep) {
      require(sweep < picard_max_sweeps, ErrorKind::numerical_failure,
              "Picard iteration did not settle");
      const Eigen::MatrixXd KU = K * U;
      Eigen::ArrayXd integral = Eigen::ArrayXd::Zero(n);
      next.col(0) = start;
      for (Eigen::Index k = 1; k <= P; ++k) {
        integral = step_decay * (integral + 0.5 * dt * KU.col(k - 1).array()) + 0.5 * dt * KU.col(k).array();
        next.col(k) = decay.col(k).cwiseProduct(start) + integral.matrix();
      }
      const double change = (next - U).cwiseAbs().maxCoeff();
      const double scale = std::max(1.0, next.cwiseAbs().maxCoeff());
      U.swap(next);
      if (sweep > 0 && previous_change > 1e-11 * scale)
        st.max_observed_ratio = std::max(st.max_observed_ratio, change / previous_change);
      // Converged, or stalled on the rounding floor.
      if (change <= 1e-14 * scale) break;
      if (change <= 1e-11 * scale && change >= previous_change) break;
      previous_change = change;
    }
    st.max_iterations = std::max(st.max_iterations, sweep + 1);
    start = U.col(P);
  }
  return start;
}

Propagator::Propagator(const NonlocalOperator& op, Method method) : op_(&op), method_(method) {
  if (method == Method::spectral) {
    require(op.symmetric(), ErrorKind::precondition_failure,
            "spectral evolution needs a kernel flagged symmetric");
    es_ = eig_full(op);
  }
}

Propagator::Propagator(const NonlocalOperator& op, Method method, EigenSystem es)
    : op_(&op), method_(method), es_(std::move(es)) {
  require(method != Method::spectral || op.symmetric(), ErrorKind::precondition_failure,
          "spectral evolution needs a kernel flagged symmetric");
}

Eigen::VectorXd Propagator::operator()(const Eigen::VectorXd& u0, double t) const {
  require(u0.size() == Eigen::Index(op_->size()), ErrorKind::invalid_argument,
          "initial data length does not match operator size");
  require(std::isfinite(t), ErrorKind::invalid_argument, "time must be finite");
  if (t == 0.0) return u0;
  switch (method_) {
    case Method::spectral: {
      const auto& es = *es_;
      const Eigen::VectorXd coeffs = es.eigenvectors.transpose() * op_->weights().cwiseProduct(u0);
      const Eigen::VectorXd growth = (es.eigenvalues * t).array().exp();
      return es.eigenvectors * growth.cwiseProduct(coeffs);
    }
    case Method::matexp:
      return expm(t * op_->L) * u0;
    case Method::picard: {
      // Richardson on the trapezoid error, which expands in even powers of the step.
      const Eigen::VectorXd coarse = picard_solve(*op_, u0, t, picard_panels);
      const Eigen::VectorXd fine = picard_solve(*op_, u0, t, 2 * picard_panels);
      return (4.0 * fine - coarse) / 3.0;
    }
    case Method::rk4:
      return rk4(*op_, u0, t);
  }
  return u0;
}

Eigen::VectorXd evolve(const NonlocalOperator& op, const Eigen::VectorXd& u0, double t, Method method) {
  return Propagator(op, method)(u0, t);
}

EvolutionTrace evolve_trace(const NonlocalOperator& op, const Eigen::VectorXd& u0,
                            const std::vector<double>& times, Method method,
                            const std::vector<double>& norm_ps) {
  require(!times.empty() && times.front() == 0.0, ErrorKind::invalid_argument,
          "trace times must start at 0");
  for (std::size_t k = 1; k < times.size(); ++k)
    require(std::isfinite(times[k]) && times[k] > times[k - 1], ErrorKind::invalid_argument,
            "trace times must be finite and strictly increasing");
  for (double p : norm_ps) require(p >= 1.0, ErrorKind::invalid_argument, "norm exponents must lie in [1, inf]");

  const Propagator propagate(op, method);
  EvolutionTrace trace;
  trace.times = times;
  trace.method = method;
  trace.states.resize(times.size());
  trace.states[0] = u0;

  const bool direct = method == Method::spectral || method == Method::matexp;
  if (direct) {
    const auto count = static_cast<std::ptrdiff_t>(times.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t k = 1; k < count; ++k) trace.states[k] = propagate(u0, times[k]);
  } else {
    for (std::size_t k = 1; k < times.size(); ++k)
      trace.states[k] = propagate(trace.states[k - 1], times[k] - times[k - 1]);
  }

  for (const auto& state : trace.states) {
    require(state.allFinite(), ErrorKind::numerical_failure, "evolution produced non-finite values");
    std::vector<std::pair<double, double>> row;
    for (double p : norm_ps) row.emplace_back(p, weighted_norm(state, op.weights(), p));
    trace.norms.push_back(std::move(row));
    trace.supports.push_back(support_of(state));
  }
  return trace;
}

WeakMaxReport check_weak_max_principle(const NonlocalOperator& op, const Eigen::VectorXd& u0,
                                       const std::vector<double>& t_grid, Method method) {
  require(op.kernel.flags.nonnegative, ErrorKind::precondition_failure,
          "weak maximum principle needs a nonnegative kernel");
  require_nonnegative_initial(u0, false);
  const Propagator propagate(op, method);
  WeakMaxReport report;
  report.tolerance = 1e-10 * (u0.size() ? u0.cwiseAbs().maxCoeff() : 0.0);
  report.min_value = infinity;
  for (double t : t_grid) {
    require(t >= 0.0, ErrorKind::invalid_argument, "weak maximum principle is for t >= 0");
    const Eigen::VectorXd u = propagate(u0, t);
    Eigen::Index node = 0;
    const double m = u.minCoeff(&node);
    if (m < report.min_value) {
      report.min_value = m;
      report.worst_time = t;
      report.worst_node = static_cast<std::size_t>(node);
    }
  }
  if (report.min_value < -report.tolerance)
    fail(ErrorKind::theorem_violation, "solution reaches " + fmt(report.min_value) + " at t = " +
                                           fmt(report.worst_time) + ", node " +
                                           std::to_string(report.worst_node));
  return report;
}

StrongMaxReport check_strong_max_principle(const NonlocalOperator& op, const Eigen::VectorXd& u0,
                                           double t, std::size_t ladder_levels) {
  require_positive_connected(op.kernel);
  require_nonnegative_initial(u0, true);
  require(std::isfinite(t) && t > 0.0, ErrorKind::invalid_argument,
          "strong maximum principle is for t > 0");
  const Propagator propagate(op, default_method(op));

  StrongMaxReport report;
  report.t = t;
  const Eigen::VectorXd u = propagate(u0, t);
  Eigen::Index node = 0;
  report.min_value = u.minCoeff(&node);
  report.argmin = static_cast<std::size_t>(node);

  if (const auto radius = op.kernel.flags.support_radius) {
    const auto& space = op.space();
    const double cell = space.max_nearest_neighbor_spacing() * (1.0 + 1e-9);
    // Smallest J_ij w_j over pairs with d < R; positive by the precondition.
    double link = infinity;
    for (std::size_t i = 0; i < op.size(); ++i)
      for (std::size_t j = 0; j < op.size(); ++j)
        if (space.dist()(i, j) < *radius) link = std::min(link, op.K(i, j));
    const double h_max = std::max(0.0, op.h.maxCoeff());

    std::vector<double> ladder{0.0};
    for (std::size_t j = ladder_levels; j > 0; --j) ladder.push_back(std::ldexp(t, -int(j)));
    ladder.push_back(t);
    Eigen::VectorXd previous = u0;
    for (std::size_t k = 1; k < ladder.size(); ++k) {
      const Eigen::VectorXd current = k + 1 == ladder.size() ? u : propagate(u0, ladder[k]);
      const SupportSet support = support_of(current);
      // u(t) >= (t - s) e^{-h_max (t - s)} K u(s) for J >= 0, so a node j with
      // u(s)_j above threshold / gain forces its R-ball above the threshold at t.
      const double dt = ladder[k] - ladder[k - 1];
      const double gain = dt * std::exp(-h_max * dt) * link;
      const double threshold = default_support_rel_tol * std::max(0.0, current.maxCoeff());
      SupportSet seed;
      for (Eigen::Index j = 0; j < previous.size(); ++j)
        if (previous(j) > 0.0 && gain * previous(j) > threshold) seed.indices.push_back(std::size_t(j));
      LadderStep step{ladder[k - 1], ladder[k], true, 0};
      if (!seed.empty()) {
        const SupportSet dilated = expand_support(space, seed, *radius, 1);
        const SupportSet layer = boundary_layer(space, dilated, cell);
        for (auto i : dilated.indices)
          if (!support.contains(i) && !layer.contains(i)) ++step.missing;
      }
      step.contained = step.missing == 0;
      report.ladder_ok = report.ladder_ok && step.contained;
      report.ladder.push_back(step);
      previous = current;
    }
  }

  if (!(report.min_value > 0.0))
    fail(ErrorKind::theorem_violation, "u(" + fmt(t) + ") is not strictly positive: min " +
                                           fmt(report.min_value) + " at node " +
                                           std::to_string(report.argmin));
  if (!report.ladder_ok)
    fail(ErrorKind::theorem_violation, "support ladder failed: a support does not contain the R-dilation of an earlier one");
  return report;
}

BackwardReport check_backward_sign_change(const NonlocalOperator& op, const Eigen::VectorXd& u0,
                                          double t_neg) {
  require(std::isfinite(t_neg) && t_neg < 0.0, ErrorKind::invalid_argument,
          "backward evolution needs t < 0");
  require_positive_connected(op.kernel);
  require_nonnegative_initial(u0, true);
  require(support_of(u0).size() < op.size(), ErrorKind::precondition_failure,
          "initial data must have proper support (not all nodes)");

  const Propagator propagate(op, default_method(op));
  BackwardReport report;
  report.t = t_neg;
  if (const auto& es = propagate.eigen_system())
    report.growth = (es->eigenvalues * t_neg).array().exp().maxCoeff();
  else
    report.growth = inf_norm(expm(t_neg * op.L));
  require(report.growth <= 1e12, ErrorKind::numerical_failure,
          "backward solution operator norm " + fmt(report.growth) +
              " exceeds 1e12; sign information would be rounding noise");

  report.state = propagate(u0, t_neg);
  report.min_value = report.state.minCoeff();
  report.max_value = report.state.maxCoeff();
  report.tolerance = 1e-10 * report.state.cwiseAbs().maxCoeff();
  if (!(report.min_value < -report.tolerance && report.max_value > report.tolerance))
    fail(ErrorKind::theorem_violation, "backward solution does not change sign: min " +
                                           fmt(report.min_value) + ", max " + fmt(report.max_value));
  return report;
}

SplitState split_S1_S2(const NonlocalOperator& op, const Eigen::VectorXd& u0, double t) {
  require(std::isfinite(t) && t >= 0.0, ErrorKind::invalid_argument, "split is for t >= 0");
  SplitState out;
  out.t = t;
  out.alpha = op.h.minCoeff();
  require(out.alpha > 0.0, ErrorKind::precondition_failure,
          "splitting needs h >= alpha > 0; min h = " + fmt(out.alpha));
  out.s1 = (-op.h * t).array().exp().matrix().cwiseProduct(u0);
  out.s2 = Propagator(op, default_method(op))(u0, t) - out.s1;
  const double decay = std::exp(-out.alpha * t);
  for (double p : {1.0, 2.0, infinity}) {
    const double lhs = weighted_norm(out.s1, op.weights(), p);
    const double rhs = decay * weighted_norm(u0, op.weights(), p);
    if (lhs > rhs * (1.0 + 1e-12))
      fail(ErrorKind::theorem_violation,
           "||S1(t) u0||_" + fmt(p) + " = " + fmt(lhs) + " exceeds e^{-alpha t}||u0|| = " + fmt(rhs));
  }
  return out;
}

RateFit fit_asymptotic_rate(const NonlocalOperator& op, const Eigen::VectorXd& u0, double t_a,
                            double t_b, std::size_t samples, RateMode mode) {
  require(op.symmetric(), ErrorKind::precondition_failure, "rate fit needs a symmetric kernel");
  require(std::isfinite(t_a) && std::isfinite(t_b) && 0.0 <= t_a && t_a < t_b,
          ErrorKind::invalid_argument, "fit window must satisfy 0 <= t_a < t_b");
  require(samples >= 2, ErrorKind::invalid_argument, "fit needs at least two samples");
  const auto& w = op.weights();
  const double h_scale = std::max(1.0, op.h.cwiseAbs().maxCoeff());
  if (mode == RateMode::dirichlet) {
    require(op.h.maxCoeff() - op.h.minCoeff() <= 1e-14 * h_scale, ErrorKind::precondition_failure,
            "dirichlet mode needs a constant h");
  } else {
    const Eigen::VectorXd row_mass = h0(op.kernel);
    require(op.mode.kind == HMode::Kind::h0 || (op.h - row_mass).cwiseAbs().maxCoeff() <= 1e-12 * h_scale,
            ErrorKind::precondition_failure, "neumann mode needs h = h0");
  }

  const Propagator propagate(op, Method::spectral);
  const auto& es = *propagate.eigen_system();
  require(es.eigenvalues.size() >= 2 && es.gap > 1e-8 * es.operator_norm(),
          ErrorKind::precondition_failure, "rate fit needs a spectral gap lambda1 - lambda2 > 0");

  RateFit fit;
  std::vector<double> ts, logs;
  const double mean = w.dot(u0) / op.space().total_measure();
  const double c_star = weighted_dot(u0, es.phi1, w);
  fit.reference = mode == RateMode::dirichlet ? -(es.eigenvalues(0) - es.eigenvalues(1)) : es.eigenvalues(1);
  for (std::size_t j = 0; j < samples; ++j) {
    const double t = t_a + (t_b - t_a) * static_cast<double>(j) / static_cast<double>(samples - 1);
    const Eigen::VectorXd u = propagate(u0, t);
    const Eigen::VectorXd residual = mode == RateMode::dirichlet
                                         ? Eigen::VectorXd(std::exp(-es.lambda1 * t) * u - c_star * es.phi1)
                                         : Eigen::VectorXd(u.array() - mean);
    const double r = weighted_norm(residual, w, 2.0);
    require(r > 1e-13, ErrorKind::degenerate_fit,
            "residual " + fmt(r) + " at t = " + fmt(t) +
                " is already at rounding level; use a smaller t_b or initial data with a slower mode");
    ts.push_back(t);
    logs.push_back(std::log(r));
  }

  const double n = static_cast<double>(samples);
  double st = 0, sl = 0, stt = 0, stl = 0;
  for (std::size_t j = 0; j < samples; ++j) {
    st += ts[j];
    sl += logs[j];
    stt += ts[j] * ts[j];
    stl += ts[j] * logs[j];
  }
  fit.slope = (n * stl - st * sl) / (n * stt - st * st);
  fit.intercept = (sl - fit.slope * st) / n;
  fit.rel_err = fit.reference != 0.0 ? std::abs(fit.slope - fit.reference) / std::abs(fit.reference)
                                     : std::abs(fit.slope);
  return fit;
}

}  // namespace nld
