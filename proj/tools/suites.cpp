#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <random>

#include "app.hpp"
#include "nld/io.hpp"

namespace nld::app {

using nlohmann::json;

namespace {

json vec(const Eigen::VectorXd& v) { return std::vector<double>(v.begin(), v.end()); }

/// Runs one check. The body returns an object with a boolean "pass" plus
/// details; library errors become skip (failed precondition), fail
/// (property or theorem violation) or error.
json run_check(const std::string& suite, const std::string& name, const std::string& result,
               const std::function<json()>& body) {
  json out = {{"suite", suite}, {"check", name}, {"result", result}};
  try {
    json details = body();
    const bool pass = details.at("pass").get<bool>();
    details.erase("pass");
    out["status"] = pass ? "pass" : "fail";
    out["details"] = std::move(details);
  } catch (const PropertyFailure& e) {
    out["status"] = "fail";
    out["message"] = e.what();
    out["witness"] = vec(e.witness());
  } catch (const Error& e) {
    switch (e.kind()) {
      case ErrorKind::precondition_failure:
        out["status"] = "skip";
        break;
      case ErrorKind::theorem_violation:
      case ErrorKind::property_failure:
        out["status"] = "fail";
        break;
      default:
        out["status"] = "error";
    }
    out["error_kind"] = to_string(e.kind());
    out["message"] = e.what();
  }
  return out;
}

json skip(const std::string& suite, const std::string& name, const std::string& result,
          const std::string& reason) {
  return {{"suite", suite}, {"check", name}, {"result", result}, {"status", "skip"}, {"message", reason}};
}

struct Context {
  const Problem& problem;
  const ExperimentConfig& config;
  double lo = 0.0, hi = 1.0;  // first-coordinate range

  const NonlocalOperator& op() const { return problem.op; }
  double tol(double base) const { return base * config.tol_scale; }
  double at(double fraction) const { return lo + fraction * (hi - lo); }

  Eigen::VectorXd initial(const std::string& fallback) const {
    return parse_initial(config.u0.value_or(fallback), *problem.space, config.seed);
  }
  std::string fraction_indicator(double a, double b) const {
    return "indicator:" + io::format_double(at(a)) + "," + io::format_double(at(b));
  }
  bool row_mass_mode() const {
    if (op().mode.kind == HMode::Kind::h0) return true;
    const Eigen::VectorXd h0v = h0(op().kernel);
    return (op().h - h0v).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, h0v.cwiseAbs().maxCoeff());
  }
};

std::vector<json> bounds(const Context& c) {
  std::vector<json> out;
  const double inf = infinity;
  for (auto [p, q] : {std::pair{1.0, 1.0}, {2.0, 2.0}, {1.0, inf}, {2.0, inf}}) {
    const std::string name = "p=" + io::format_double(p) + ",q=" + io::format_double(q);
    out.push_back(run_check("bounds", name, "||K u||_q <= ||J||_{L^q(L^p')} ||u||_p and Young's inequality",
                            [&] {
                              const auto r = check_operator_bound(c.op(), p, q, 100, c.config.seed);
                              json d = {{"pass", r.max_ratio <= r.bound + c.tol(1e-10)},
                                        {"bound", r.bound},
                                        {"max_ratio", r.max_ratio},
                                        {"trials", r.trials}};
                              if (r.young_bound) {
                                d["young_bound"] = *r.young_bound;
                                d["young_exponent"] = *r.young_exponent;
                                d["max_young_ratio"] = r.max_young_ratio;
                                d["pass"] = d["pass"].get<bool>() && r.max_young_ratio <= *r.young_bound + c.tol(1e-10);
                              }
                              return d;
                            }));
  }
  return out;
}

std::vector<json> green(const Context& c) {
  const std::string result = "<L u, u>_w = -1/2 sum_ij w_i w_j J_ij (u_j - u_i)^2 for h = h0";
  if (!c.op().symmetric()) return {skip("green", "random-u", result, "kernel is not symmetric")};
  if (!c.row_mass_mode()) return {skip("green", "random-u", result, "h is not the row mass h0")};
  return {run_check("green", "random-u", result, [&] {
    const double jmax = c.op().kernel.values.cwiseAbs().maxCoeff();
    double worst = 0.0;
    bool pass = true;
    std::mt19937_64 rng(c.config.seed);
    std::normal_distribution<double> normal;
    for (int trial = 0; trial < 20; ++trial) {
      Eigen::VectorXd u(Eigen::Index(c.op().size()));
      for (auto& x : u) x = normal(rng);
      const auto g = green_defect(c.op(), u);
      const double scale = u.squaredNorm() * jmax;
      worst = std::max(worst, g.defect / std::max(scale, 1e-300));
      pass = pass && g.defect <= c.tol(1e-11) * scale;
    }
    return json{{"pass", pass}, {"max_relative_defect", worst}, {"trials", 20}};
  })};
}

std::vector<json> adjoint(const Context& c) {
  const std::string result = "D_w K = K^T D_w for symmetric J";
  if (!c.op().symmetric()) return {skip("adjoint", "weighted-transpose", result, "kernel is not symmetric")};
  return {run_check("adjoint", "weighted-transpose", result, [&] {
    const double defect = weighted_adjoint_defect(c.op());
    const double kmax = c.op().K.cwiseAbs().maxCoeff();
    return json{{"pass", defect <= c.tol(1e-12) * kmax}, {"defect", defect}, {"max_abs_K", kmax}};
  })};
}

std::vector<json> support(const Context& c) {
  return {run_check("support", "growth", "supp K^n z contains the n-fold R-dilation of supp z", [&] {
    const auto z = c.initial(c.fraction_indicator(0.0, 0.05));
    const auto r = verify_support_growth(c.op(), z, 50);
    json d = {{"pass", r.all_contained()}, {"n_max", r.n_max}, {"radius", r.radius}};
    d["first_full"] = r.first_full ? json(*r.first_full) : json(nullptr);
    d["n0"] = r.n0 ? json(*r.n0) : json(nullptr);
    if (r.first_full && r.n0) d["pass"] = r.all_contained() && *r.first_full <= *r.n0;
    std::vector<std::size_t> failed;
    for (std::size_t k = 0; k < r.contained.size(); ++k)
      if (!r.contained[k]) failed.push_back(k + 1);
    d["uncontained_steps"] = failed;
    return d;
  })};
}

std::vector<json> confinement(const Context& c) {
  const std::string result = "counterexample kernel keeps supp K^n z inside [1/2, 1]";
  if (c.op().kernel.spec.family != KernelFamily::counterexample)
    return {skip("confinement", "half-interval", result, "needs the counterexample kernel")};
  return {run_check("confinement", "half-interval", result, [&] {
    const auto z = c.initial("indicator:0.5,1");
    SupportSet region;
    for (std::size_t i = 0; i < c.op().size(); ++i)
      if (c.problem.space->coords()(Eigen::Index(i), 0) >= 0.5) region.indices.push_back(i);
    require(region.includes(support_of(z)), ErrorKind::precondition_failure,
            "initial data must be supported in [1/2, 1]");
    const auto t = support_trajectory(c.op(), z, 50, region);
    double leaked = 0.0;
    bool inside = true;
    for (std::size_t n = 0; n < t.supports.size(); ++n) {
      leaked = std::max(leaked, t.leaked[n]);
      inside = inside && region.includes(t.supports[n]);
    }
    const auto& last = t.supports.back().indices;
    json d = {{"pass", inside && leaked <= 1e-14},
              {"n_max", 50},
              {"max_leaked", leaked},
              {"final_support_size", last.size()}};
    if (!last.empty()) {
      d["final_support_range"] = {c.problem.space->coords()(Eigen::Index(last.front()), 0),
                                  c.problem.space->coords()(Eigen::Index(last.back()), 0)};
    }
    return d;
  })};
}

std::vector<json> maxprin(const Context& c) {
  std::vector<json> out;
  const auto u0 = c.initial(c.fraction_indicator(0.0, 0.1));
  out.push_back(run_check("maxprin", "weak", "u0 >= 0 implies u(t) >= 0 for t >= 0", [&] {
    const auto r = check_weak_max_principle(c.op(), u0, {0.01, 0.1, 1.0, 10.0}, default_method(c.op()));
    const double tol = c.tol(1e-10) * u0.cwiseAbs().maxCoeff();
    return json{{"pass", r.min_value >= -tol}, {"min", r.min_value}, {"worst_time", r.worst_time},
                {"worst_node", r.worst_node}, {"tolerance", tol}};
  }));
  out.push_back(run_check("maxprin", "strong", "u0 >= 0 nontrivial implies u(t) > 0 for t > 0", [&] {
    const auto r = check_strong_max_principle(c.op(), u0, 1.0);
    json ladder = json::array();
    for (const auto& step : r.ladder)
      ladder.push_back({{"s", step.s}, {"t", step.t}, {"contained", step.contained}, {"missing", step.missing}});
    return json{{"pass", r.min_value > 0.0 && r.ladder_ok}, {"t", r.t}, {"min", r.min_value},
                {"argmin", r.argmin}, {"ladder", ladder}};
  }));
  return out;
}

std::vector<json> backward(const Context& c) {
  return {run_check("backward", "sign-change", "u(t) changes sign for t < 0 when supp u0 is proper", [&] {
    const auto u0 = c.initial(c.fraction_indicator(0.4, 0.6));
    const auto r = check_backward_sign_change(c.op(), u0, -0.5);
    return json{{"pass", true}, {"t", r.t}, {"min", r.min_value}, {"max", r.max_value},
                {"tolerance", r.tolerance}, {"growth", r.growth}};
  })};
}

std::vector<json> split(const Context& c) {
  return {run_check("split", "S1+S2", "u(t) = e^{-h t} u0 + S2(t) u0 with ||S1(t)|| <= e^{-alpha t}", [&] {
    const auto u0 = c.initial("random");
    const double t = 3.0;
    const auto s = split_S1_S2(c.op(), u0, t);
    const auto u = evolve(c.op(), u0, t, default_method(c.op()));
    const double sum_err = (s.s1 + s.s2 - u).cwiseAbs().maxCoeff() / std::max(u.cwiseAbs().maxCoeff(), 1e-300);
    json norms = json::array();
    bool decay = true;
    for (double p : {1.0, 2.0, infinity}) {
      const double lhs = weighted_norm(s.s1, c.op().weights(), p);
      const double rhs = std::exp(-s.alpha * t) * weighted_norm(u0, c.op().weights(), p);
      decay = decay && lhs <= rhs * (1.0 + c.tol(1e-12));
      norms.push_back({{"p", p}, {"s1", lhs}, {"bound", rhs}});
    }
    return json{{"pass", decay && sum_err <= c.tol(1e-12)}, {"t", t}, {"alpha", s.alpha},
                {"sum_rel_err", sum_err}, {"norms", norms}};
  })};
}

std::vector<json> riesz(const Context& c) {
  const std::string result = "contour projector onto the top eigenvalue equals the Hilbert projector";
  if (!c.op().symmetric()) return {skip("riesz", "top-eigenvalue", result, "kernel is not symmetric")};
  return {run_check("riesz", "top-eigenvalue", result, [&] {
    const auto es = eig_full(c.op());
    require(es.gap > 1e-8 * std::max(es.operator_norm(), 1e-300), ErrorKind::precondition_failure,
            "top eigenvalue is not isolated and simple");
    const auto q = riesz_projection(c.op(), es, es.lambda1);
    const double hilbert = (q.Q - hilbert_projector(es.phi1, c.op().weights())).cwiseAbs().maxCoeff();
    json d = {{"target", es.lambda1},          {"gap", q.gap},
              {"radius", q.radius},            {"hilbert_defect", hilbert},
              {"idempotency_defect", q.idempotency_defect}, {"imaginary_residue", q.imaginary_residue}};
    bool pass = hilbert <= c.tol(1e-8) && q.idempotency_defect <= c.tol(1e-8) && q.imaginary_residue <= c.tol(1e-9);
    if (c.row_mass_mode() && std::abs(es.lambda1) <= 1e-10) {
      // Projection onto constants is the measure-weighted mean.
      const Eigen::VectorXd ones = Eigen::VectorXd::Ones(Eigen::Index(c.op().size()));
      const double mu = c.problem.space->total_measure();
      const Eigen::MatrixXd mean = ones * c.op().weights().transpose() / mu;
      const double mean_defect = (q.Q - mean).cwiseAbs().maxCoeff();
      d["mean_defect"] = mean_defect;
      pass = pass && mean_defect <= c.tol(1e-8);
    }
    d["pass"] = pass;
    return d;
  })};
}

std::vector<json> rates(const Context& c) {
  std::vector<json> out;
  const double ta = c.config.window.at(0), tb = c.config.window.at(1);
  const auto u0 = c.initial("cos:1");
  const auto fit_json = [&](const RateFit& f) {
    return json{{"pass", f.rel_err <= c.tol(0.05)}, {"slope", f.slope}, {"reference", f.reference},
                {"rel_err", f.rel_err}, {"window", {ta, tb}}};
  };
  const std::string neumann = "log ||u(t) - mean|| decays with slope lambda_2 for h = h0";
  if (!c.op().symmetric()) {
    out.push_back(skip("rates", "neumann", neumann, "kernel is not symmetric"));
  } else if (!c.row_mass_mode()) {
    out.push_back(skip("rates", "neumann", neumann, "h is not the row mass h0"));
  } else {
    out.push_back(run_check("rates", "neumann", neumann, [&] {
      require_positive_connected(c.op().kernel);
      return fit_json(fit_asymptotic_rate(c.op(), u0, ta, tb, c.config.samples, RateMode::neumann));
    }));
  }
  const std::string dirichlet = "log ||e^{-lambda_1 t} u(t) - C* Phi_1|| decays with slope -(lambda_1 - lambda_2)";
  if (!c.op().symmetric()) {
    out.push_back(skip("rates", "dirichlet", dirichlet, "kernel is not symmetric"));
  } else {
    out.push_back(run_check("rates", "dirichlet", dirichlet, [&] {
      require_positive_connected(c.op().kernel);
      // Constant damping h = lambda_1(K) + 1/2 on the same kernel.
      const double top = eig_full(assemble(c.op().kernel, HMode::zero())).lambda1;
      const auto op = assemble(c.op().kernel, HMode::constant(top + 0.5));
      json d = fit_json(fit_asymptotic_rate(op, u0, ta, tb, c.config.samples, RateMode::dirichlet));
      d["h"] = top + 0.5;
      return d;
    }));
  }
  return out;
}

std::vector<json> spectrum_shape(const Context& c) {
  const std::string result = "selfadjoint spectrum: eigenbasis, Rayleigh bounds, band and isolated eigenvalues";
  if (!c.op().symmetric()) return {skip("spectrum-shape", "decomposition", result, "kernel is not symmetric")};
  std::vector<json> out;
  const auto es = eig_full(c.op());
  const double norm = std::max(es.operator_norm(), 1e-300);
  out.push_back(run_check("spectrum-shape", "decomposition", result, [&] {
    const double res = max_residual(c.op(), es);
    const double orth = orthonormality_defect(es.eigenvectors, c.op().weights());
    const auto rb = rayleigh_bounds(c.op(), 100, c.config.seed);
    return json{{"pass", res <= c.tol(1e-10) * norm && orth <= c.tol(1e-10)},
                {"max_residual", res}, {"orthonormality_defect", orth},
                {"m", rb.m}, {"M", rb.M}, {"min_quotient", rb.min_quotient}, {"max_quotient", rb.max_quotient}};
  }));
  out.push_back(run_check("spectrum-shape", "classification", "eigenvalues split into the band of -h and isolated values", [&] {
    const auto cl = classify_spectrum(c.op());
    json isolated = json::array();
    for (auto [value, mult] : cl.isolated) isolated.push_back({{"value", value}, {"multiplicity", mult}});
    json d = {{"pass", true}, {"band", {cl.band_lo, cl.band_hi}}, {"isolated", isolated},
              {"clustering_metric", cl.clustering_metric}, {"neumann_checked", cl.neumann_checked}};
    if (cl.neumann_checked) {
      d["top_eigenvalue"] = cl.top_eigenvalue;
      d["top_multiplicity"] = cl.top_multiplicity;
      d["top_vector_deviation"] = cl.top_vector_deviation;
    }
    return d;
  }));
  const Eigen::VectorXd h0v = h0(c.op().kernel);
  if (c.op().kernel.flags.nonnegative && (c.op().h - h0v).minCoeff() >= -1e-12 * std::max(1.0, h0v.maxCoeff())) {
    out.push_back(run_check("spectrum-shape", "nonpositive", "h >= h0 implies a nonpositive spectrum", [&] {
      return json{{"pass", es.lambda1 <= c.tol(1e-10)}, {"lambda1", es.lambda1}};
    }));
  }
  out.push_back(run_check("spectrum-shape", "principal", "positive simple principal eigenvalue with positive eigenvector", [&] {
    const auto pp = principal_eigenpair(c.op());
    const double dl = std::abs(pp.lambda - es.lambda1);
    const double dv = weighted_norm(pp.phi - es.phi1, c.op().weights(), 2.0);
    return json{{"pass", dl <= c.tol(1e-8) && dv <= c.tol(1e-6) && pp.phi.minCoeff() > 0.0},
                {"lambda", pp.lambda}, {"min_phi", pp.phi.minCoeff()}, {"iterations", pp.iterations},
                {"eigenvalue_defect", dl}, {"eigenvector_defect", dv}};
  }));
  return out;
}

}  // namespace

json run_suites(const Problem& problem, const ExperimentConfig& config, const std::vector<std::string>& suites) {
  using Suite = std::vector<json> (*)(const Context&);
  static const std::map<std::string, Suite> table = {
      {"bounds", bounds},   {"green", green},       {"adjoint", adjoint},   {"support", support},
      {"confinement", confinement}, {"maxprin", maxprin}, {"backward", backward}, {"split", split},
      {"riesz", riesz},     {"rates", rates},       {"spectrum-shape", spectrum_shape}};
  for (const auto& s : suites)
    require(table.count(s) == 1, ErrorKind::invalid_argument, "unknown suite '" + s + "'");

  Context ctx{problem, config};
  ctx.lo = problem.space->coords().col(0).minCoeff();
  ctx.hi = problem.space->coords().col(0).maxCoeff();
  json checks = json::array();
  for (const auto& s : suites)
    for (auto& check : table.at(s)(ctx)) checks.push_back(std::move(check));
  json counts = {{"pass", 0}, {"fail", 0}, {"skip", 0}, {"error", 0}};
  for (const auto& check : checks) counts[check["status"].get<std::string>()] = counts[check["status"].get<std::string>()].get<int>() + 1;
  return {{"checks", checks}, {"counts", counts}};
}

}  // namespace nld::app
