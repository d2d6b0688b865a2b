#include <doctest.h>

#include <cmath>
#include <numbers>

#include <unsupported/Eigen/MatrixFunctions>

#include "fixtures.hpp"
#include "nld/errors.hpp"
#include "nld/evolution.hpp"
#include "nld/matrix_exponential.hpp"
#include "oracles.hpp"

using namespace nld;

namespace {

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an nld::Error");
  return ErrorKind::invalid_argument;
}

NonlocalOperator all_ones(std::size_t n, HMode mode) {
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(Eigen::Index(n));
  return assemble(evaluate(KernelSpec::separable(ones, ones), fixture::interval(n)), mode);
}

NonlocalOperator uniform(std::size_t n, double R = 0.2) {
  return assemble(evaluate(KernelSpec::truncated_uniform(1, R), fixture::interval(n)), HMode::row_mass());
}

double rel_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return (a - b).cwiseAbs().maxCoeff() / std::max(1e-300, b.cwiseAbs().maxCoeff());
}

const Method all_methods[] = {Method::spectral, Method::matexp, Method::picard, Method::rk4};

}  // namespace

TEST_CASE("matrix exponential against the reference implementation") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    const double scale = std::pow(10.0, 0.75 * double(seed) - 2.0);
    Eigen::MatrixXd a(12, 12);
    for (auto& x : a.reshaped()) x = scale * normal(rng);
    const Eigen::MatrixXd ref = a.exp();
    CHECK((expm(a) - ref).cwiseAbs().maxCoeff() <= 1e-12 * ref.cwiseAbs().maxCoeff());
  }
  CHECK((expm(Eigen::MatrixXd::Zero(5, 5)) - Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff() <= 2.3e-16);
}

TEST_CASE("method names") {
  for (auto m : all_methods) CHECK(parse_method(to_string(m)) == m);
  CHECK(kind_of([] { parse_method("euler"); }) == ErrorKind::invalid_argument);
}

TEST_CASE("equilibria and decoupled decay") {
  const auto op = uniform(60);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(60);
  for (auto m : all_methods)
    for (double t : {-1.0, 0.5, 3.0}) CHECK(rel_diff(evolve(op, ones, t, m), ones) <= 1e-10);

  const auto zero =
      assemble(evaluate(KernelSpec::explicit_matrix(Eigen::MatrixXd::Zero(30, 30), {}), fixture::interval(30)),
               HMode::constant(0.8));
  const auto u0 = oracle::random_vector(30, 2);
  for (auto m : all_methods)
    for (double t : {-2.0, 1.0, 4.0}) CHECK(rel_diff(evolve(zero, u0, t, m), std::exp(-0.8 * t) * u0) <= 1e-10);
}

TEST_CASE("rank-one analytic solution") {
  const auto op = all_ones(40, HMode::constant(1.0));
  const auto u0 = oracle::random_vector(40, 6);
  const double mean = weighted_dot(u0, Eigen::VectorXd::Ones(40), op.weights());
  for (auto m : all_methods)
    for (double t : {-3.0, 0.25, 2.0, 10.0}) {
      CAPTURE(to_string(m));
      CAPTURE(t);
      const Eigen::VectorXd exact = (mean + std::exp(-t) * (u0.array() - mean)).matrix();
      CHECK(rel_diff(evolve(op, u0, t, m), exact) <= 1e-9);
    }
}

TEST_CASE("all methods agree with a Taylor oracle") {
  const auto op = assemble(evaluate(KernelSpec::gaussian_truncated(1, 0.2, 0.5), fixture::interval(40)), HMode::row_mass());
  const auto u0 = oracle::indicator(op.space().coords(), 0.2, 0.5);
  for (double t : {-1.0, 2.0}) {
    const auto ref = oracle::taylor_exp(op.L, u0, t);
    for (auto m : all_methods) CHECK(rel_diff(evolve(op, u0, t, m), ref) <= 1e-9);
  }
}

TEST_CASE("cross-agreement and group law on the standard operators") {
  for (const auto& [name, op] : fixture::standard_operators()) {
    CAPTURE(name);
    const auto u0 = oracle::random_vector(op.size(), 17);
    for (double t : {-10.0, -1.0, 0.3, 10.0}) {
      const auto ref = evolve(op, u0, t, Method::spectral);
      for (auto m : {Method::matexp, Method::picard, Method::rk4}) {
        CAPTURE(to_string(m));
        CAPTURE(t);
        CHECK(rel_diff(evolve(op, u0, t, m), ref) <= 1e-6);
      }
    }
    for (auto m : {Method::spectral, Method::matexp})
      for (auto [s, t] : {std::pair{1.0, 2.0}, {-1.5, 4.0}, {3.0, -0.5}}) {
        const Propagator prop(op, m);
        CHECK(rel_diff(prop(prop(u0, s), t), prop(u0, s + t)) <= 1e-8);
      }
  }
}

TEST_CASE("Picard internals") {
  const auto op = uniform(80);
  PicardStats stats;
  const auto u0 = oracle::random_vector(80, 1);
  picard_solve(op, u0, 5.0, 64, &stats);
  CHECK(stats.contraction_bound <= 0.5);
  CHECK(stats.sub_intervals >= 1);
  CHECK(stats.max_observed_ratio <= stats.contraction_bound + 1e-9);
  CHECK(stats.sub_interval_length * double(stats.sub_intervals) == doctest::Approx(5.0));
}

TEST_CASE("spectral method requires symmetry") {
  const auto s = fixture::interval(20);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(20);
  const Eigen::VectorXd ramp = Eigen::VectorXd::LinSpaced(20, 1, 2);
  const auto op = assemble(evaluate(KernelSpec::separable(ones, ramp), s), HMode::row_mass());
  CHECK(default_method(op) == Method::matexp);
  CHECK(kind_of([&] { evolve(op, ones, 1.0, Method::spectral); }) == ErrorKind::precondition_failure);
  const auto u0 = oracle::random_vector(20, 3);
  const auto ref = evolve(op, u0, 2.0, Method::matexp);
  CHECK(rel_diff(evolve(op, u0, 2.0, Method::rk4), ref) <= 1e-6);
  CHECK(rel_diff(evolve(op, u0, 2.0, Method::picard), ref) <= 1e-6);
}

TEST_CASE("traces") {
  const auto op = uniform(100);
  const auto u0 = oracle::indicator(op.space().coords(), 0.0, 0.1);
  const auto single = evolve_trace(op, u0, {0.0}, Method::spectral);
  REQUIRE(single.states.size() == 1);
  CHECK(single.states[0] == u0);

  const auto tr = evolve_trace(op, u0, {0.0, 1.0, 2.0}, Method::spectral);
  const Propagator prop(op, Method::spectral);
  CHECK(rel_diff(prop(tr.states[1], 1.0), tr.states[2]) <= 1e-10);
  CHECK(tr.states[0] == u0);
  REQUIRE(tr.norms.size() == 3);
  CHECK(tr.norms[0].size() == 3);
  CHECK(tr.supports[0] == support_of(u0));

  // Mass is conserved for h = h0 and symmetric J.
  const double mass = weighted_dot(u0, Eigen::VectorXd::Ones(100), op.weights());
  for (const auto& s : tr.states)
    CHECK(std::abs(weighted_dot(s, Eigen::VectorXd::Ones(100), op.weights()) - mass) <= 1e-10 * mass);

  // Growth bound with the top eigenvalue (0 here): sup norm stays below C ||u0||.
  const auto es = eig_full(op);
  for (const auto& s : tr.states) CHECK(s.cwiseAbs().maxCoeff() <= (1.0 + 1e-10) * u0.cwiseAbs().maxCoeff() * std::exp(es.lambda1));

  CHECK(kind_of([&] { evolve_trace(op, u0, {0.0, 2.0, 1.0}, Method::spectral); }) == ErrorKind::invalid_argument);
  CHECK(kind_of([&] { evolve_trace(op, u0, {1.0, 2.0}, Method::spectral); }) == ErrorKind::invalid_argument);
}

TEST_CASE("comparison principle") {
  const auto op = uniform(80);
  const auto u0 = oracle::indicator(op.space().coords(), 0.3, 0.4);
  const Eigen::VectorXd v0 = u0 + oracle::random_vector(80, 4).cwiseAbs();
  for (double t : {0.1, 1.0, 5.0}) {
    const auto u = evolve(op, u0, t, Method::matexp);
    const auto v = evolve(op, v0, t, Method::matexp);
    CHECK((u - v).maxCoeff() <= 1e-10);
  }
}

TEST_CASE("weak maximum principle") {
  const auto op = uniform(200);
  const auto u0 = oracle::indicator(op.space().coords(), 0.0, 0.1);
  const std::vector<double> grid = {0.01, 0.1, 1.0, 10.0};
  for (auto m : all_methods) {
    const auto r = check_weak_max_principle(op, u0, grid, m);
    CHECK(r.min_value >= -1e-10);
  }
  const auto z = check_weak_max_principle(op, Eigen::VectorXd::Zero(200), grid, Method::spectral);
  CHECK(z.min_value == 0.0);
  const auto one = check_weak_max_principle(op, Eigen::VectorXd::Ones(200), grid, Method::spectral);
  CHECK(one.min_value >= 1.0 - 1e-10);
  CHECK(kind_of([&] { check_weak_max_principle(op, -u0, grid, Method::spectral); }) == ErrorKind::precondition_failure);
}

TEST_CASE("strong maximum principle") {
  const auto op = uniform(200);
  const auto u0 = oracle::indicator(op.space().coords(), 0.0, 0.1);
  const auto r = check_strong_max_principle(op, u0, 1.0);
  CHECK(r.min_value > 0.0);
  CHECK(r.ladder_ok);
  CHECK_FALSE(r.ladder.empty());
  const Eigen::MatrixXd L = op.L;
  const Eigen::VectorXd dense = L.exp() * u0;
  CHECK(dense.minCoeff() > 0.0);

  CHECK(check_strong_max_principle(op, Eigen::VectorXd::Ones(200), 1e-3).min_value > 0.0);

  const auto ce = assemble(evaluate(KernelSpec::counterexample(0.25), fixture::interval(200)), HMode::zero());
  const auto half = oracle::indicator(ce.space().coords(), 0.5, 1.0);
  CHECK(kind_of([&] { check_strong_max_principle(ce, half, 1.0); }) == ErrorKind::precondition_failure);
  const auto unchecked = evolve(ce, half, 1.0, Method::matexp);
  CHECK(support_of(half).includes(support_of(unchecked)));
}

TEST_CASE("backward sign change") {
  const auto op = uniform(200);
  const auto u0 = oracle::indicator(op.space().coords(), 0.4, 0.6);
  const auto r = check_backward_sign_change(op, u0, -0.5);
  CHECK(r.min_value < -r.tolerance);
  CHECK(r.max_value > r.tolerance);
  const Eigen::MatrixXd back = -0.5 * op.L;
  const Eigen::VectorXd dense = back.exp() * u0;
  CHECK(rel_diff(r.state, dense) <= 1e-9);

  CHECK(kind_of([&] { check_backward_sign_change(op, Eigen::VectorXd::Ones(200), -0.5); }) ==
        ErrorKind::precondition_failure);
  CHECK(kind_of([&] { check_backward_sign_change(op, u0, 0.0); }) == ErrorKind::invalid_argument);
}

TEST_CASE("S1 + S2 splitting") {
  const auto op = assemble(evaluate(KernelSpec::gaussian_truncated(1, 0.2, 0.5), fixture::interval(100)), HMode::row_mass());
  const auto u0 = oracle::random_vector(100, 8);
  const auto zero_t = split_S1_S2(op, u0, 0.0);
  CHECK(zero_t.s1 == u0);
  CHECK(zero_t.s2.cwiseAbs().maxCoeff() == 0.0);

  const auto st = split_S1_S2(op, u0, 3.0);
  CHECK(st.alpha == op.h.minCoeff());
  CHECK(weighted_norm(st.s1, op.weights(), infinity) <= std::exp(-3.0 * st.alpha) * weighted_norm(u0, op.weights(), infinity) * (1 + 1e-12));
  const auto u = evolve(op, u0, 3.0, default_method(op));
  CHECK(rel_diff(st.s1 + st.s2, u) <= 1e-12);

  const auto decoupled =
      assemble(evaluate(KernelSpec::explicit_matrix(Eigen::MatrixXd::Zero(20, 20), {}), fixture::interval(20)),
               HMode::constant(0.5));
  CHECK(split_S1_S2(decoupled, oracle::random_vector(20, 1), 2.0).s2.cwiseAbs().maxCoeff() <= 1e-14);

  const auto no_damping = assemble(op.kernel, HMode::zero());
  CHECK(kind_of([&] { split_S1_S2(no_damping, u0, 1.0); }) == ErrorKind::precondition_failure);
}

TEST_CASE("asymptotic rates") {
  const auto rank1 = all_ones(50, HMode::constant(1.0));
  const auto u0 = oracle::random_vector(50, 2);
  const auto f = fit_asymptotic_rate(rank1, u0, 1.0, 4.0, 20, RateMode::neumann);
  CHECK(std::abs(f.slope + 1.0) <= 1e-6);
  CHECK(f.reference == doctest::Approx(-1.0));

  const auto op = assemble(evaluate(KernelSpec::gaussian_truncated(1, 0.2, 0.5), fixture::interval(200)), HMode::row_mass());
  const auto es = eig_full(op);
  // Smooth data close to the slowest mode; rough data such as a narrow
  // indicator are still pre-asymptotic on this window.
  const Eigen::VectorXd ind = (1.0 + (std::numbers::pi * op.space().coords().col(0).array()).cos()).matrix();
  const auto neu = fit_asymptotic_rate(op, ind, 5.0, 10.0, 30, RateMode::neumann);
  CHECK(std::abs(neu.reference - es.eigenvalues(1)) <= 1e-12);
  CHECK(neu.rel_err <= 0.05);

  const auto dir = assemble(op.kernel, HMode::constant(eig_full(assemble(op.kernel, HMode::zero())).lambda1 + 0.5));
  // cos(pi x) is odd about 1/2 while the principal mode is even, so the
  // second mode dominates the residual from the start.
  const Eigen::VectorXd odd = ind.array() - 1.0;
  const auto dres = fit_asymptotic_rate(dir, odd, 5.0, 10.0, 30, RateMode::dirichlet);
  CHECK(dres.rel_err <= 0.05);

  const auto pure = eig_full(dir).phi1;
  CHECK(kind_of([&] { fit_asymptotic_rate(dir, pure, 5.0, 10.0, 30, RateMode::dirichlet); }) == ErrorKind::degenerate_fit);
  CHECK(kind_of([&] { fit_asymptotic_rate(op, ind, 5.0, 10.0, 30, RateMode::dirichlet); }) == ErrorKind::precondition_failure);
}
