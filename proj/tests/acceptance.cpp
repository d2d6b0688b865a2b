// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "fixtures.hpp"
#include "nld/nld.hpp"
#include "oracles.hpp"

using namespace nld;

namespace {

// Tolerances, fixed by the acceptance criteria.
constexpr double green_tol = 1e-11;
constexpr double adjoint_tol = 1e-12;
constexpr double neumann_eig_tol = 1e-10;
constexpr double neumann_vec_tol = 1e-8;
constexpr double leak_tol = 1e-14;
constexpr double weak_max_tol = 1e-10;
constexpr double sign_tol = 1e-10;
constexpr double riesz_tol = 1e-8;
constexpr double riesz_imag_tol = 1e-9;
constexpr double rate_tol = 0.05;
constexpr double rank_one_tol = 1e-6;
constexpr double bound_slack = 1e-10;
constexpr double method_tol = 1e-6;
constexpr double group_tol = 1e-8;
constexpr double band_tol = 1e-3;
constexpr double measure_tol = 1e-9;
constexpr double geodesic_tol = 1e-12;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[violated] ";
    }
    detail << what << "; ";
  }
};

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

NonlocalOperator gaussian_h0(std::size_t n) {
  return assemble(evaluate(KernelSpec::gaussian_truncated(1, 0.2, 0.5), fixture::interval(n)), HMode::row_mass());
}

NonlocalOperator uniform_h0(std::size_t n) {
  return assemble(evaluate(KernelSpec::truncated_uniform(1, 0.2), fixture::interval(n)), HMode::row_mass());
}

Eigen::VectorXd cos_mode(const NonlocalOperator& op) {
  return (std::numbers::pi * op.space().coords().col(0).array()).cos().matrix();
}

/// Eigenvalues of L from a general (nonsymmetric) solver, descending.
Eigen::VectorXd general_eigenvalues(const Eigen::MatrixXd& L) {
  Eigen::EigenSolver<Eigen::MatrixXd> solver(L, false);
  Eigen::VectorXd values = solver.eigenvalues().real();
  std::sort(values.begin(), values.end(), std::greater<>());
  return values;
}

double weighted_p_norm(const Eigen::VectorXd& u, const Eigen::VectorXd& w, double p) {
  if (std::isinf(p)) return u.cwiseAbs().maxCoeff();
  return std::pow((w.array() * u.array().abs().pow(p)).sum(), 1.0 / p);
}

void green_identity(Outcome& out) {
  const auto op = gaussian_h0(300);
  const Eigen::MatrixXd& J = op.kernel.values;
  const double jnorm = J.cwiseAbs().maxCoeff();
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto u = oracle::random_vector(300, 1000 + seed);
    const double lhs = op.weights().dot(oracle::apply_L(J, op.weights(), op.h, u).cwiseProduct(u));
    const double defect = std::abs(lhs - oracle::green_rhs(J, op.weights(), u));
    worst = std::max(worst, defect / (u.squaredNorm() * jnorm));
  }
  out.require(worst <= green_tol, "max |<Lu,u> + dirichlet| / (|u|^2 |J|) = " + sci(worst) + " <= " + sci(green_tol));
}

void weighted_adjoint(Outcome& out) {
  double worst = 0.0;
  std::string where;
  std::size_t cases = 0;
  for (const auto& c : fixture::symmetric_matrix()) {
    const auto op = assemble(c.kernel, HMode::row_mass());
    const Eigen::MatrixXd DK = op.weights().asDiagonal() * op.K;
    const double defect = (DK - DK.transpose()).cwiseAbs().maxCoeff() / op.K.cwiseAbs().maxCoeff();
    if (defect >= worst) {
      worst = defect;
      where = c.name;
    }
    ++cases;
  }
  out.require(worst <= adjoint_tol, std::to_string(cases) + " kernel/space pairs, worst " + sci(worst) + " (" + where +
                                        ") <= " + sci(adjoint_tol));
}

void neumann_kernel(Outcome& out) {
  const auto op = gaussian_h0(300);
  const auto es = eig_full(op);
  const double top = es.eigenvalues(0);
  std::size_t multiplicity = 0;
  for (double v : es.eigenvalues)
    if (std::abs(v - top) <= neumann_eig_tol) ++multiplicity;
  const Eigen::VectorXd phi = es.eigenvectors.col(0);
  const double deviation = (phi.maxCoeff() - phi.minCoeff()) / phi.cwiseAbs().maxCoeff();
  const double independent_top = general_eigenvalues(op.L)(0);
  out.require(std::abs(top) <= neumann_eig_tol, "max eigenvalue " + sci(top));
  out.require(std::abs(independent_top) <= neumann_eig_tol, "general-solver max eigenvalue " + sci(independent_top));
  out.require(multiplicity == 1, "multiplicity " + std::to_string(multiplicity));
  out.require(deviation <= neumann_vec_tol, "eigenvector relative deviation " + sci(deviation));
}

void support_growth(Outcome& out) {
  const auto op = uniform_h0(200);
  const auto z = oracle::indicator(op.space().coords(), 0.0, 0.05);
  const auto conn = is_R_connected(op.space(), 0.2);
  out.require(conn.connected && conn.n0.has_value(), "R-connected");
  if (!conn.n0) return;
  const auto report = verify_support_growth(op, z, *conn.n0);
  out.require(report.first_full.has_value() && *report.first_full <= *conn.n0,
              "full support at n = " + (report.first_full ? std::to_string(*report.first_full) : "never") +
                  ", n0 = " + std::to_string(*conn.n0));
  out.require(report.all_contained(), "dilation contained at every step");

  const auto ce = assemble(evaluate(KernelSpec::counterexample(0.25), fixture::interval(200)), HMode::row_mass());
  const auto zc = oracle::indicator(ce.space().coords(), 0.5, 1.0);
  // Brute-force powers of K, independent of the library's support routines.
  Eigen::VectorXd v = zc;
  double leaked = 0.0;
  for (int n = 1; n <= 50; ++n) {
    v = ce.K * v;
    v /= v.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < v.size(); ++i)
      if (ce.space().coords()(i, 0) < 0.5) leaked = std::max(leaked, std::abs(v(i)));
  }
  out.require(leaked <= leak_tol, "counterexample leaked mass over n <= 50: " + sci(leaked));
}

void maximum_principles(Outcome& out) {
  const auto op = uniform_h0(200);
  const auto u0 = oracle::indicator(op.space().coords(), 0.0, 0.1);
  double weak_min = infinity;
  for (double t : {0.01, 0.1, 1.0, 10.0})
    for (auto m : {Method::spectral, Method::matexp}) weak_min = std::min(weak_min, evolve(op, u0, t, m).minCoeff());
  const Eigen::MatrixXd Lt = op.L;
  const Eigen::MatrixXd E = Lt.exp();
  const Eigen::VectorXd oracle_u1 = E * u0;
  const auto strong = check_strong_max_principle(op, u0, 1.0);
  out.require(weak_min >= -weak_max_tol * u0.cwiseAbs().maxCoeff(), "weak min " + sci(weak_min));
  out.require(strong.min_value > 0.0, "min u(1) = " + sci(strong.min_value));
  out.require(oracle_u1.minCoeff() > 0.0, "reference min u(1) = " + sci(oracle_u1.minCoeff()));
  out.require(strong.ladder_ok, "support ladder over " + std::to_string(strong.ladder.size()) + " steps");
}

void backward_sign_change(Outcome& out) {
  const auto op = uniform_h0(200);
  const auto u0 = oracle::indicator(op.space().coords(), 0.4, 0.6);
  const auto r = check_backward_sign_change(op, u0, -0.5);
  const double scale = r.state.cwiseAbs().maxCoeff();
  const Eigen::MatrixXd Lt = -0.5 * op.L;
  const Eigen::MatrixXd E = Lt.exp();
  const Eigen::VectorXd ref = E * u0;
  const double ref_scale = ref.cwiseAbs().maxCoeff();
  out.require(r.state.minCoeff() < -sign_tol * scale, "min " + sci(r.state.minCoeff()));
  out.require(r.state.maxCoeff() > sign_tol * scale, "max " + sci(r.state.maxCoeff()));
  out.require(ref.minCoeff() < -sign_tol * ref_scale && ref.maxCoeff() > sign_tol * ref_scale,
              "reference exponential changes sign");
}

void riesz_hilbert(Outcome& out) {
  const auto op = gaussian_h0(300);
  const auto q = riesz_projection(op, 0.0, 32);
  // Hilbert projector from the general solver's kernel vector.
  Eigen::EigenSolver<Eigen::MatrixXd> solver(op.L);
  Eigen::Index top = 0;
  solver.eigenvalues().real().maxCoeff(&top);
  Eigen::VectorXd phi = solver.eigenvectors().col(top).real();
  phi /= std::sqrt(op.weights().dot(phi.cwiseProduct(phi)));
  const Eigen::MatrixXd P = phi * (op.weights().cwiseProduct(phi)).transpose();
  const double defect = (q.Q - P).cwiseAbs().maxCoeff();
  const Eigen::MatrixXd QQ = q.Q * q.Q;
  const double idem = (QQ - q.Q).cwiseAbs().maxCoeff();
  out.require(defect <= riesz_tol, "|Q - Phi Phi^T D_w| = " + sci(defect));
  out.require(idem <= riesz_tol, "|Q^2 - Q| = " + sci(idem));
  out.require(q.imaginary_residue <= riesz_imag_tol, "imaginary residue " + sci(q.imaginary_residue));
}

void asymptotic_rates(Outcome& out) {
  const auto op = gaussian_h0(200);
  const Eigen::VectorXd neumann_u0 = (1.0 + cos_mode(op).array()).matrix();
  const auto neumann = fit_asymptotic_rate(op, neumann_u0, 5.0, 10.0, 30, RateMode::neumann);
  const auto lam = general_eigenvalues(op.L);
  const double neumann_rel = std::abs(neumann.slope - lam(1)) / std::abs(lam(1));
  out.require(neumann_rel <= rate_tol, "neumann slope " + sci(neumann.slope) + " vs lambda2 " + sci(lam(1)) +
                                           ", rel err " + sci(neumann_rel));

  const auto zero_h = assemble(op.kernel, HMode::zero());
  const double top = general_eigenvalues(zero_h.L)(0);
  const auto damped = assemble(op.kernel, HMode::constant(top + 0.5));
  const auto dirichlet = fit_asymptotic_rate(damped, cos_mode(op), 5.0, 10.0, 30, RateMode::dirichlet);
  const auto mu = general_eigenvalues(damped.L);
  const double gap = mu(0) - mu(1);
  const double dirichlet_rel = std::abs(dirichlet.slope + gap) / gap;
  out.require(dirichlet_rel <= rate_tol, "dirichlet slope " + sci(dirichlet.slope) + " vs -(l1 - l2) " + sci(-gap) +
                                             ", rel err " + sci(dirichlet_rel));

  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(200);
  const auto rank_one = assemble(evaluate(KernelSpec::separable(ones, ones), fixture::interval(200)), HMode::constant(1.0));
  const Eigen::VectorXd x = rank_one.space().coords().col(0);
  double worst = 0.0;
  for (auto mode : {RateMode::neumann, RateMode::dirichlet})
    worst = std::max(worst, std::abs(fit_asymptotic_rate(rank_one, x, 5.0, 10.0, 30, mode).slope + 1.0));
  out.require(worst <= rank_one_tol, "rank-one slope error " + sci(worst));
}

void operator_bounds(Outcome& out) {
  const auto op = gaussian_h0(300);
  const Eigen::MatrixXd& J = op.kernel.values;
  const auto& w = op.weights();
  double worst = -infinity;
  for (auto [p, q] : {std::pair{1.0, 1.0}, {2.0, 2.0}, {1.0, infinity}, {2.0, infinity}}) {
    const double pc = conjugate_exponent(p);
    // Bound by direct summation; the sup over x for q = inf.
    double bound = 0.0;
    if (std::isinf(q)) {
      for (Eigen::Index i = 0; i < J.rows(); ++i) {
        const Eigen::VectorXd row = J.row(i).transpose();
        bound = std::max(bound, std::isinf(pc) ? row.cwiseAbs().maxCoeff() : weighted_p_norm(row, w, pc));
      }
    } else if (std::isinf(pc)) {
      Eigen::VectorXd sup(J.rows());
      for (Eigen::Index i = 0; i < J.rows(); ++i) sup(i) = J.row(i).cwiseAbs().maxCoeff();
      bound = weighted_p_norm(sup, w, q);
    } else {
      bound = oracle::bochner(J, w, q, pc);
    }
    const auto report = check_operator_bound(op, p, q, 100, 7);
    out.require(std::abs(report.bound - bound) <= 1e-12 * bound, "(" + sci(p) + "," + sci(q) + ") bound " + sci(bound));
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const auto u = oracle::random_vector(300, 5000 + seed);
      const double ratio = weighted_p_norm(op.K * u, w, q) / weighted_p_norm(u, w, p);
      worst = std::max(worst, ratio - bound);
    }
    worst = std::max(worst, report.max_ratio - report.bound);
  }
  out.require(worst <= bound_slack, "max(ratio - bound) = " + sci(worst));
}

void method_agreement(Outcome& out) {
  double worst_method = 0.0, worst_group = 0.0, max_norm = 0.0;
  std::string where;
  std::size_t operators = 0;
  for (const auto& [name, op] : fixture::standard_operators()) {
    max_norm = std::max(max_norm, general_eigenvalues(op.L).cwiseAbs().maxCoeff());
    const auto u0 = oracle::random_vector(op.size(), 23);
    for (double t : {-10.0, -2.0, 0.7, 10.0}) {
      const auto ref = evolve(op, u0, t, Method::spectral);
      const double scale = ref.cwiseAbs().maxCoeff();
      for (auto m : {Method::matexp, Method::picard, Method::rk4}) {
        const double rel = (evolve(op, u0, t, m) - ref).cwiseAbs().maxCoeff() / scale;
        if (rel > worst_method) {
          worst_method = rel;
          where = name + " " + to_string(m) + " t=" + sci(t);
        }
      }
    }
    for (auto m : {Method::spectral, Method::matexp}) {
      const Propagator prop(op, m);
      for (auto [s, t] : {std::pair{2.0, 3.0}, {-4.0, 6.0}, {5.0, -5.0}}) {
        const auto lhs = prop(prop(u0, s), t), rhs = prop(u0, s + t);
        worst_group = std::max(worst_group, (lhs - rhs).cwiseAbs().maxCoeff() / rhs.cwiseAbs().maxCoeff());
      }
    }
    ++operators;
  }
  out.require(max_norm <= 5.0, "largest |eigenvalue| " + sci(max_norm) + " <= 5");
  out.require(worst_method <= method_tol,
              std::to_string(operators) + " operators, worst method disagreement " + sci(worst_method) + " (" + where + ")");
  out.require(worst_group <= group_tol, "worst group-law defect " + sci(worst_group));
}

void band_clustering(Outcome& out) {
  double previous = 0.0;
  for (std::size_t n : {100, 200, 400}) {
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(Eigen::Index(n));
    const auto space = fixture::interval(n);
    const auto op = assemble(evaluate(KernelSpec::separable(ones, ones), space), HMode::from_values(space->coords().col(0)));
    const auto values = eig_full(op).eigenvalues;
    std::size_t inside = 0;
    for (double v : values)
      if (v >= -1.0 - band_tol && v <= band_tol) ++inside;
    const double fraction = double(inside) / double(n);
    const double needed = 1.0 - 3.0 / double(n);
    out.require(fraction >= needed, "n=" + std::to_string(n) + " fraction " + sci(fraction) + " >= " + sci(needed));
    out.require(fraction >= previous, "non-decreasing");
    previous = fraction;
  }
}

void space_builders(Outcome& out) {
  const auto measure = [&](const std::string& name, const DiscreteMeasureSpace& s, double expected) {
    const double err = std::abs(s.total_measure() - expected);
    out.require(err <= measure_tol, name + " measure err " + sci(err));
  };
  measure("interval(0,1,4)", build_interval(0, 1, 4), 1.0);
  measure("interval(-2,3,10)", build_interval(-2, 3, 10), 5.0);
  measure("box 2x2", build_box(std::vector<double>{0, 0}, std::vector<double>{1, 1}, std::vector<std::size_t>{2, 2}), 1.0);
  measure("box 4x8", build_box(std::vector<double>{0, 0}, std::vector<double>{1, 2}, std::vector<std::size_t>{4, 8}), 2.0);
  measure("triangle m=10", build_graph(fixture::triangle_edges(), 10), 3.0);
  const auto circle = fixture::circle(256);
  measure("circle n=256", *circle, 2.0 * std::numbers::pi);
  {
    const double lo[] = {0.0}, hi[] = {1.0};
    const std::size_t n[] = {100};
    const auto diagonal = build_manifold_chart(
        lo, hi, n,
        [](const Eigen::VectorXd& t) {
          Eigen::VectorXd x(2);
          x << t(0), t(0);
          return x;
        },
        [](const Eigen::VectorXd&) { return std::numbers::sqrt2; });
    measure("diagonal chart", diagonal, std::numbers::sqrt2);
  }
  measure("two intervals", build_multistructure({build_interval(0, 1, 10), build_interval(2, 3, 10)}), 2.0);
  Polyline segment(2, 2);
  segment << 3, 0, 4, 0;
  measure("segment + circle", build_multistructure({build_graph({segment}, 20), *circle}), 1.0 + 2.0 * std::numbers::pi);

  bool counts_ok = true;
  for (std::size_t level = 0; level <= 5; ++level) {
    const auto s = build_sierpinski(level);
    std::size_t pow3 = 1;
    for (std::size_t l = 0; l < level; ++l) pow3 *= 3;
    counts_ok = counts_ok && s.size() == 3 * (pow3 + 1) / 2 && s.size() == oracle::sierpinski_vertices(level);
    measure("sierpinski level " + std::to_string(level), s, 1.0);
  }
  out.require(counts_ok, "sierpinski node counts 3(3^l+1)/2 for levels 0-5");

  const std::size_t m = 12;
  const auto tri = build_graph(fixture::triangle_edges(), m);
  const double err = (tri.dist() - oracle::triangle_chain_dijkstra(m)).cwiseAbs().maxCoeff();
  out.require(err <= geodesic_tol, "triangle geodesic vs Dijkstra " + sci(err));
}

struct Criterion {
  int id;
  const char* name;
  void (*body)(Outcome&);
};

}  // namespace

int main() {
  const Criterion criteria[] = {
      {1, "Green identity", green_identity},
      {2, "weighted selfadjointness", weighted_adjoint},
      {3, "Neumann kernel of L", neumann_kernel},
      {4, "support growth and confinement", support_growth},
      {5, "weak and strong maximum principles", maximum_principles},
      {6, "backward sign change", backward_sign_change},
      {7, "Riesz equals Hilbert projection", riesz_hilbert},
      {8, "asymptotic rates", asymptotic_rates},
      {9, "operator norm bounds", operator_bounds},
      {10, "method agreement and group law", method_agreement},
      {11, "band clustering", band_clustering},
      {12, "space builders", space_builders},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    Outcome out;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.body(out);
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail << "exception: " << e.what();
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!out.pass) ++failures;
    std::printf("%s criterion %2d (%s) [%.2fs]: %s\n", out.pass ? "PASS" : "FAIL", c.id, c.name, seconds,
                out.detail.str().c_str());
  }
  std::fflush(stdout);
  return failures == 0 ? 0 : 1;
}
