#include <algorithm>
#include <ostream>
#include <sstream>

#include "app.hpp"
#include "nld/io.hpp"

#ifndef NLD_VERSION
#define NLD_VERSION "0.0.0"
#endif

namespace nld::app {

using nlohmann::json;
using io::format_double;

namespace {

/// Collects the files written by a command so the manifest can list them.
struct Outputs {
  std::filesystem::path dir;
  std::vector<std::string> names;

  void write(const std::string& name, const std::string& content) {
    io::write_file_atomic(dir / name, content);
    names.push_back(name);
  }
  void write_json(const std::string& name, const json& doc) { write(name, doc.dump(2) + "\n"); }
};

void write_manifest(const ExperimentConfig& config, Outputs& out, int exit_code) {
  json manifest = {{"command", config.command},
                   {"version", NLD_VERSION},
                   {"eigen_version", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                         "." + std::to_string(EIGEN_MINOR_VERSION)},
                   {"seed", config.seed},
                   {"config_hash", config_hash(config)},
                   {"config", config.to_json()},
                   {"exit_code", exit_code},
                   {"outputs", out.names}};
  io::write_file_atomic(out.dir / "manifest.json", manifest.dump(2) + "\n");
}

std::string default_u0(const DiscreteMeasureSpace& space, double a, double b) {
  const double lo = space.coords().col(0).minCoeff(), hi = space.coords().col(0).maxCoeff();
  return "indicator:" + format_double(lo + a * (hi - lo)) + "," + format_double(lo + b * (hi - lo));
}

int spectrum(const ExperimentConfig& config, Outputs& out, std::ostream& log) {
  const auto problem = build_problem(config);
  require(problem.op.symmetric(), ErrorKind::precondition_failure,
          "spectrum: the kernel is not symmetric, so L has no w-orthonormal eigenbasis");
  const auto es = eig_full(problem.op);
  const auto cl = classify_spectrum(problem.op);
  std::string csv = "index,eigenvalue\n";
  for (Eigen::Index k = 0; k < es.eigenvalues.size(); ++k)
    csv += std::to_string(k) + "," + format_double(es.eigenvalues(k)) + "\n";
  json isolated = json::array();
  for (auto [value, mult] : cl.isolated) isolated.push_back({{"value", value}, {"multiplicity", mult}});
  const json summary = {{"lambda1", es.lambda1}, {"gap", es.gap},       {"m", es.rayleigh_m},
                        {"M", es.lambda1},       {"isolated", isolated}, {"band", {cl.band_lo, cl.band_hi}},
                        {"clustering_metric", cl.clustering_metric}};
  out.write("spectrum.csv", csv);
  out.write_json("spectrum.json", summary);
  log << "lambda1 = " << format_double(es.lambda1) << ", gap = " << format_double(es.gap) << "\n";
  return exit_ok;
}

int evolve_command(const ExperimentConfig& config, Outputs& out, std::ostream& log) {
  const auto problem = build_problem(config);
  std::vector<double> times = config.times.empty() ? std::vector<double>{0.5, 1.0, 2.0} : config.times;
  for (std::size_t k = 0; k < times.size(); ++k)
    require(std::isfinite(times[k]) && times[k] >= 0.0 && (k == 0 || times[k] > times[k - 1]),
            ErrorKind::invalid_argument, "times: expected finite, nonnegative, strictly increasing values");
  if (times.front() != 0.0) times.insert(times.begin(), 0.0);
  const Method method = config.method == "auto" ? default_method(problem.op) : parse_method(config.method);
  const auto u0 = parse_initial(config.u0.value_or(default_u0(*problem.space, 0.4, 0.6)), *problem.space, config.seed);
  const auto trace = evolve_trace(problem.op, u0, times, method);

  std::string csv = "t,node_index,u\n";
  json summary = json::array();
  const auto& w = problem.op.weights();
  for (std::size_t k = 0; k < trace.times.size(); ++k) {
    const auto& u = trace.states[k];
    const std::string t = format_double(trace.times[k]);
    for (Eigen::Index i = 0; i < u.size(); ++i) csv += t + "," + std::to_string(i) + "," + format_double(u(i)) + "\n";
    json norms = json::object();
    for (auto [p, value] : trace.norms[k]) norms[std::isinf(p) ? "inf" : format_double(p)] = value;
    summary.push_back({{"t", trace.times[k]}, {"min", u.minCoeff()}, {"max", u.maxCoeff()},
                       {"mass", w.dot(u)}, {"norms", norms}});
  }
  out.write("evolve.csv", csv);
  out.write_json("evolve_summary.json", {{"method", to_string(trace.method)}, {"times", summary}});
  log << "evolved " << u0.size() << " nodes to t = " << format_double(times.back()) << " with "
      << to_string(trace.method) << "\n";
  return exit_ok;
}

int fit_rate(const ExperimentConfig& config, Outputs& out, std::ostream& log) {
  const auto problem = build_problem(config);
  require(config.window.size() == 2 && config.window[0] < config.window[1], ErrorKind::invalid_argument,
          "window: expected [t_a, t_b] with t_a < t_b");
  require(config.samples >= 2, ErrorKind::invalid_argument, "samples: expected at least 2");
  RateMode mode;
  if (config.mode == "neumann") mode = RateMode::neumann;
  else if (config.mode == "dirichlet") mode = RateMode::dirichlet;
  else fail(ErrorKind::invalid_argument, "mode: expected neumann or dirichlet, got '" + config.mode + "'");
  const auto u0 = parse_initial(config.u0.value_or("cos:1"), *problem.space, config.seed);
  const auto f = fit_asymptotic_rate(problem.op, u0, config.window[0], config.window[1], config.samples, mode);
  const double tol = 0.05 * config.tol_scale;
  out.write_json("fit_rate.json", {{"slope", f.slope}, {"reference", f.reference}, {"rel_err", f.rel_err},
                                   {"intercept", f.intercept}, {"mode", config.mode},
                                   {"window", config.window}, {"tolerance", tol}});
  log << "slope = " << format_double(f.slope) << ", reference = " << format_double(f.reference)
      << ", rel_err = " << format_double(f.rel_err) << "\n";
  return f.rel_err <= tol ? exit_ok : exit_theorem;
}

int verify(const ExperimentConfig& config, Outputs& out, std::ostream& log) {
  const auto suites = config.suites.empty() ? suite_names() : config.suites;
  for (const auto& s : suites)
    require(std::find(suite_names().begin(), suite_names().end(), s) != suite_names().end(),
            ErrorKind::invalid_argument, "suite: unknown suite '" + s + "'");
  const auto problem = build_problem(config);
  const json report = run_suites(problem, config, suites);
  out.write_json("verify.json", report);
  for (const auto& check : report["checks"])
    log << check["status"].get<std::string>() << "  " << check["suite"].get<std::string>() << "/"
        << check["check"].get<std::string>() << "\n";
  const auto& counts = report["counts"];
  if (counts["fail"].get<int>() > 0) return exit_theorem;
  if (counts["error"].get<int>() > 0) return exit_numerical;
  return exit_ok;
}

int space_info(const ExperimentConfig& config, Outputs& out, std::ostream& log) {
  const auto space = parse_space(config.space);
  const auto& d = space->dist();
  double diameter = 0.0;
  for (Eigen::Index k = 0; k < d.size(); ++k)
    if (std::isfinite(d.reshaped()(k))) diameter = std::max(diameter, d.reshaped()(k));
  std::vector<int> comps = space->components();
  std::sort(comps.begin(), comps.end());
  const auto components = std::unique(comps.begin(), comps.end()) - comps.begin();
  json builder = {{"name", space->builder().name}, {"params", space->builder().params}};
  const json info = {{"n", space->size()},
                     {"ambient_dim", space->ambient_dim()},
                     {"total_measure", space->total_measure()},
                     {"min_weight", space->weights().minCoeff()},
                     {"max_weight", space->weights().maxCoeff()},
                     {"components", components},
                     {"diameter", diameter},
                     {"metric_defect", metric_defect(d)},
                     {"builder", builder}};
  out.write_json("space_info.json", info);
  if (config.save_space) {
    io::save_space(*config.save_space, *space);
    log << "saved space to " << config.save_space->string() << "\n";
  }
  log << space->size() << " nodes, total measure " << format_double(space->total_measure()) << "\n";
  return exit_ok;
}

}  // namespace

int run(const ExperimentConfig& config, std::ostream& log) {
  Outputs out{config.out_dir, {}};
  int code = exit_ok;
  try {
    require(config.tol_scale > 0.0 && std::isfinite(config.tol_scale), ErrorKind::invalid_argument,
            "tol-scale: expected a positive number");
    std::filesystem::create_directories(config.out_dir);
    if (config.command == "spectrum") code = spectrum(config, out, log);
    else if (config.command == "evolve") code = evolve_command(config, out, log);
    else if (config.command == "fit-rate") code = fit_rate(config, out, log);
    else if (config.command == "verify") code = verify(config, out, log);
    else if (config.command == "space-info") code = space_info(config, out, log);
    else fail(ErrorKind::invalid_argument, "command: unknown command '" + config.command + "'");
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
    code = exit_code_for(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    log << "error (io): " << e.what() << "\n";
    return exit_input;
  }
  try {
    write_manifest(config, out, code);
  } catch (const std::exception& e) {
    log << "error (io): " << e.what() << "\n";
    return code == exit_ok ? exit_input : code;
  }
  return code;
}

}  // namespace nld::app
