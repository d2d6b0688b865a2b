#pragma once

// Experiment runner behind the `nld` command line tool.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nld/nld.hpp"

namespace nld::app {

enum ExitCode : int { exit_ok = 0, exit_theorem = 1, exit_input = 2, exit_numerical = 3 };

/// Exit code for an error kind.
int exit_code_for(ErrorKind kind);

/// Everything a run depends on. Unset optionals take per-command defaults.
struct ExperimentConfig {
  std::string command;                 // spectrum | evolve | fit-rate | verify | space-info
  std::string space = "interval:0,1,200";
  std::string kernel = "gaussian_truncated:1,0.2,0.5";
  std::optional<nlohmann::json> kernel_flags;  // {symmetric, nonnegative, radius}
  std::string h = "h0";
  std::uint64_t seed = 0;
  std::filesystem::path out_dir = ".";
  double tol_scale = 1.0;

  std::optional<std::string> u0;
  std::vector<double> times;           // evolve
  std::string method = "auto";         // evolve
  std::string mode = "neumann";        // fit-rate
  std::vector<double> window = {5.0, 10.0};
  std::size_t samples = 30;
  std::vector<std::string> suites;     // verify
  std::optional<std::filesystem::path> save_space;  // space-info

  /// Canonical form used for the manifest and its hash.
  nlohmann::json to_json() const;
};

/// Fill `config` from a config file object; unknown or mistyped fields are
/// rejected with the field name.
void apply_config_json(ExperimentConfig& config, const nlohmann::json& doc);

/// 64-bit FNV-1a of the canonical config, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

// Spec strings --------------------------------------------------------------

/// interval:a,b,n | box:lo..,hi..,n.. | triangle:m | circle:n | sierpinski:level
/// | multi:<spec>+<spec>... | path to a space file.
std::shared_ptr<const DiscreteMeasureSpace> parse_space(const std::string& spec);

/// gaussian_truncated:c,sigma,R | truncated_uniform:c,R | counterexample:R
/// | separable:ones | separable:<file> | convolution:gauss,sigma[,geodesic]
/// | convolution:exp,a[,geodesic] | matrix:<file>.
KernelSpec parse_kernel(const std::string& spec, const DiscreteMeasureSpace& space,
                        const std::optional<nlohmann::json>& flags);

/// h0 | zero | const:a | x | lambda1+a | file:<path>.
HMode parse_h(const std::string& spec, const KernelMatrix& kernel);

/// indicator:a,b | ones | const:c | cos:k | delta:i | random | random-positive
/// | file:<path>. Coordinates refer to the first ambient axis.
Eigen::VectorXd parse_initial(const std::string& spec, const DiscreteMeasureSpace& space,
                              std::uint64_t seed);

/// Space, kernel and operator built from a config.
struct Problem {
  std::shared_ptr<const DiscreteMeasureSpace> space;
  NonlocalOperator op;
};
Problem build_problem(const ExperimentConfig& config);

// Verify suites -------------------------------------------------------------

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {"bounds", "green",  "adjoint", "support",
                                                 "confinement", "maxprin", "backward", "split",
                                                 "riesz",  "rates",  "spectrum-shape"};
  return names;
}

/// Runs the named suites; each check is {suite, check, result, status, ...}
/// with status pass | fail | skip | error.
nlohmann::json run_suites(const Problem& problem, const ExperimentConfig& config,
                          const std::vector<std::string>& suites);

// Commands ------------------------------------------------------------------

/// Runs the configured command, writes its artifacts plus manifest.json into
/// out_dir, prints a short summary to `log`, and returns the exit code.
/// Library errors are caught and mapped to exit codes.
int run(const ExperimentConfig& config, std::ostream& log);

}  // namespace nld::app
