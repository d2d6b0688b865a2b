#include <iostream>

#include <CLI11.hpp>

#include "app.hpp"
#include "nld/io.hpp"

using nld::app::ExperimentConfig;

int main(int argc, char** argv) {
  CLI::App cli{"Nonlocal diffusion experiments and property checks"};
  cli.set_help_flag("--help", "Print this help message and exit");
  cli.fallthrough();
  cli.require_subcommand(1);
  cli.set_version_flag("--version", NLD_VERSION);

  ExperimentConfig flags;
  std::string config_file, kernel_flags;
  std::string u0, save_space, out_dir;

  // Options live on the top-level app so they may appear before or after the
  // subcommand; explicitly given flags override the config file.
  cli.add_option("--config", config_file, "JSON config file; explicit flags override its fields")
      ->check(CLI::ExistingFile);
  auto* o_space = cli.add_option("--space", flags.space, "space spec or space file");
  auto* o_kernel = cli.add_option("--kernel", flags.kernel, "kernel spec");
  auto* o_kflags = cli.add_option("--kernel-flags", kernel_flags, "JSON {symmetric, nonnegative, radius}");
  auto* o_h = cli.add_option("--h", flags.h, "h0 | zero | const:a | x | lambda1+a | file:<path>");
  auto* o_seed = cli.add_option("--seed", flags.seed, "random seed");
  auto* o_out = cli.add_option("--out-dir", out_dir, "output directory");
  auto* o_tol = cli.add_option("--tol-scale", flags.tol_scale, "multiplier on check tolerances");
  auto* o_u0 = cli.add_option("--u0", u0, "initial data spec");
  auto* o_times = cli.add_option("--times", flags.times, "output times (evolve)")->delimiter(',');
  auto* o_method = cli.add_option("--method", flags.method, "auto | spectral | matexp | picard | rk4");
  auto* o_mode = cli.add_option("--mode", flags.mode, "neumann | dirichlet (fit-rate)");
  auto* o_window = cli.add_option("--window", flags.window, "fit window t_a,t_b")->delimiter(',')->expected(2);
  auto* o_samples = cli.add_option("--samples", flags.samples, "fit samples");
  auto* o_suites = cli.add_option("--suite", flags.suites, "verify suites (repeatable or comma separated)")
                           ->delimiter(',');
  auto* o_save = cli.add_option("--save-space", save_space, "write the space file (space-info)");

  for (const char* name : {"spectrum", "evolve", "fit-rate", "verify", "space-info"}) cli.add_subcommand(name);

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = cli.exit(e);
    return code == 0 ? 0 : nld::app::exit_input;
  }

  ExperimentConfig config;
  try {
    if (!config_file.empty()) nld::app::apply_config_json(config, nld::io::read_json(config_file));
    if (*o_kflags) {
      const auto doc = nlohmann::json::parse(kernel_flags, nullptr, false);
      nld::require(!doc.is_discarded(), nld::ErrorKind::invalid_argument, "kernel-flags: not valid JSON");
      config.kernel_flags = doc;
    }
  } catch (const nld::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return nld::app::exit_input;
  }
  config.command = cli.get_subcommands().front()->get_name();
  if (*o_space) config.space = flags.space;
  if (*o_kernel) config.kernel = flags.kernel;
  if (*o_h) config.h = flags.h;
  if (*o_seed) config.seed = flags.seed;
  if (*o_out) config.out_dir = out_dir;
  if (*o_tol) config.tol_scale = flags.tol_scale;
  if (*o_u0) config.u0 = u0;
  if (*o_times) config.times = flags.times;
  if (*o_method) config.method = flags.method;
  if (*o_mode) config.mode = flags.mode;
  if (*o_window) config.window = flags.window;
  if (*o_samples) config.samples = flags.samples;
  if (*o_suites) config.suites = flags.suites;
  if (*o_save) config.save_space = save_space;
  return nld::app::run(config, std::cerr);
}
