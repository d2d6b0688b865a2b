#include <cstdio>

#include "app.hpp"

namespace nld::app {

using nlohmann::json;

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::theorem_violation:
    case ErrorKind::property_failure:
      return exit_theorem;
    case ErrorKind::numerical_failure:
      return exit_numerical;
    default:
      return exit_input;
  }
}

json ExperimentConfig::to_json() const {
  json doc = {{"command", command}, {"space", space},   {"kernel", kernel},
              {"h", h},             {"seed", seed},     {"tol_scale", tol_scale},
              {"method", method},   {"mode", mode},     {"window", window},
              {"samples", samples}, {"suites", suites}, {"times", times}};
  doc["kernel_flags"] = kernel_flags ? *kernel_flags : json(nullptr);
  doc["u0"] = u0 ? json(*u0) : json(nullptr);
  return doc;
}

namespace {

template <class T>
T field(const json& value, const std::string& name) {
  try {
    return value.get<T>();
  } catch (const json::exception&) {
    fail(ErrorKind::invalid_argument, "config field '" + name + "' has the wrong type");
  }
}

}  // namespace

void apply_config_json(ExperimentConfig& config, const json& doc) {
  require(doc.is_object(), ErrorKind::invalid_argument, "config file must hold a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (key == "command") config.command = field<std::string>(value, key);
    else if (key == "space") config.space = field<std::string>(value, key);
    else if (key == "kernel") config.kernel = field<std::string>(value, key);
    else if (key == "kernel_flags") config.kernel_flags = value;
    else if (key == "h") config.h = field<std::string>(value, key);
    else if (key == "seed") config.seed = field<std::uint64_t>(value, key);
    else if (key == "out_dir") config.out_dir = field<std::string>(value, key);
    else if (key == "tol_scale") config.tol_scale = field<double>(value, key);
    else if (key == "u0") config.u0 = field<std::string>(value, key);
    else if (key == "times") config.times = field<std::vector<double>>(value, key);
    else if (key == "method") config.method = field<std::string>(value, key);
    else if (key == "mode") config.mode = field<std::string>(value, key);
    else if (key == "window") config.window = field<std::vector<double>>(value, key);
    else if (key == "samples") config.samples = field<std::size_t>(value, key);
    else if (key == "suites") config.suites = field<std::vector<std::string>>(value, key);
    else if (key == "save_space") config.save_space = field<std::string>(value, key);
    else fail(ErrorKind::invalid_argument, "config field '" + key + "' is not recognized");
  }
}

std::string config_hash(const ExperimentConfig& config) {
  std::uint64_t hash = 14695981039346656037ULL;
  for (unsigned char c : config.to_json().dump()) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

}  // namespace nld::app
