#include <charconv>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include "app.hpp"
#include "nld/io.hpp"

namespace nld::app {

namespace {

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    out.push_back(text.substr(start, pos - start));
    if (pos == std::string::npos) return out;
    start = pos + 1;
  }
}

std::pair<std::string, std::string> head_tail(const std::string& spec) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) return {spec, ""};
  return {spec.substr(0, colon), spec.substr(colon + 1)};
}

double number(const std::string& text, const std::string& field) {
  double value = 0.0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  require(ec == std::errc() && ptr == end && !text.empty(), ErrorKind::invalid_argument,
          field + ": '" + text + "' is not a number");
  return value;
}

std::vector<double> numbers(const std::string& list, const std::string& field, std::size_t expected) {
  std::vector<double> out;
  if (!list.empty())
    for (const auto& part : split(list, ',')) out.push_back(number(part, field));
  require(expected == 0 || out.size() == expected, ErrorKind::invalid_argument,
          field + ": expected " + std::to_string(expected) + " comma-separated values, got " +
              std::to_string(out.size()));
  return out;
}

std::size_t count(double value, const std::string& field) {
  require(value >= 0 && value == std::floor(value) && value < 1e9, ErrorKind::invalid_argument,
          field + ": expected a nonnegative integer");
  return static_cast<std::size_t>(value);
}

DiscreteMeasureSpace circle_space(std::size_t n) {
  const double lo[] = {0.0};
  const double hi[] = {2.0 * std::numbers::pi};
  const std::size_t counts[] = {n};
  return build_manifold_chart(
      lo, hi, counts,
      [](const Eigen::VectorXd& t) {
        Eigen::VectorXd x(2);
        x << std::cos(t(0)), std::sin(t(0));
        return x;
      },
      [](const Eigen::VectorXd&) { return 1.0; });
}

DiscreteMeasureSpace triangle_space(std::size_t m) {
  const double h = std::numbers::sqrt3 / 2.0;
  Polyline a(2, 2), b(2, 2), c(2, 2);
  a << 0, 0, 1, 0;
  b << 1, 0, 0.5, h;
  c << 0.5, h, 0, 0;
  return build_graph({a, b, c}, m);
}

DiscreteMeasureSpace space_value(const std::string& spec) {
  const auto [name, args] = head_tail(spec);
  const std::string field = "space";
  if (name == "interval") {
    const auto v = numbers(args, field + " interval:a,b,n", 3);
    return build_interval(v[0], v[1], count(v[2], field + " interval n"));
  }
  if (name == "box") {
    const auto v = numbers(args, field + " box:lo..,hi..,n..", 0);
    require(!v.empty() && v.size() % 3 == 0, ErrorKind::invalid_argument,
            "space box: expected 3*dim values lo..., hi..., n...");
    const std::size_t dim = v.size() / 3;
    std::vector<double> lo(v.begin(), v.begin() + dim), hi(v.begin() + dim, v.begin() + 2 * dim);
    std::vector<std::size_t> n;
    for (std::size_t d = 0; d < dim; ++d) n.push_back(count(v[2 * dim + d], field + " box n"));
    return build_box(lo, hi, n);
  }
  if (name == "triangle") return triangle_space(count(numbers(args, field + " triangle:m", 1)[0], "space triangle m"));
  if (name == "circle") return circle_space(count(numbers(args, field + " circle:n", 1)[0], "space circle n"));
  if (name == "sierpinski")
    return build_sierpinski(count(numbers(args, field + " sierpinski:level", 1)[0], "space sierpinski level"));
  if (name == "multi") {
    std::vector<DiscreteMeasureSpace> parts;
    for (const auto& part : split(args, '+')) parts.push_back(space_value(part));
    return build_multistructure(parts);
  }
  require(std::filesystem::exists(spec), ErrorKind::invalid_argument,
          "space: '" + spec + "' is neither a builtin spec nor an existing file");
  return io::load_space(spec);
}

Eigen::VectorXd vector_file(const std::string& path, std::size_t n, const std::string& field) {
  const auto doc = io::read_json(path);
  require(doc.is_array(), ErrorKind::invalid_argument, field + ": file must hold a JSON array");
  std::vector<double> values;
  try {
    values = doc.get<std::vector<double>>();
  } catch (const nlohmann::json::exception&) {
    fail(ErrorKind::invalid_argument, field + ": file must hold numbers");
  }
  require(values.size() == n, ErrorKind::invalid_argument,
          field + ": expected " + std::to_string(n) + " values, got " + std::to_string(values.size()));
  return Eigen::Map<const Eigen::VectorXd>(values.data(), Eigen::Index(n));
}

KernelFlags flags_from(const std::optional<nlohmann::json>& doc, KernelFlags flags) {
  if (!doc) return flags;
  require(doc->is_object(), ErrorKind::invalid_argument, "kernel_flags: expected an object");
  for (const auto& [key, value] : doc->items()) {
    if (key == "symmetric" && value.is_boolean())
      flags.symmetric = value.get<bool>();
    else if (key == "nonnegative" && value.is_boolean())
      flags.nonnegative = value.get<bool>();
    else if (key == "radius" && (value.is_number() || value.is_null()))
      flags.support_radius = value.is_null() ? std::nullopt : std::optional<double>(value.get<double>());
    else
      fail(ErrorKind::invalid_argument, "kernel_flags." + key + ": unknown field or wrong type");
  }
  return flags;
}

}  // namespace

std::shared_ptr<const DiscreteMeasureSpace> parse_space(const std::string& spec) {
  return std::make_shared<const DiscreteMeasureSpace>(space_value(spec));
}

KernelSpec parse_kernel(const std::string& spec, const DiscreteMeasureSpace& space,
                        const std::optional<nlohmann::json>& flags) {
  const auto [name, args] = head_tail(spec);
  KernelSpec out;
  if (name == "gaussian_truncated") {
    const auto v = numbers(args, "kernel gaussian_truncated:c,sigma,R", 3);
    out = KernelSpec::gaussian_truncated(v[0], v[1], v[2]);
  } else if (name == "truncated_uniform") {
    const auto v = numbers(args, "kernel truncated_uniform:c,R", 2);
    out = KernelSpec::truncated_uniform(v[0], v[1]);
  } else if (name == "counterexample") {
    out = KernelSpec::counterexample(numbers(args, "kernel counterexample:R", 1)[0]);
  } else if (name == "separable") {
    const auto n = space.size();
    if (args == "ones") {
      out = KernelSpec::separable(Eigen::VectorXd::Ones(Eigen::Index(n)), Eigen::VectorXd::Ones(Eigen::Index(n)));
    } else {
      const auto doc = io::read_json(args);
      require(doc.is_object() && doc.contains("f"), ErrorKind::invalid_argument,
              "kernel separable: file needs fields 'f' and optionally 'g'");
      const auto to_vec = [&](const nlohmann::json& a, const std::string& f) {
        std::vector<double> v;
        try {
          v = a.get<std::vector<double>>();
        } catch (const nlohmann::json::exception&) {
          fail(ErrorKind::invalid_argument, "kernel separable." + f + ": expected an array of numbers");
        }
        require(v.size() == n, ErrorKind::invalid_argument,
                "kernel separable." + f + ": expected " + std::to_string(n) + " values");
        return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(v.data(), Eigen::Index(n)));
      };
      const Eigen::VectorXd f = to_vec(doc["f"], "f");
      out = KernelSpec::separable(f, doc.contains("g") ? to_vec(doc["g"], "g") : f);
    }
  } else if (name == "convolution") {
    const auto parts = split(args, ',');
    require(parts.size() == 2 || (parts.size() == 3 && parts[2] == "geodesic"), ErrorKind::invalid_argument,
            "kernel convolution: expected gauss,sigma[,geodesic] or exp,a[,geodesic]");
    const double p = number(parts[1], "kernel convolution parameter");
    require(p > 0.0 && std::isfinite(p), ErrorKind::invalid_argument, "kernel convolution parameter must be positive");
    const bool geodesic = parts.size() == 3;
    if (parts[0] == "gauss")
      out = KernelSpec::convolution([p](double r) { return std::exp(-r * r / (p * p)); }, "gauss", {}, geodesic);
    else if (parts[0] == "exp")
      out = KernelSpec::convolution([p](double r) { return std::exp(-p * r); }, "exp", {}, geodesic);
    else
      fail(ErrorKind::invalid_argument, "kernel convolution: unknown profile '" + parts[0] + "'");
  } else if (name == "matrix") {
    out = KernelSpec::explicit_matrix(io::load_kernel_values(args), {true, true, std::nullopt});
  } else {
    fail(ErrorKind::invalid_argument, "kernel: unknown family '" + name + "'");
  }
  out.flags = flags_from(flags, out.flags);
  return out;
}

HMode parse_h(const std::string& spec, const KernelMatrix& kernel) {
  const auto [name, args] = head_tail(spec);
  if (spec == "h0") return HMode::row_mass();
  if (spec == "zero") return HMode::zero();
  if (name == "const") return HMode::constant(numbers(args, "h const:a", 1)[0]);
  if (spec == "x") return HMode::from_values(kernel.space->coords().col(0));
  if (spec.rfind("lambda1", 0) == 0) {
    const std::string rest = spec.substr(7);
    const double offset = rest.empty() ? 0.0 : number(rest.front() == '+' ? rest.substr(1) : rest, "h lambda1+a");
    const auto es = eig_full(assemble(kernel, HMode::zero()));
    return HMode::constant(es.lambda1 + offset);
  }
  if (name == "file") return HMode::from_values(vector_file(args, kernel.size(), "h file"));
  fail(ErrorKind::invalid_argument, "h: unknown mode '" + spec + "'");
}

Eigen::VectorXd parse_initial(const std::string& spec, const DiscreteMeasureSpace& space,
                              std::uint64_t seed) {
  const auto [name, args] = head_tail(spec);
  const auto n = Eigen::Index(space.size());
  const Eigen::VectorXd x = space.coords().col(0);
  if (name == "indicator") {
    const auto v = numbers(args, "u0 indicator:a,b", 2);
    return (x.array() >= v[0] && x.array() <= v[1]).cast<double>().matrix();
  }
  if (spec == "ones") return Eigen::VectorXd::Ones(n);
  if (name == "const") return Eigen::VectorXd::Constant(n, numbers(args, "u0 const:c", 1)[0]);
  if (name == "cos") {
    const double k = numbers(args, "u0 cos:k", 1)[0];
    const double lo = x.minCoeff(), span = std::max(x.maxCoeff() - lo, 1e-300);
    return (k * std::numbers::pi * (x.array() - lo) / span).cos().matrix();
  }
  if (name == "delta") {
    const auto i = count(numbers(args, "u0 delta:i", 1)[0], "u0 delta index");
    require(i < space.size(), ErrorKind::invalid_argument, "u0 delta: index out of range");
    Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
    u(Eigen::Index(i)) = 1.0;
    return u;
  }
  if (spec == "random" || spec == "random-positive") {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Eigen::VectorXd u(n);
    for (auto& value : u) value = normal(rng);
    return spec == "random" ? u : Eigen::VectorXd(u.cwiseAbs());
  }
  if (name == "file") return vector_file(args, space.size(), "u0 file");
  fail(ErrorKind::invalid_argument, "u0: unknown initial data '" + spec + "'");
}

Problem build_problem(const ExperimentConfig& config) {
  auto space = parse_space(config.space);
  auto kernel = evaluate(parse_kernel(config.kernel, *space, config.kernel_flags), space);
  const HMode mode = parse_h(config.h, kernel);
  return {space, assemble(std::move(kernel), mode)};
}

}  // namespace nld::app
