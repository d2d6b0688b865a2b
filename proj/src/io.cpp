#include "nld/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "nld/errors.hpp"
#include "nld/parallel/dense_kernels.hpp"

namespace nld::io {

using nlohmann::json;

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  // Shortest round-trip digits come from scientific to_chars; plain to_chars
  // prints large integral values exactly, which is not shortest.
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::scientific);
  const std::string sci(buf, result.ptr);
  const auto e_pos = sci.find('e');
  const int exponent = std::stoi(sci.substr(e_pos + 1));
  if (exponent < -5 || exponent > 15) return sci;
  std::string sign, digits;
  for (char c : sci.substr(0, e_pos)) {
    if (c == '-') sign = "-";
    else if (c != '.') digits += c;
  }
  if (exponent < 0) return sign + "0." + std::string(std::size_t(-exponent - 1), '0') + digits;
  const auto int_len = std::size_t(exponent) + 1;
  if (digits.size() <= int_len) return sign + digits + std::string(int_len - digits.size(), '0');
  return sign + digits.substr(0, int_len) + "." + digits.substr(int_len);
}

json space_to_json(const DiscreteMeasureSpace& space, bool include_dist) {
  const std::size_t n = space.size();
  json doc;
  doc["ambient_dim"] = space.ambient_dim();
  json nodes = json::array();
  for (std::size_t i = 0; i < n; ++i) {
    json row = json::array();
    for (std::size_t d = 0; d < space.ambient_dim(); ++d) row.push_back(space.coords()(i, d));
    nodes.push_back(std::move(row));
  }
  doc["nodes"] = std::move(nodes);
  doc["weights"] = std::vector<double>(space.weights().begin(), space.weights().end());
  doc["components"] = space.components();
  if (include_dist) {
    std::vector<double> flat;
    flat.reserve(n * n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) flat.push_back(space.dist()(i, j));
    doc["dist"] = std::move(flat);
  }
  doc["builder"] = {{"name", space.builder().name}, {"params", space.builder().params}};
  if (const auto& grid = space.grid())
    doc["grid"] = {{"lo", grid->lo}, {"spacing", grid->spacing}, {"counts", grid->counts}};
  return doc;
}

DiscreteMeasureSpace space_from_json(const json& doc) {
  try {
    const auto dim = doc.at("ambient_dim").get<std::size_t>();
    const auto& nodes = doc.at("nodes");
    const auto weights_in = doc.at("weights").get<std::vector<double>>();
    const std::size_t n = nodes.size();
    require(dim >= 1, ErrorKind::invalid_argument, "field 'ambient_dim' must be >= 1");
    require(weights_in.size() == n, ErrorKind::invalid_argument,
            "field 'weights' must have one entry per node");

    Eigen::MatrixXd coords(n, dim);
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = nodes.at(i).get<std::vector<double>>();
      require(row.size() == dim, ErrorKind::invalid_argument,
              "field 'nodes' row " + std::to_string(i) + " has the wrong dimension");
      for (std::size_t d = 0; d < dim; ++d) coords(i, d) = row[d];
    }
    Eigen::VectorXd weights = Eigen::Map<const Eigen::VectorXd>(weights_in.data(), Eigen::Index(n));
    std::vector<int> components(n, 0);
    if (doc.contains("components")) components = doc.at("components").get<std::vector<int>>();

    BuilderRecord builder{"file", {}};
    if (doc.contains("builder")) {
      builder.name = doc["builder"].value("name", std::string("file"));
      if (doc["builder"].contains("params"))
        builder.params = doc["builder"]["params"].get<std::vector<double>>();
    }
    std::optional<UniformGrid> grid;
    if (doc.contains("grid")) {
      grid = UniformGrid{doc["grid"].at("lo").get<std::vector<double>>(),
                         doc["grid"].at("spacing").get<std::vector<double>>(),
                         doc["grid"].at("counts").get<std::vector<std::size_t>>()};
    }

    Eigen::MatrixXd dist;
    if (doc.contains("dist")) {
      const auto flat = doc.at("dist").get<std::vector<double>>();
      require(flat.size() == n * n, ErrorKind::invalid_argument, "field 'dist' must hold n*n entries");
      dist = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
          flat.data(), Eigen::Index(n), Eigen::Index(n));
    } else if (builder.name == "sierpinski" && builder.params.size() == 1) {
      return build_sierpinski(static_cast<std::size_t>(builder.params[0]));
    } else {
      require(builder.name != "graph", ErrorKind::invalid_argument,
              "field 'dist' is required for graph spaces (geodesic distances are not recomputable)");
      dist = parallel::euclidean_distances(coords);
    }
    return DiscreteMeasureSpace(std::move(coords), std::move(components), std::move(weights),
                                std::move(dist), std::move(builder), std::move(grid));
  } catch (const json::exception& e) {
    fail(ErrorKind::invalid_argument, std::string("malformed space file: ") + e.what());
  }
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::invalid_argument, "cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorKind::invalid_argument, "'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

void save_space(const std::filesystem::path& path, const DiscreteMeasureSpace& space, bool include_dist) {
  write_file_atomic(path, space_to_json(space, include_dist).dump() + "\n");
}

DiscreteMeasureSpace load_space(const std::filesystem::path& path) {
  return space_from_json(read_json(path));
}

Eigen::MatrixXd kernel_values_from_json(const json& doc) {
  const json& values = doc.is_object() ? doc.at("values") : doc;
  require(values.is_array() && !values.empty(), ErrorKind::invalid_argument,
          "kernel file must hold a nonempty array");
  try {
    if (values.front().is_array()) {
      const std::size_t n = values.size();
      Eigen::MatrixXd out(n, n);
      for (std::size_t i = 0; i < n; ++i) {
        const auto row = values[i].get<std::vector<double>>();
        require(row.size() == n, ErrorKind::invalid_argument, "kernel rows must form a square matrix");
        for (std::size_t j = 0; j < n; ++j) out(i, j) = row[j];
      }
      return out;
    }
    const auto flat = values.get<std::vector<double>>();
    const auto n = static_cast<std::size_t>(std::llround(std::sqrt(double(flat.size()))));
    require(n * n == flat.size(), ErrorKind::invalid_argument,
            "flat kernel array length " + std::to_string(flat.size()) + " is not a perfect square");
    return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        flat.data(), Eigen::Index(n), Eigen::Index(n));
  } catch (const json::exception& e) {
    fail(ErrorKind::invalid_argument, std::string("malformed kernel file: ") + e.what());
  }
}

Eigen::MatrixXd load_kernel_values(const std::filesystem::path& path) {
  return kernel_values_from_json(read_json(path));
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    require(out.good(), ErrorKind::invalid_argument, "cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    require(out.good(), ErrorKind::invalid_argument, "short write to '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace nld::io
