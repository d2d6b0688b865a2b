#pragma once

#include <filesystem>
#include <string>

#include <Eigen/Core>
#include <json.hpp>

#include "nld/space.hpp"

namespace nld::io {

/// Shortest decimal string that round-trips to the same double.
std::string format_double(double x);

/// Space file: {ambient_dim, nodes, weights, components, dist?, builder, grid?}.
/// `dist` is row-major and may be omitted; it is then recomputed (Euclidean,
/// or rebuilt for Sierpinski spaces). Graph spaces must carry `dist`.
nlohmann::json space_to_json(const DiscreteMeasureSpace& space, bool include_dist = true);
DiscreteMeasureSpace space_from_json(const nlohmann::json& doc);

void save_space(const std::filesystem::path& path, const DiscreteMeasureSpace& space,
                bool include_dist = true);
DiscreteMeasureSpace load_space(const std::filesystem::path& path);

/// Kernel sibling file: either a flat row-major array of n*n numbers, an
/// array of n rows, or an object {"values": <either form>}.
Eigen::MatrixXd kernel_values_from_json(const nlohmann::json& doc);
Eigen::MatrixXd load_kernel_values(const std::filesystem::path& path);

nlohmann::json read_json(const std::filesystem::path& path);

/// Write via a temporary sibling file and rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace nld::io
