#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace nld {

/// Name and numeric parameters of the builder that produced a space.
struct BuilderRecord {
  std::string name;
  std::vector<double> params;
};

/// Tensor midpoint grid metadata, present for interval and box spaces. Used by
/// the convolution (Young) bound, which needs the difference lattice.
struct UniformGrid {
  std::vector<double> lo;
  std::vector<double> spacing;
  std::vector<std::size_t> counts;

  /// Integer lattice coordinates of a node, in the builder's row-major order.
  std::vector<std::size_t> index_of(std::size_t node) const;
};

/// Weighted point cloud standing in for a metric measure space: node
/// coordinates in ambient R^N, positive quadrature weights (the measure) and a
/// dense distance matrix (the metric). Immutable after construction.
class DiscreteMeasureSpace {
 public:
  /// Validates weights (finite, > 0), shapes, and that `dist` is finite,
  /// symmetric, nonnegative with zero diagonal. The triangle inequality is
  /// O(n^3) and is checked separately by `metric_defect`.
  DiscreteMeasureSpace(Eigen::MatrixXd coords, std::vector<int> components,
                       Eigen::VectorXd weights, Eigen::MatrixXd dist,
                       BuilderRecord builder, std::optional<UniformGrid> grid = std::nullopt);

  std::size_t size() const { return static_cast<std::size_t>(weights_.size()); }
  std::size_t ambient_dim() const { return static_cast<std::size_t>(coords_.cols()); }
  const Eigen::MatrixXd& coords() const { return coords_; }
  const std::vector<int>& components() const { return components_; }
  const Eigen::VectorXd& weights() const { return weights_; }
  const Eigen::MatrixXd& dist() const { return dist_; }
  double total_measure() const { return total_measure_; }
  const BuilderRecord& builder() const { return builder_; }
  const std::optional<UniformGrid>& grid() const { return grid_; }

  /// Largest distance from a node to its nearest other node (0 for n = 1).
  double max_nearest_neighbor_spacing() const;

 private:
  Eigen::MatrixXd coords_;
  std::vector<int> components_;
  Eigen::VectorXd weights_;
  Eigen::MatrixXd dist_;
  double total_measure_ = 0.0;
  BuilderRecord builder_;
  std::optional<UniformGrid> grid_;
};

/// Largest triangle-inequality excess max(d(i,k) - d(i,j) - d(j,k), 0).
double metric_defect(const Eigen::MatrixXd& dist);

/// Sorted node indices together with the threshold that produced them.
struct SupportSet {
  std::vector<std::size_t> indices;
  double threshold = 0.0;

  bool empty() const { return indices.empty(); }
  std::size_t size() const { return indices.size(); }
  bool contains(std::size_t i) const;
  /// True when every index of `other` is also in this set.
  bool includes(const SupportSet& other) const;
  friend bool operator==(const SupportSet& a, const SupportSet& b) {
    return a.indices == b.indices;
  }
};

SupportSet all_nodes(std::size_t n);

// -- builders ---------------------------------------------------------------

DiscreteMeasureSpace build_interval(double a, double b, std::size_t n);

DiscreteMeasureSpace build_box(std::span<const double> lo, std::span<const double> hi,
                               std::span<const std::size_t> n_per_dim);

/// A polyline edge: k >= 2 vertices (rows) in ambient R^N.
using Polyline = Eigen::MatrixXd;

/// Quadrature nodes along each edge at arclength midpoints, distances are
/// shortest paths along the edges. Endpoints closer than 1e-9 are identified.
DiscreteMeasureSpace build_graph(const std::vector<Polyline>& edges, std::size_t m_per_edge);

using ChartMap = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
using ChartDensity = std::function<double(const Eigen::VectorXd&)>;

/// Push a midpoint box grid of the parameter domain through a chart. Weights
/// are cell volume times sqrt(g) at the cell center; distances are ambient.
DiscreteMeasureSpace build_manifold_chart(std::span<const double> lo, std::span<const double> hi,
                                          std::span<const std::size_t> n_per_dim,
                                          const ChartMap& phi, const ChartDensity& sqrt_g);

/// Disjoint union with ambient Euclidean distance and per-part component labels.
DiscreteMeasureSpace build_multistructure(const std::vector<DiscreteMeasureSpace>& parts);

inline constexpr std::size_t max_sierpinski_level = 8;

/// Vertices of the level-`level` prefractal gasket with corners (0,0), (1,0),
/// (1/2, sqrt(3)/2). Each of the 3^level cells carries mass 3^-level split
/// evenly across its corners; distances are shortest paths along cell edges.
DiscreteMeasureSpace build_sierpinski(std::size_t level);

// -- R-chains -----------------------------------------------------------------

struct RConnectivity {
  bool connected = false;
  /// Hop diameter of the threshold graph when connected.
  std::optional<std::size_t> n0;
};

/// Connectivity of {(i, j) : d(i, j) < radius}.
RConnectivity is_R_connected(const DiscreteMeasureSpace& space, double radius);

/// `steps`-fold open-ball dilation S -> {i : exists j in S, d(i, j) < radius}.
SupportSet expand_support(const DiscreteMeasureSpace& space, const SupportSet& seed,
                          double radius, std::size_t steps);

/// Nodes of `set` with some node within `cell` of them that is outside `set`.
SupportSet boundary_layer(const DiscreteMeasureSpace& space, const SupportSet& set, double cell);

}  // namespace nld
