#include "nld/space.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "nld/errors.hpp"
#include "nld/parallel/dense_kernels.hpp"
#include "nld/parallel/serial_kernels.hpp"

namespace nld {

namespace {

constexpr double vertex_snap = 1e-9;

bool all_finite(std::span<const double> xs) {
  return std::all_of(xs.begin(), xs.end(), [](double x) { return std::isfinite(x); });
}

// Cell centers of a midpoint tensor grid, first dimension slowest.
struct MidpointGrid {
  Eigen::MatrixXd centers;
  double cell_volume = 1.0;
  UniformGrid grid;
};

MidpointGrid midpoint_grid(std::span<const double> lo, std::span<const double> hi,
                           std::span<const std::size_t> n_per_dim) {
  require(!lo.empty() && lo.size() == hi.size() && lo.size() == n_per_dim.size(),
          ErrorKind::invalid_argument, "box bounds and counts must have equal, nonzero length");
  require(all_finite(lo) && all_finite(hi), ErrorKind::invalid_argument,
          "box bounds must be finite");
  const std::size_t dim = lo.size();
  MidpointGrid out;
  out.grid.lo.assign(lo.begin(), lo.end());
  out.grid.counts.assign(n_per_dim.begin(), n_per_dim.end());
  std::size_t total = 1;
  for (std::size_t d = 0; d < dim; ++d) {
    require(lo[d] < hi[d], ErrorKind::invalid_argument, "box requires lo < hi in every dimension");
    require(n_per_dim[d] >= 1, ErrorKind::invalid_argument, "box requires at least one cell per dimension");
    const double h = (hi[d] - lo[d]) / static_cast<double>(n_per_dim[d]);
    out.grid.spacing.push_back(h);
    out.cell_volume *= h;
    total *= n_per_dim[d];
  }
  out.centers.resize(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(dim));
  for (std::size_t node = 0; node < total; ++node) {
    const auto idx = out.grid.index_of(node);
    for (std::size_t d = 0; d < dim; ++d)
      out.centers(node, d) = lo[d] + (static_cast<double>(idx[d]) + 0.5) * out.grid.spacing[d];
  }
  return out;
}

// Symmetrize a shortest-path matrix by copying the upper triangle; Dijkstra
// from i and from j can differ in the last bit.
void mirror_upper(Eigen::MatrixXd& dist) {
  for (Eigen::Index i = 0; i < dist.rows(); ++i) {
    dist(i, i) = 0.0;
    for (Eigen::Index j = i + 1; j < dist.cols(); ++j) dist(j, i) = dist(i, j);
  }
}

struct DisjointSets {
  std::vector<std::size_t> parent;
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

}  // namespace

std::vector<std::size_t> UniformGrid::index_of(std::size_t node) const {
  std::vector<std::size_t> idx(counts.size());
  for (std::size_t d = counts.size(); d-- > 0;) {
    idx[d] = node % counts[d];
    node /= counts[d];
  }
  return idx;
}

DiscreteMeasureSpace::DiscreteMeasureSpace(Eigen::MatrixXd coords, std::vector<int> components,
                                           Eigen::VectorXd weights, Eigen::MatrixXd dist,
                                           BuilderRecord builder, std::optional<UniformGrid> grid)
    : coords_(std::move(coords)),
      components_(std::move(components)),
      weights_(std::move(weights)),
      dist_(std::move(dist)),
      builder_(std::move(builder)),
      grid_(std::move(grid)) {
  const auto n = weights_.size();
  require(n >= 1, ErrorKind::invalid_argument, "a space needs at least one node");
  require(coords_.rows() == n && coords_.cols() >= 1, ErrorKind::invalid_argument,
          "coordinate matrix must have one row per node and at least one column");
  require(static_cast<Eigen::Index>(components_.size()) == n, ErrorKind::invalid_argument,
          "one component label per node is required");
  require(dist_.rows() == n && dist_.cols() == n, ErrorKind::invalid_argument,
          "distance matrix must be n x n");
  require(coords_.allFinite(), ErrorKind::invalid_argument, "node coordinates must be finite");
  for (Eigen::Index i = 0; i < n; ++i) {
    require(std::isfinite(weights_(i)) && weights_(i) > 0.0, ErrorKind::invalid_argument,
            "weight " + std::to_string(i) + " must be finite and positive");
    require(dist_(i, i) == 0.0, ErrorKind::invalid_argument, "distance matrix diagonal must be zero");
    for (Eigen::Index j = 0; j < i; ++j) {
      const double d = dist_(i, j);
      require(std::isfinite(d) && d >= 0.0 && d == dist_(j, i), ErrorKind::invalid_argument,
              "distance (" + std::to_string(i) + ", " + std::to_string(j) +
                  ") must be finite, nonnegative and symmetric");
    }
  }
  total_measure_ = weights_.sum();
}

double DiscreteMeasureSpace::max_nearest_neighbor_spacing() const {
  const auto n = dist_.rows();
  double worst = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double nearest = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < n; ++j)
      if (j != i) nearest = std::min(nearest, dist_(i, j));
    if (n > 1) worst = std::max(worst, nearest);
  }
  return worst;
}

double metric_defect(const Eigen::MatrixXd& dist) {
  const auto n = dist.rows();
  double worst = 0.0;
#pragma omp parallel for reduction(max : worst) schedule(dynamic, 8)
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index k = 0; k < n; ++k)
        worst = std::max(worst, dist(i, k) - dist(i, j) - dist(j, k));
  return worst;
}

bool SupportSet::contains(std::size_t i) const {
  return std::binary_search(indices.begin(), indices.end(), i);
}

bool SupportSet::includes(const SupportSet& other) const {
  return std::includes(indices.begin(), indices.end(), other.indices.begin(), other.indices.end());
}

SupportSet all_nodes(std::size_t n) {
  SupportSet s;
  s.indices.resize(n);
  std::iota(s.indices.begin(), s.indices.end(), 0);
  return s;
}

DiscreteMeasureSpace build_interval(double a, double b, std::size_t n) {
  require(std::isfinite(a) && std::isfinite(b), ErrorKind::invalid_argument,
          "interval bounds must be finite");
  require(a < b, ErrorKind::invalid_argument, "interval requires a < b");
  require(n >= 1, ErrorKind::invalid_argument, "interval requires n >= 1");
  const double lo[] = {a};
  const double hi[] = {b};
  const std::size_t counts[] = {n};
  auto grid = midpoint_grid(lo, hi, counts);
  Eigen::VectorXd weights = Eigen::VectorXd::Constant(n, grid.cell_volume);
  auto dist = parallel::euclidean_distances(grid.centers);
  return {std::move(grid.centers), std::vector<int>(n, 0), std::move(weights), std::move(dist),
          BuilderRecord{"interval", {a, b, double(n)}}, std::move(grid.grid)};
}

DiscreteMeasureSpace build_box(std::span<const double> lo, std::span<const double> hi,
                               std::span<const std::size_t> n_per_dim) {
  auto grid = midpoint_grid(lo, hi, n_per_dim);
  const auto n = static_cast<std::size_t>(grid.centers.rows());
  Eigen::VectorXd weights = Eigen::VectorXd::Constant(n, grid.cell_volume);
  auto dist = parallel::euclidean_distances(grid.centers);
  BuilderRecord record{"box", {}};
  record.params.insert(record.params.end(), lo.begin(), lo.end());
  record.params.insert(record.params.end(), hi.begin(), hi.end());
  for (auto c : n_per_dim) record.params.push_back(double(c));
  return {std::move(grid.centers), std::vector<int>(n, 0), std::move(weights), std::move(dist),
          std::move(record), std::move(grid.grid)};
}

DiscreteMeasureSpace build_graph(const std::vector<Polyline>& edges, std::size_t m_per_edge) {
  require(!edges.empty(), ErrorKind::invalid_argument, "graph needs at least one edge");
  require(m_per_edge >= 1, ErrorKind::invalid_argument, "graph needs m_per_edge >= 1");
  const auto dim = edges.front().cols();
  for (const auto& e : edges) {
    require(e.rows() >= 2, ErrorKind::invalid_argument, "each polyline needs at least two vertices");
    require(e.cols() == dim && dim >= 1, ErrorKind::invalid_argument,
            "all polylines must share one ambient dimension");
    require(e.allFinite(), ErrorKind::invalid_argument, "polyline vertices must be finite");
  }

  // Identify endpoints.
  std::vector<Eigen::VectorXd> vertices;
  auto vertex_id = [&](const Eigen::VectorXd& p) {
    for (std::size_t v = 0; v < vertices.size(); ++v)
      if ((vertices[v] - p).norm() < vertex_snap) return v;
    vertices.push_back(p);
    return vertices.size() - 1;
  };
  std::vector<std::pair<std::size_t, std::size_t>> ends;
  for (const auto& e : edges) {
    const auto a = vertex_id(e.row(0).transpose());
    const auto b = vertex_id(e.row(e.rows() - 1).transpose());
    ends.emplace_back(a, b);
  }
  DisjointSets incidence(vertices.size());
  for (auto [a, b] : ends) incidence.unite(a, b);
  for (std::size_t v = 1; v < vertices.size(); ++v)
    require(incidence.find(v) == incidence.find(0), ErrorKind::domain_error,
            "graph is disconnected; geodesic distance is undefined between components");

  const std::size_t nv = vertices.size();
  const std::size_t m = m_per_edge;
  const std::size_t nq = edges.size() * m;
  WeightedGraph fine(nv + nq);
  Eigen::MatrixXd coords(static_cast<Eigen::Index>(nq), dim);
  Eigen::VectorXd weights(static_cast<Eigen::Index>(nq));

  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto& poly = edges[e];
    std::vector<double> cumulative{0.0};
    for (Eigen::Index k = 1; k < poly.rows(); ++k)
      cumulative.push_back(cumulative.back() + (poly.row(k) - poly.row(k - 1)).norm());
    const double length = cumulative.back();
    require(length > 0.0, ErrorKind::invalid_argument, "edge " + std::to_string(e) + " has zero length");
    const double step = length / static_cast<double>(m);

    Eigen::Index segment = 1;
    for (std::size_t k = 0; k < m; ++k) {
      const double s = (static_cast<double>(k) + 0.5) * step;
      while (segment + 1 < poly.rows() && cumulative[segment] < s) ++segment;
      const double seg_len = cumulative[segment] - cumulative[segment - 1];
      const double theta = seg_len > 0.0 ? (s - cumulative[segment - 1]) / seg_len : 0.0;
      const std::size_t q = e * m + k;
      coords.row(q) = (1.0 - theta) * poly.row(segment - 1) + theta * poly.row(segment);
      weights(q) = step;
      if (k > 0) fine.add_edge(nv + q - 1, nv + q, step);
    }
    fine.add_edge(ends[e].first, nv + e * m, 0.5 * step);
    fine.add_edge(nv + e * m + m - 1, ends[e].second, 0.5 * step);
  }

  std::vector<std::size_t> quad(nq);
  std::iota(quad.begin(), quad.end(), nv);
  Eigen::MatrixXd dist = parallel::graph_distances(fine, quad, quad);
  mirror_upper(dist);
  return {std::move(coords), std::vector<int>(nq, 0), std::move(weights), std::move(dist),
          BuilderRecord{"graph", {double(edges.size()), double(m)}}};
}

DiscreteMeasureSpace build_manifold_chart(std::span<const double> lo, std::span<const double> hi,
                                          std::span<const std::size_t> n_per_dim,
                                          const ChartMap& phi, const ChartDensity& sqrt_g) {
  auto grid = midpoint_grid(lo, hi, n_per_dim);
  const auto n = grid.centers.rows();
  Eigen::MatrixXd coords;
  Eigen::VectorXd weights(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd u = grid.centers.row(i).transpose();
    const Eigen::VectorXd x = phi(u);
    if (i == 0) coords.resize(n, x.size());
    require(x.size() == coords.cols() && x.size() >= 1 && x.allFinite(), ErrorKind::invalid_argument,
            "chart map must return finite points of one fixed dimension");
    coords.row(i) = x.transpose();
    const double g = sqrt_g(u);
    require(std::isfinite(g) && g > 0.0, ErrorKind::invalid_argument,
            "sqrt_g must be finite and positive at every node");
    weights(i) = grid.cell_volume * g;
  }
  auto dist = parallel::euclidean_distances(coords);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < i; ++j)
      require(dist(i, j) > 1e-12, ErrorKind::invalid_argument,
              "chart map is not injective on grid nodes " + std::to_string(j) + " and " +
                  std::to_string(i));
  BuilderRecord record{"manifold_chart", {}};
  for (auto c : n_per_dim) record.params.push_back(double(c));
  return {std::move(coords), std::vector<int>(n, 0), std::move(weights), std::move(dist),
          std::move(record)};
}

DiscreteMeasureSpace build_multistructure(const std::vector<DiscreteMeasureSpace>& parts) {
  require(!parts.empty(), ErrorKind::invalid_argument, "multi-structure needs at least one part");
  const auto dim = parts.front().ambient_dim();
  Eigen::Index n = 0;
  for (const auto& p : parts) {
    require(p.ambient_dim() == dim, ErrorKind::invalid_argument,
            "multi-structure parts must share one ambient dimension");
    n += static_cast<Eigen::Index>(p.size());
  }
  Eigen::MatrixXd coords(n, static_cast<Eigen::Index>(dim));
  Eigen::VectorXd weights(n);
  std::vector<int> components;
  components.reserve(n);
  Eigen::Index row = 0;
  int label_offset = 0;
  for (const auto& p : parts) {
    const auto k = static_cast<Eigen::Index>(p.size());
    coords.middleRows(row, k) = p.coords();
    weights.segment(row, k) = p.weights();
    int max_label = 0;
    for (int c : p.components()) {
      components.push_back(label_offset + c);
      max_label = std::max(max_label, c);
    }
    label_offset += max_label + 1;
    row += k;
  }
  auto dist = parallel::euclidean_distances(coords);
  return {std::move(coords), std::move(components), std::move(weights), std::move(dist),
          BuilderRecord{"multistructure", {double(parts.size())}}};
}

DiscreteMeasureSpace build_sierpinski(std::size_t level) {
  require(level <= max_sierpinski_level, ErrorKind::resource_limit,
          "Sierpinski level " + std::to_string(level) + " exceeds the dense-matrix budget (max " +
              std::to_string(max_sierpinski_level) + ")");
  const std::size_t side = std::size_t{1} << level;  // lattice units per outer side
  const double h = 1.0 / static_cast<double>(side);
  const double cell_mass = std::pow(3.0, -static_cast<double>(level));

  // Cells as lower-left lattice corners (i, j) with unit size after `level`
  // subdivisions; corners are (i, j), (i+1, j), (i, j+1).
  std::vector<std::pair<std::size_t, std::size_t>> cells{{0, 0}};
  for (std::size_t s = side; s > 1; s /= 2) {
    std::vector<std::pair<std::size_t, std::size_t>> next;
    next.reserve(cells.size() * 3);
    const std::size_t half = s / 2;
    for (auto [i, j] : cells) {
      next.emplace_back(i, j);
      next.emplace_back(i + half, j);
      next.emplace_back(i, j + half);
    }
    cells = std::move(next);
  }

  const std::size_t stride = side + 1;
  std::vector<double> mass(stride * stride, 0.0);
  for (auto [i, j] : cells) {
    mass[j * stride + i] += cell_mass / 3.0;
    mass[j * stride + i + 1] += cell_mass / 3.0;
    mass[(j + 1) * stride + i] += cell_mass / 3.0;
  }
  std::vector<std::size_t> id(stride * stride, unreachable);
  std::vector<std::pair<std::size_t, std::size_t>> lattice;
  for (std::size_t j = 0; j <= side; ++j)
    for (std::size_t i = 0; i + j <= side; ++i)
      if (mass[j * stride + i] > 0.0) {
        id[j * stride + i] = lattice.size();
        lattice.emplace_back(i, j);
      }

  const auto n = static_cast<Eigen::Index>(lattice.size());
  Eigen::MatrixXd coords(n, 2);
  Eigen::VectorXd weights(n);
  const double height = std::numbers::sqrt3 / 2.0;
  for (Eigen::Index v = 0; v < n; ++v) {
    const auto [i, j] = lattice[v];
    coords(v, 0) = (static_cast<double>(i) + 0.5 * static_cast<double>(j)) * h;
    coords(v, 1) = static_cast<double>(j) * height * h;
    weights(v) = mass[j * stride + i];
  }

  WeightedGraph graph(lattice.size());
  for (auto [i, j] : cells) {
    const auto a = id[j * stride + i];
    const auto b = id[j * stride + i + 1];
    const auto c = id[(j + 1) * stride + i];
    graph.add_edge(a, b, h);
    graph.add_edge(b, c, h);
    graph.add_edge(c, a, h);
  }
  std::vector<std::size_t> all(lattice.size());
  std::iota(all.begin(), all.end(), 0);
  Eigen::MatrixXd dist = parallel::graph_distances(graph, all, all);
  mirror_upper(dist);
  return {std::move(coords), std::vector<int>(n, 0), std::move(weights), std::move(dist),
          BuilderRecord{"sierpinski", {double(level)}}};
}

RConnectivity is_R_connected(const DiscreteMeasureSpace& space, double radius) {
  require(std::isfinite(radius) && radius > 0.0, ErrorKind::invalid_argument,
          "R must be a positive finite real");
  // One BFS settles the common disconnected case before the all-sources pass.
  for (std::size_t h : serial::hop_distances(space.dist(), radius, 0))
    if (h == unreachable) return {false, std::nullopt};
  const auto ecc = parallel::hop_eccentricities(space.dist(), radius);
  return {true, *std::max_element(ecc.begin(), ecc.end())};
}

SupportSet expand_support(const DiscreteMeasureSpace& space, const SupportSet& seed,
                          double radius, std::size_t steps) {
  require(!seed.empty(), ErrorKind::invalid_argument,
          "cannot dilate an empty support (the zero function has no support)");
  require(std::isfinite(radius) && radius > 0.0, ErrorKind::invalid_argument,
          "R must be a positive finite real");
  const std::size_t n = space.size();
  const auto& dist = space.dist();
  std::vector<char> member(n, 0);
  for (auto i : seed.indices) {
    require(i < n, ErrorKind::invalid_argument, "support index out of range");
    member[i] = 1;
  }
  std::vector<std::size_t> current = seed.indices;
  for (std::size_t step = 0; step < steps && current.size() < n; ++step) {
    std::vector<char> next = member;
    for (std::size_t i = 0; i < n; ++i) {
      if (member[i]) continue;
      for (auto j : current)
        if (dist(i, j) < radius) {
          next[i] = 1;
          break;
        }
    }
    if (next == member) break;
    member = std::move(next);
    current.clear();
    for (std::size_t i = 0; i < n; ++i)
      if (member[i]) current.push_back(i);
  }
  return {std::move(current), seed.threshold};
}

SupportSet boundary_layer(const DiscreteMeasureSpace& space, const SupportSet& set, double cell) {
  SupportSet out{{}, set.threshold};
  const std::size_t n = space.size();
  for (auto i : set.indices)
    for (std::size_t k = 0; k < n; ++k)
      if (!set.contains(k) && space.dist()(i, k) <= cell) {
        out.indices.push_back(i);
        break;
      }
  return out;
}

}  // namespace nld
