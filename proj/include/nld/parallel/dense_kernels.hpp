#pragma once

// Data-parallel building blocks shared by every module. Each routine here has
// a serial twin in serial_kernels.hpp with the same signature; the parallel
// versions only partition outer loops (rows, sources, quadrature nodes) and
// keep the per-item summation order, so results are bitwise identical to the
// serial reference regardless of thread count.

#include <cstddef>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace nld {

/// Undirected weighted graph as adjacency lists of (neighbor, edge length).
struct WeightedGraph {
  std::vector<std::vector<std::pair<std::size_t, double>>> adjacency;

  explicit WeightedGraph(std::size_t n = 0) : adjacency(n) {}
  std::size_t size() const { return adjacency.size(); }
  void add_edge(std::size_t a, std::size_t b, double length) {
    adjacency[a].emplace_back(b, length);
    adjacency[b].emplace_back(a, length);
  }
};

inline constexpr std::size_t unreachable = std::numeric_limits<std::size_t>::max();

namespace parallel {

/// Pairwise Euclidean distances between the rows of `coords` (n x N).
Eigen::MatrixXd euclidean_distances(const Eigen::MatrixXd& coords);

/// Shortest-path lengths from each of `sources` to each of `targets`
/// (Dijkstra per source). Result is |sources| x |targets|; unreachable
/// entries are +inf.
Eigen::MatrixXd graph_distances(const WeightedGraph& graph,
                                std::span<const std::size_t> sources,
                                std::span<const std::size_t> targets);

/// out(i, j) = f(i, j) for an n x n table.
template <class F>
Eigen::MatrixXd tabulate(std::size_t n, F&& f) {
  Eigen::MatrixXd out(n, n);
  const auto sn = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < sn; ++i)
    for (std::ptrdiff_t j = 0; j < sn; ++j) out(i, j) = f(std::size_t(i), std::size_t(j));
  return out;
}

/// sum_j a(i, j) * w(j), accumulated left to right per row.
Eigen::VectorXd weighted_row_sums(const Eigen::MatrixXd& a, const Eigen::VectorXd& w);

/// a * u, accumulated left to right per row.
Eigen::VectorXd matvec(const Eigen::MatrixXd& a, const Eigen::VectorXd& u);

/// Hop eccentricity of every node in the graph {(i, j) : dist(i, j) < radius}.
/// A node that cannot reach every other node gets `unreachable`.
std::vector<std::size_t> hop_eccentricities(const Eigen::MatrixXd& dist, double radius);

/// sum_i sum_j w_i w_j J_ij (u_j - u_i)^2 with per-row partial sums reduced in
/// row order.
double dirichlet_form(const Eigen::MatrixXd& kernel, const Eigen::VectorXd& w,
                      const Eigen::VectorXd& u);

}  // namespace parallel
}  // namespace nld
