#pragma once

// Single-threaded reference versions of dense_kernels.hpp. Kept for tests
// (bitwise agreement with the OpenMP paths) and for the benchmarks.

#include "nld/parallel/dense_kernels.hpp"

namespace nld::serial {

Eigen::MatrixXd euclidean_distances(const Eigen::MatrixXd& coords);

Eigen::MatrixXd graph_distances(const WeightedGraph& graph,
                                std::span<const std::size_t> sources,
                                std::span<const std::size_t> targets);

template <class F>
Eigen::MatrixXd tabulate(std::size_t n, F&& f) {
  Eigen::MatrixXd out(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out(i, j) = f(i, j);
  return out;
}

Eigen::VectorXd weighted_row_sums(const Eigen::MatrixXd& a, const Eigen::VectorXd& w);

Eigen::VectorXd matvec(const Eigen::MatrixXd& a, const Eigen::VectorXd& u);

std::vector<std::size_t> hop_eccentricities(const Eigen::MatrixXd& dist, double radius);

double dirichlet_form(const Eigen::MatrixXd& kernel, const Eigen::VectorXd& w,
                      const Eigen::VectorXd& u);

/// Single-source shortest paths; shared by both graph_distances versions.
std::vector<double> dijkstra(const WeightedGraph& graph, std::size_t source);

/// BFS hop distances over {dist(i, j) < radius}; `unreachable` where no path.
std::vector<std::size_t> hop_distances(const Eigen::MatrixXd& dist, double radius,
                                       std::size_t source);

}  // namespace nld::serial
