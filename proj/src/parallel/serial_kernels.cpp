#include "nld/parallel/serial_kernels.hpp"

#include <cmath>
#include <deque>
#include <functional>
#include <queue>

namespace nld::serial {

Eigen::MatrixXd euclidean_distances(const Eigen::MatrixXd& coords) {
  const auto n = static_cast<std::size_t>(coords.rows());
  Eigen::MatrixXd out(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    out(i, i) = 0.0;
    for (std::size_t j = 0; j < i; ++j) {
      const double d = (coords.row(i) - coords.row(j)).norm();
      out(i, j) = d;
      out(j, i) = d;
    }
  }
  return out;
}

std::vector<double> dijkstra(const WeightedGraph& graph, std::size_t source) {
  std::vector<double> dist(graph.size(), std::numeric_limits<double>::infinity());
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  dist[source] = 0.0;
  queue.emplace(0.0, source);
  while (!queue.empty()) {
    const auto [d, v] = queue.top();
    queue.pop();
    if (d > dist[v]) continue;
    for (const auto& [next, len] : graph.adjacency[v]) {
      const double candidate = d + len;
      if (candidate < dist[next]) {
        dist[next] = candidate;
        queue.emplace(candidate, next);
      }
    }
  }
  return dist;
}

Eigen::MatrixXd graph_distances(const WeightedGraph& graph,
                                std::span<const std::size_t> sources,
                                std::span<const std::size_t> targets) {
  Eigen::MatrixXd out(sources.size(), targets.size());
  for (std::size_t s = 0; s < sources.size(); ++s) {
    const auto dist = dijkstra(graph, sources[s]);
    for (std::size_t t = 0; t < targets.size(); ++t) out(s, t) = dist[targets[t]];
  }
  return out;
}

Eigen::VectorXd weighted_row_sums(const Eigen::MatrixXd& a, const Eigen::VectorXd& w) {
  Eigen::VectorXd out(a.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < a.cols(); ++j) s += a(i, j) * w(j);
    out(i) = s;
  }
  return out;
}

Eigen::VectorXd matvec(const Eigen::MatrixXd& a, const Eigen::VectorXd& u) {
  return weighted_row_sums(a, u);
}

std::vector<std::size_t> hop_distances(const Eigen::MatrixXd& dist, double radius,
                                       std::size_t source) {
  const auto n = static_cast<std::size_t>(dist.rows());
  std::vector<std::size_t> hops(n, unreachable);
  std::deque<std::size_t> frontier{source};
  hops[source] = 0;
  while (!frontier.empty()) {
    const std::size_t v = frontier.front();
    frontier.pop_front();
    for (std::size_t j = 0; j < n; ++j) {
      if (hops[j] == unreachable && dist(v, j) < radius) {
        hops[j] = hops[v] + 1;
        frontier.push_back(j);
      }
    }
  }
  return hops;
}

std::vector<std::size_t> hop_eccentricities(const Eigen::MatrixXd& dist, double radius) {
  const auto n = static_cast<std::size_t>(dist.rows());
  std::vector<std::size_t> ecc(n, 0);
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t h : hop_distances(dist, radius, s)) {
      if (h == unreachable) {
        ecc[s] = unreachable;
        break;
      }
      ecc[s] = std::max(ecc[s], h);
    }
  }
  return ecc;
}

double dirichlet_form(const Eigen::MatrixXd& kernel, const Eigen::VectorXd& w,
                      const Eigen::VectorXd& u) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < kernel.rows(); ++i) {
    double row = 0.0;
    for (Eigen::Index j = 0; j < kernel.cols(); ++j) {
      const double diff = u(j) - u(i);
      row += w(j) * kernel(i, j) * diff * diff;
    }
    total += w(i) * row;
  }
  return total;
}

}  // namespace nld::serial
