#include "nld/parallel/dense_kernels.hpp"

#include <algorithm>

#include "nld/parallel/serial_kernels.hpp"

namespace nld::parallel {

Eigen::MatrixXd euclidean_distances(const Eigen::MatrixXd& coords) {
  const auto n = static_cast<std::ptrdiff_t>(coords.rows());
  Eigen::MatrixXd out(n, n);
  // Each (i, j) is computed as row(i) - row(j) with i > j, exactly as in the
  // serial loop, then mirrored.
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    out(i, i) = 0.0;
    for (std::ptrdiff_t j = 0; j < i; ++j) out(i, j) = (coords.row(i) - coords.row(j)).norm();
  }
  for (std::ptrdiff_t i = 0; i < n; ++i)
    for (std::ptrdiff_t j = 0; j < i; ++j) out(j, i) = out(i, j);
  return out;
}

Eigen::MatrixXd graph_distances(const WeightedGraph& graph,
                                std::span<const std::size_t> sources,
                                std::span<const std::size_t> targets) {
  Eigen::MatrixXd out(sources.size(), targets.size());
  const auto ns = static_cast<std::ptrdiff_t>(sources.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t s = 0; s < ns; ++s) {
    const auto dist = serial::dijkstra(graph, sources[s]);
    for (std::size_t t = 0; t < targets.size(); ++t) out(s, t) = dist[targets[t]];
  }
  return out;
}

Eigen::VectorXd weighted_row_sums(const Eigen::MatrixXd& a, const Eigen::VectorXd& w) {
  Eigen::VectorXd out(a.rows());
  const auto n = static_cast<std::ptrdiff_t>(a.rows());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < a.cols(); ++j) s += a(i, j) * w(j);
    out(i) = s;
  }
  return out;
}

Eigen::VectorXd matvec(const Eigen::MatrixXd& a, const Eigen::VectorXd& u) {
  return weighted_row_sums(a, u);
}

std::vector<std::size_t> hop_eccentricities(const Eigen::MatrixXd& dist, double radius) {
  const auto n = static_cast<std::ptrdiff_t>(dist.rows());
  std::vector<std::size_t> ecc(n, 0);
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t s = 0; s < n; ++s) {
    std::size_t e = 0;
    for (std::size_t h : serial::hop_distances(dist, radius, std::size_t(s))) {
      if (h == unreachable) {
        e = unreachable;
        break;
      }
      e = std::max(e, h);
    }
    ecc[s] = e;
  }
  return ecc;
}

double dirichlet_form(const Eigen::MatrixXd& kernel, const Eigen::VectorXd& w,
                      const Eigen::VectorXd& u) {
  const auto n = static_cast<std::ptrdiff_t>(kernel.rows());
  Eigen::VectorXd rows(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (Eigen::Index j = 0; j < kernel.cols(); ++j) {
      const double diff = u(j) - u(i);
      row += w(j) * kernel(i, j) * diff * diff;
    }
    rows(i) = row;
  }
  double total = 0.0;
  for (std::ptrdiff_t i = 0; i < n; ++i) total += w(i) * rows(i);
  return total;
}

}  // namespace nld::parallel
