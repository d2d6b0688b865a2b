// OpenMP kernels against their serial references.

#include <benchmark/benchmark.h>

#include <cmath>
#include <numeric>

#include "nld/parallel/dense_kernels.hpp"
#include "nld/parallel/serial_kernels.hpp"

namespace {

Eigen::MatrixXd grid_coords(std::size_t n) {
  Eigen::MatrixXd c(Eigen::Index(n), 2);
  const auto side = std::size_t(std::ceil(std::sqrt(double(n))));
  for (std::size_t i = 0; i < n; ++i) c.row(Eigen::Index(i)) << double(i % side) / side, double(i / side) / side;
  return c;
}

nld::WeightedGraph chain_with_chords(std::size_t n) {
  nld::WeightedGraph g(n);
  for (std::size_t i = 0; i + 1 < n; ++i) g.add_edge(i, i + 1, 1.0);
  for (std::size_t i = 0; i < n; i += 7) g.add_edge(i, (i * 13 + 5) % n, 3.0);
  return g;
}

std::vector<std::size_t> all_nodes(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

template <bool Parallel>
void euclidean(benchmark::State& state) {
  const auto c = grid_coords(std::size_t(state.range(0)));
  for (auto _ : state)
    benchmark::DoNotOptimize(Parallel ? nld::parallel::euclidean_distances(c) : nld::serial::euclidean_distances(c));
}

template <bool Parallel>
void graph(benchmark::State& state) {
  const auto n = std::size_t(state.range(0));
  const auto g = chain_with_chords(n);
  const auto nodes = all_nodes(n);
  for (auto _ : state)
    benchmark::DoNotOptimize(Parallel ? nld::parallel::graph_distances(g, nodes, nodes)
                                      : nld::serial::graph_distances(g, nodes, nodes));
}

template <bool Parallel>
void tabulate(benchmark::State& state) {
  const auto n = std::size_t(state.range(0));
  const auto f = [](std::size_t i, std::size_t j) { return std::exp(-std::abs(double(i) - double(j)) / 50.0); };
  for (auto _ : state)
    benchmark::DoNotOptimize(Parallel ? nld::parallel::tabulate(n, f) : nld::serial::tabulate(n, f));
}

template <bool Parallel>
void row_sums(benchmark::State& state) {
  const auto n = Eigen::Index(state.range(0));
  const Eigen::MatrixXd a = Eigen::MatrixXd::Random(n, n);
  const Eigen::VectorXd w = Eigen::VectorXd::Random(n).cwiseAbs();
  for (auto _ : state)
    benchmark::DoNotOptimize(Parallel ? nld::parallel::weighted_row_sums(a, w) : nld::serial::weighted_row_sums(a, w));
}

template <bool Parallel>
void matvec(benchmark::State& state) {
  const auto n = Eigen::Index(state.range(0));
  const Eigen::MatrixXd a = Eigen::MatrixXd::Random(n, n);
  const Eigen::VectorXd u = Eigen::VectorXd::Random(n);
  for (auto _ : state)
    benchmark::DoNotOptimize(Parallel ? nld::parallel::matvec(a, u) : nld::serial::matvec(a, u));
}

template <bool Parallel>
void dirichlet(benchmark::State& state) {
  const auto n = Eigen::Index(state.range(0));
  const Eigen::MatrixXd a = Eigen::MatrixXd::Random(n, n).cwiseAbs();
  const Eigen::VectorXd w = Eigen::VectorXd::Random(n).cwiseAbs();
  const Eigen::VectorXd u = Eigen::VectorXd::Random(n);
  for (auto _ : state)
    benchmark::DoNotOptimize(Parallel ? nld::parallel::dirichlet_form(a, w, u) : nld::serial::dirichlet_form(a, w, u));
}

template <bool Parallel>
void hops(benchmark::State& state) {
  const auto d = nld::serial::euclidean_distances(grid_coords(std::size_t(state.range(0))));
  for (auto _ : state)
    benchmark::DoNotOptimize(Parallel ? nld::parallel::hop_eccentricities(d, 0.1) : nld::serial::hop_eccentricities(d, 0.1));
}

}  // namespace

#define NLD_PAIR(fn, lo, hi)                                            \
  BENCHMARK(fn<false>)->Name(#fn "/serial")->RangeMultiplier(2)->Range(lo, hi)->Unit(benchmark::kMicrosecond); \
  BENCHMARK(fn<true>)->Name(#fn "/parallel")->RangeMultiplier(2)->Range(lo, hi)->Unit(benchmark::kMicrosecond)

NLD_PAIR(euclidean, 256, 1024);
NLD_PAIR(graph, 256, 1024);
NLD_PAIR(tabulate, 256, 1024);
NLD_PAIR(row_sums, 256, 1024);
NLD_PAIR(matvec, 256, 1024);
NLD_PAIR(dirichlet, 256, 1024);
NLD_PAIR(hops, 128, 512);

BENCHMARK_MAIN();
