#include "nld/kernel.hpp"

#include <algorithm>
#include <cmath>

#include "nld/errors.hpp"
#include "nld/parallel/dense_kernels.hpp"

namespace nld {

namespace {

std::string pair_text(Eigen::Index i, Eigen::Index j) {
  return "(" + std::to_string(i) + ", " + std::to_string(j) + ")";
}

void verify_flags(const Eigen::MatrixXd& J, const KernelFlags& flags, const Eigen::MatrixXd& dist) {
  const auto n = J.rows();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      require(std::isfinite(J(i, j)), ErrorKind::contract_violation,
              "kernel value at " + pair_text(i, j) + " is not finite");
  if (flags.nonnegative) {
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        require(J(i, j) >= 0.0, ErrorKind::contract_violation,
                "kernel declared nonnegative but J" + pair_text(i, j) + " < 0");
  }
  if (flags.symmetric) {
    const double tol = 1e-12 * J.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < i; ++j)
        require(std::abs(J(i, j) - J(j, i)) <= tol, ErrorKind::contract_violation,
                "kernel declared symmetric but J" + pair_text(i, j) + " != J" + pair_text(j, i));
  }
  if (flags.support_radius) {
    const double R = *flags.support_radius;
    require(std::isfinite(R) && R > 0.0, ErrorKind::contract_violation,
            "declared support radius must be positive and finite");
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        require(dist(i, j) < R || J(i, j) == 0.0, ErrorKind::contract_violation,
                "kernel nonzero at " + pair_text(i, j) + " beyond the declared support radius");
  }
}

}  // namespace

std::string to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::matrix: return "matrix";
    case KernelFamily::convolution: return "convolution";
    case KernelFamily::truncated_uniform: return "truncated_uniform";
    case KernelFamily::gaussian_truncated: return "gaussian_truncated";
    case KernelFamily::separable: return "separable";
    case KernelFamily::counterexample: return "counterexample";
  }
  return "unknown";
}

KernelSpec KernelSpec::explicit_matrix(Eigen::MatrixXd values, KernelFlags flags) {
  KernelSpec s;
  s.family = KernelFamily::matrix;
  s.values = std::move(values);
  s.flags = flags;
  return s;
}

KernelSpec KernelSpec::convolution(RadialProfile profile, std::string name, KernelFlags flags,
                                   bool geodesic_profile) {
  require(static_cast<bool>(profile), ErrorKind::invalid_argument, "convolution needs a profile");
  KernelSpec s;
  s.family = KernelFamily::convolution;
  s.profile = std::move(profile);
  s.profile_name = std::move(name);
  s.flags = flags;
  s.flags.symmetric = true;
  s.geodesic_profile = geodesic_profile;
  return s;
}

KernelSpec KernelSpec::truncated_uniform(double c, double radius) {
  require(std::isfinite(c) && c > 0.0, ErrorKind::invalid_argument, "truncated_uniform needs c > 0");
  require(std::isfinite(radius) && radius > 0.0, ErrorKind::invalid_argument,
          "truncated_uniform needs R > 0");
  KernelSpec s;
  s.family = KernelFamily::truncated_uniform;
  s.scale = c;
  s.radius = radius;
  s.flags = {true, true, radius};
  return s;
}

KernelSpec KernelSpec::gaussian_truncated(double c, double sigma, double radius) {
  require(std::isfinite(c) && c > 0.0, ErrorKind::invalid_argument, "gaussian_truncated needs c > 0");
  require(std::isfinite(sigma) && sigma > 0.0, ErrorKind::invalid_argument,
          "gaussian_truncated needs sigma > 0");
  require(std::isfinite(radius) && radius > 0.0, ErrorKind::invalid_argument,
          "gaussian_truncated needs R > 0");
  KernelSpec s;
  s.family = KernelFamily::gaussian_truncated;
  s.scale = c;
  s.sigma = sigma;
  s.radius = radius;
  s.flags = {true, true, radius};
  return s;
}

KernelSpec KernelSpec::separable(Eigen::VectorXd f, Eigen::VectorXd g) {
  require(f.size() == g.size() && f.size() > 0, ErrorKind::invalid_argument,
          "separable kernel needs factor vectors of equal, nonzero length");
  require(f.allFinite() && g.allFinite(), ErrorKind::invalid_argument,
          "separable factors must be finite");
  KernelSpec s;
  s.family = KernelFamily::separable;
  s.flags.symmetric = (f == g);
  s.flags.nonnegative = (f.minCoeff() >= 0.0 && g.minCoeff() >= 0.0);
  s.f = std::move(f);
  s.g = std::move(g);
  return s;
}

KernelSpec KernelSpec::counterexample(double radius) {
  require(std::isfinite(radius) && radius > 0.0 && radius < 0.5, ErrorKind::invalid_argument,
          "counterexample kernel needs 0 < R < 1/2");
  KernelSpec s;
  s.family = KernelFamily::counterexample;
  s.radius = radius;
  s.flags = {true, true, radius};
  return s;
}

std::optional<RadialProfile> KernelSpec::radial_profile() const {
  switch (family) {
    case KernelFamily::truncated_uniform:
      return [c = scale, R = radius](double r) { return r < R ? c : 0.0; };
    case KernelFamily::gaussian_truncated:
      return [c = scale, s = sigma, R = radius](double r) {
        return r < R ? c * std::exp(-(r * r) / (s * s)) : 0.0;
      };
    case KernelFamily::convolution:
      return profile;
    default:
      return std::nullopt;
  }
}

KernelMatrix evaluate(const KernelSpec& spec, std::shared_ptr<const DiscreteMeasureSpace> space) {
  require(space != nullptr, ErrorKind::invalid_argument, "kernel evaluation needs a space");
  const std::size_t n = space->size();
  const auto& dist = space->dist();
  Eigen::MatrixXd J;

  switch (spec.family) {
    case KernelFamily::matrix:
      require(spec.values.rows() == Eigen::Index(n) && spec.values.cols() == Eigen::Index(n),
              ErrorKind::invalid_argument,
              "explicit kernel matrix is " + std::to_string(spec.values.rows()) + "x" +
                  std::to_string(spec.values.cols()) + " but the space has " + std::to_string(n) +
                  " nodes");
      J = spec.values;
      break;
    case KernelFamily::convolution: {
      const Eigen::MatrixXd euclid =
          spec.geodesic_profile ? Eigen::MatrixXd() : parallel::euclidean_distances(space->coords());
      const auto& r = spec.geodesic_profile ? dist : euclid;
      J = parallel::tabulate(n, [&](std::size_t i, std::size_t j) { return spec.profile(r(i, j)); });
      break;
    }
    case KernelFamily::truncated_uniform:
    case KernelFamily::gaussian_truncated: {
      const auto profile = *spec.radial_profile();
      J = parallel::tabulate(n, [&](std::size_t i, std::size_t j) { return profile(dist(i, j)); });
      break;
    }
    case KernelFamily::separable:
      require(spec.f.size() == Eigen::Index(n), ErrorKind::invalid_argument,
              "separable factors have length " + std::to_string(spec.f.size()) +
                  " but the space has " + std::to_string(n) + " nodes");
      J = spec.f * spec.g.transpose();
      break;
    case KernelFamily::counterexample: {
      require(space->ambient_dim() == 1, ErrorKind::invalid_argument,
              "counterexample kernel is defined on subsets of [0, 1]");
      const double R = spec.radius;
      const auto& x = space->coords();
      auto in_square = [R](double t) { return t > 0.5 - R && t < 0.5 + R; };
      J = parallel::tabulate(n, [&](std::size_t i, std::size_t j) {
        const bool excluded = in_square(x(i, 0)) && in_square(x(j, 0));
        return (dist(i, j) < R && !excluded) ? 1.0 : 0.0;
      });
      break;
    }
  }

  verify_flags(J, spec.flags, dist);
  return KernelMatrix{std::move(J), spec.flags, spec, std::move(space)};
}

Eigen::VectorXd h0(const KernelMatrix& kernel) {
  return parallel::weighted_row_sums(kernel.values, kernel.weights());
}

double bochner_norm(const KernelMatrix& kernel, double q, double p_conj) {
  require(q >= 1.0 && p_conj >= 1.0, ErrorKind::invalid_argument,
          "norm exponents must lie in [1, inf]");
  const auto& J = kernel.values;
  const auto& w = kernel.weights();
  const auto n = J.rows();
  Eigen::VectorXd inner(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::isinf(p_conj)) {
      inner(i) = J.row(i).cwiseAbs().maxCoeff();
    } else {
      double s = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) s += w(j) * std::pow(std::abs(J(i, j)), p_conj);
      inner(i) = std::pow(s, 1.0 / p_conj);
    }
  }
  if (std::isinf(q)) return inner.maxCoeff();
  double s = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) s += w(i) * std::pow(inner(i), q);
  return std::pow(s, 1.0 / q);
}

std::optional<double> lattice_profile_norm(const KernelMatrix& kernel, double r) {
  require(r >= 1.0, ErrorKind::invalid_argument, "norm exponent must lie in [1, inf]");
  const auto& grid = kernel.space->grid();
  if (!grid || !kernel.spec.radial_profile()) return std::nullopt;
  const std::size_t dim = grid->counts.size();
  const std::size_t n = kernel.size();

  std::vector<std::size_t> extent(dim);
  std::size_t offsets = 1;
  double cell = 1.0;
  for (std::size_t d = 0; d < dim; ++d) {
    extent[d] = 2 * grid->counts[d] - 1;
    offsets *= extent[d];
    cell *= grid->spacing[d];
  }
  std::vector<std::vector<std::size_t>> index(n);
  for (std::size_t i = 0; i < n; ++i) index[i] = grid->index_of(i);

  std::vector<double> peak(offsets, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      std::size_t slot = 0;
      for (std::size_t d = 0; d < dim; ++d)
        slot = slot * extent[d] + (index[i][d] + grid->counts[d] - 1 - index[j][d]);
      peak[slot] = std::max(peak[slot], std::abs(kernel.values(i, j)));
    }

  if (std::isinf(r)) return *std::max_element(peak.begin(), peak.end());
  double s = 0.0;
  for (double v : peak) s += cell * std::pow(v, r);
  return std::pow(s, 1.0 / r);
}

std::optional<std::pair<std::size_t, std::size_t>> positivity_gap(const KernelMatrix& kernel) {
  require(kernel.flags.support_radius.has_value(), ErrorKind::precondition_failure,
          "positivity hypothesis needs a declared support radius");
  const double R = *kernel.flags.support_radius;
  const auto& dist = kernel.space->dist();
  const std::size_t n = kernel.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (dist(i, j) < R && !(kernel.values(i, j) > 0.0)) return std::pair{i, j};
  return std::nullopt;
}

bool positivity_graph_connected(const KernelMatrix& kernel) {
  const std::size_t n = kernel.size();
  std::vector<char> seen(n, 0);
  std::vector<std::size_t> stack{0};
  seen[0] = 1;
  std::size_t count = 1;
  while (!stack.empty()) {
    const auto v = stack.back();
    stack.pop_back();
    for (std::size_t j = 0; j < n; ++j)
      if (!seen[j] && (kernel.values(v, j) > 0.0 || kernel.values(j, v) > 0.0)) {
        seen[j] = 1;
        ++count;
        stack.push_back(j);
      }
  }
  return count == n;
}

}  // namespace nld
