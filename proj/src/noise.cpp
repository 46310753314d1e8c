#include "qmimo/noise.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qmimo/error.hpp"

namespace qmimo::noise {

namespace {

void check_budget(int modes, double budget) {
  if (modes < 1) throw DomainError("noise: need at least one mode");
  if (!(budget >= 0.0)) throw DomainError("noise: budget must be nonnegative");
  if (budget > modes + 1e-12) throw DomainError("noise: budget exceeds mode count");
}

}  // namespace

std::vector<MeanAllocation> sample_mean_allocations(int modes, double budget,
                                                    int count, Rng& rng) {
  check_budget(modes, budget);
  if (count < 1) throw DomainError("sample_mean_allocations: count must be >= 1");
  std::vector<MeanAllocation> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int l = 0; l < count; ++l) {
    auto x = rng.dirichlet(static_cast<std::size_t>(modes));
    for (double& v : x) v *= budget;
    out.push_back(project(std::move(x), budget));
  }
  return out;
}

double gamma_shape(double mu) {
  if (!(mu > 0.0)) throw DomainError("gamma_shape: mu must be positive");
  const double m2 = mu * mu;
  return (1.0 + std::sqrt(1.0 + m2)) / m2;
}

std::vector<double> sample_fluctuation(double mu, int modes, Rng& rng) {
  if (!(mu >= 0.0)) throw DomainError("sample_fluctuation: mu must be nonnegative");
  const double c = gamma_shape(std::max(mu, kMinFluctuation));
  std::vector<double> xi(static_cast<std::size_t>(modes));
  for (double& v : xi) {
    const double g1 = rng.gamma(c, 1.0 / c);
    const double g2 = rng.gamma(c, 1.0 / c);
    v = g1 * g2;
  }
  return xi;
}

MeanAllocation project(std::vector<double> x, double budget) {
  const int n = static_cast<int>(x.size());
  check_budget(n, budget);
  for (double v : x) {
    if (!(v >= 0.0)) throw DomainError("project: components must be nonnegative");
  }
  double sum = std::accumulate(x.begin(), x.end(), 0.0);
  if (sum <= 0.0) {
    x.assign(x.size(), budget / n);
  } else {
    for (double& v : x) v *= budget / sum;
  }
  std::vector<bool> fixed(x.size(), false);
  for (int round = 0; round < n; ++round) {
    double excess = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (!fixed[i] && x[i] > 1.0) {
        excess += x[i] - 1.0;
        x[i] = 1.0;
        fixed[i] = true;
      }
    }
    if (excess <= 0.0) break;
    double free_mass = 0.0;
    std::size_t free_count = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (!fixed[i]) {
        free_mass += x[i];
        ++free_count;
      }
    }
    if (free_count == 0) break;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (fixed[i]) continue;
      x[i] += free_mass > 0.0 ? excess * x[i] / free_mass
                              : excess / static_cast<double>(free_count);
    }
  }
  for (double& v : x) v = std::min(v, 1.0);
  return {std::move(x), budget};
}

MeanAllocation perturb_and_project(const MeanAllocation& mean,
                                   const std::vector<double>& xi) {
  if (xi.size() != mean.lambda.size()) {
    throw DimensionError("perturb_and_project: size mismatch");
  }
  std::vector<double> x(xi.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = mean.lambda[i] * xi[i];
  return project(std::move(x), mean.budget);
}

double cluster_variance(const MeanAllocation& mean,
                        const std::vector<MeanAllocation>& realizations) {
  if (realizations.size() < 2) {
    throw DomainError("cluster_variance: need at least two realizations");
  }
  const std::size_t n = mean.lambda.size();
  double acc = 0.0;
  for (const auto& r : realizations) {
    if (r.lambda.size() != n) throw DimensionError("cluster_variance: size mismatch");
    for (std::size_t i = 0; i < n; ++i) {
      const double d = r.lambda[i] - mean.lambda[i];
      acc += d * d;
    }
  }
  return acc / (static_cast<double>(realizations.size()) * static_cast<double>(n));
}

}  // namespace qmimo::noise
