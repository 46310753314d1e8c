#include "qmimo/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "qmimo/error.hpp"

namespace qmimo::metrics {

namespace {

double quantile(std::vector<double> sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

std::optional<double> asymmetry_index(const std::vector<double>& fidelity) {
  if (fidelity.empty()) return std::nullopt;
  double s1 = 0.0;
  double s2 = 0.0;
  for (double f : fidelity) {
    if (!(f >= -1e-12 && f <= 1.0 + 1e-9)) {
      throw DomainError("asymmetry_index: fidelity outside [0, 1]");
    }
    const double w = std::max(0.0, 2.0 * (f - 0.5) * f);
    s1 += w;
    s2 += w * w;
  }
  if (s2 <= 0.0) return std::nullopt;
  return s1 * s1 / (static_cast<double>(fidelity.size()) * s2);
}

DensityCurve empirical_density(const std::vector<double>& values, double lo,
                               double hi, int points) {
  if (values.size() < 2) throw DomainError("empirical_density: need two values");
  if (!(lo < hi)) throw DomainError("empirical_density: empty interval");
  if (points < 2) throw DomainError("empirical_density: need two grid points");
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / (n - 1.0));
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  const double iqr = (quantile(sorted, 0.75) - quantile(sorted, 0.25)) / 1.34;
  double spread = std::min(sd, iqr);
  if (!(spread > 0.0)) spread = std::max(sd, iqr);
  const double h = std::max(0.9 * spread * std::pow(n, -0.2), 1e-3);

  DensityCurve out;
  out.bandwidth = h;
  const double norm = 1.0 / (n * h * std::sqrt(2.0 * std::numbers::pi));
  const double step = (hi - lo) / (points - 1);
  for (int k = 0; k < points; ++k) {
    const double x = lo + step * k;
    double acc = 0.0;
    for (double v0 : values) {
      const double v = std::clamp(v0, lo, hi);
      for (double c : {v, 2.0 * lo - v, 2.0 * hi - v}) {
        const double u = (x - c) / h;
        acc += std::exp(-0.5 * u * u);
      }
    }
    out.x.push_back(x);
    out.density.push_back(norm * acc);
  }
  double integral = 0.0;
  for (int k = 0; k + 1 < points; ++k) {
    integral += 0.5 * step * (out.density[static_cast<std::size_t>(k)] +
                              out.density[static_cast<std::size_t>(k + 1)]);
  }
  if (integral > 0.0) {
    for (double& d : out.density) d /= integral;
  }
  return out;
}

MeanSe mean_se(const std::vector<double>& values) {
  MeanSe out;
  out.count = values.size();
  if (values.empty()) return out;
  const double n = static_cast<double>(values.size());
  out.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() > 1) {
    double var = 0.0;
    for (double v : values) var += (v - out.mean) * (v - out.mean);
    out.se = std::sqrt(var / (n - 1.0) / n);
  }
  return out;
}

}  // namespace qmimo::metrics
