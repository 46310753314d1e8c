#pragma once

#include <optional>
#include <vector>

namespace qmimo::metrics {

// Fairness of useful fidelity across branches. F~_i = 2 (F_i - 1/2) F_i,
// clamped at zero; J = (sum F~)^2 / (n sum F~^2). Empty when no branch
// beats 1/2.
std::optional<double> asymmetry_index(const std::vector<double>& fidelity);

struct DensityCurve {
  std::vector<double> x;
  std::vector<double> density;
  double bandwidth = 0.0;
};

// Gaussian KDE on `points` equispaced nodes of [lo, hi], reflected at both
// ends and renormalized to unit trapezoid integral. Silverman bandwidth
// 0.9 min(sd, IQR/1.34) L^{-1/5}, floored at 1e-3.
DensityCurve empirical_density(const std::vector<double>& values, double lo,
                               double hi, int points = 512);

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;  // standard error of the mean; 0 for one sample
  std::size_t count = 0;
};

MeanSe mean_se(const std::vector<double>& values);

}  // namespace qmimo::metrics
