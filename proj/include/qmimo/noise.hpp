#pragma once

// Depolarization budgets on the capped simplex
// A_Z = {x in [0,1]^N : sum x = Z} and Gamma-Gamma fluctuations around them.

#include <vector>

#include "qmimo/random.hpp"

namespace qmimo::noise {

inline constexpr double kMinFluctuation = 1e-9;

struct MeanAllocation {
  std::vector<double> lambda;
  double budget = 0.0;
};

// Dirichlet(1) scaled by Z, projected onto A_Z. Requires 0 < Z <= N.
std::vector<MeanAllocation> sample_mean_allocations(int modes, double budget,
                                                    int count, Rng& rng);

// c = (1 + sqrt(1 + mu^2)) / mu^2, so that 2/c + 1/c^2 = mu^2.
double gamma_shape(double mu);

// xi_i = g1 * g2 with g ~ Gamma(c, 1/c): unit mean, variance mu^2.
// mu is floored at kMinFluctuation, so mu = 0 gives xi = 1 to ~1e-9.
std::vector<double> sample_fluctuation(double mu, int modes, Rng& rng);

// Rescale to sum Z, then clip to [0, 1] and hand the excess to the unclipped
// components in proportion to their values. At most N rounds.
MeanAllocation project(std::vector<double> x, double budget);

// Projection of mean.lambda (.) xi onto A_Z.
MeanAllocation perturb_and_project(const MeanAllocation& mean,
                                   const std::vector<double>& xi);

// v = 1/(R N) sum_r sum_i (x_i^(r) - lambda_i)^2. Needs R >= 2.
double cluster_variance(const MeanAllocation& mean,
                        const std::vector<MeanAllocation>& realizations);

}  // namespace qmimo::noise
