#pragma once

// Universal asymmetric 1 -> M qubit cloner.
//
// Choi layout: qubit 0 is the input leg A', qubits 1..M are the clones.

#include <cstddef>
#include <memory>
#include <vector>

#include "qmimo/sdp.hpp"
#include "qmimo/tensor.hpp"

namespace qmimo::cloner {

using tensor::ComplexMatrix;
using tensor::RealMatrix;

inline constexpr int kMaxClones = 5;
inline constexpr double kTiebreak = 1e-6;

// Point of the probability simplex: gamma_j >= 0, sum gamma_j = 1.
class AsymmetryVector {
 public:
  // Validates within 1e-10 and renormalizes away the residual rounding.
  explicit AsymmetryVector(std::vector<double> gamma);
  static AsymmetryVector uniform(int m);
  static AsymmetryVector vertex(int m, int k);

  int size() const { return static_cast<int>(gamma_.size()); }
  const std::vector<double>& gamma() const { return gamma_; }
  double operator[](int k) const { return gamma_[static_cast<std::size_t>(k)]; }

  // alpha_j = gamma_j / sum_k gamma_k
  std::vector<double> alpha() const;

 private:
  std::vector<double> gamma_;
};

struct CloneAmplitudes {
  std::vector<double> beta;
  double perron_value = 0.0;
  std::vector<double> perron_vector;  // unit norm, zero off the support
};

struct CloneFidelityVector {
  std::vector<double> fidelity;
  std::vector<double> gamma;
};

struct ClonerChoi {
  ComplexMatrix choi;
  int clones = 0;
};

// A = alpha 1^T + diag(alpha).
RealMatrix weight_matrix(const AsymmetryVector& gamma);

// Perron vector of A restricted to the support of gamma by power iteration;
// beta = sqrt(2 / ((sum u)^2 + 1)) u.
CloneAmplitudes clone_amplitudes(const AsymmetryVector& gamma);

// F_k = 1/3 + (beta_k + sum_j beta_j)^2 / 6.
CloneFidelityVector clone_fidelities(const AsymmetryVector& gamma);

// Haar-averaged fidelity functional of clone k (0-based), acting on the
// cloner Choi space: (I + Phi)/6 on (A', clone k), identity elsewhere.
ComplexMatrix fidelity_functional(int clones, int k);

// Haar-averaged clone fidelities Tr[J G_k] of a cloner Choi operator.
std::vector<double> choi_fidelities(const ClonerChoi& cloner);

// Orthogonal projection of X onto span{P_sigma : sigma in S_n}, the
// commutant of U^{(x)n}. Least-squares solve through the pseudo-inverse of
// the Gram matrix (cached per n). n <= 6.
ComplexMatrix twirl_permutation_algebra(const ComplexMatrix& x, int n);

// Optimal gamma-weighted universal cloner: SDP over CPTP maps followed by a
// permutation-algebra twirl of the input-transposed Choi. Results are
// memoized on (M, gamma rounded to 1e-9).
ClonerChoi cloner_choi(const AsymmetryVector& gamma,
                       const sdp::Options& options = {});

// Closed-form fidelity vectors on the simplex grid with spacing
// `grid_resolution`. M in {2, 3}.
std::vector<CloneFidelityVector> feasible_boundary(int clones,
                                                   double grid_resolution);

// All points of the simplex grid {k / steps} in lexicographic order.
std::vector<std::vector<double>> simplex_grid(int dim, int steps);

}  // namespace qmimo::cloner
