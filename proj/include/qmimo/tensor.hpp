#pragma once

// Dense complex linear algebra and multi-qubit index bookkeeping.
//
// Index convention: in a product of n qubit modes the first mode is the most
// significant tensor factor, i.e. basis index bit (n - 1 - q) belongs to the
// mode at position q.

#include <Eigen/Dense>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "qmimo/random.hpp"

namespace qmimo::tensor {

using Complex = std::complex<double>;
using ComplexMatrix =
    Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ComplexVector = Eigen::Matrix<Complex, Eigen::Dynamic, 1>;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

inline constexpr std::size_t kDefaultDimensionCap = std::size_t{1} << 14;
inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kSupportTol = 1e-10;

ComplexMatrix identity(std::size_t dim);
ComplexMatrix pauli_x();
ComplexMatrix pauli_y();
ComplexMatrix pauli_z();

// Unnormalized maximally entangled projector |Phi><Phi| on two qubits,
// |Phi> = |00> + |11>.
ComplexMatrix phi_plus_unnormalized();

// Largest entry modulus.
double max_abs(const ComplexMatrix& x);

// max |X - X^dagger| <= tol * max(1, max |X|).
bool is_hermitian(const ComplexMatrix& x, double tol = kHermitianTol);

ComplexMatrix hermitian_part(const ComplexMatrix& x);

int qubit_count(std::size_t dim);  // throws DimensionError unless dim = 2^n

// Ordered list of qubit modes addressed by integer labels.
class ModeSpace {
 public:
  explicit ModeSpace(std::vector<int> labels);
  static ModeSpace qubits(int n);  // labels 0 .. n-1

  std::size_t size() const { return labels_.size(); }
  std::size_t dimension() const { return std::size_t{1} << labels_.size(); }
  const std::vector<int>& labels() const { return labels_; }
  bool contains(int label) const;
  std::size_t position(int label) const;  // throws LabelError
  std::vector<std::size_t> positions(std::span<const int> labels) const;

 private:
  std::vector<int> labels_;
};

struct PureState {
  ComplexVector amplitudes;

  // Normalizes `v`; throws DomainError for the zero vector.
  static PureState normalized(ComplexVector v);
  ComplexMatrix projector() const;
};

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b,
                   std::size_t cap = kDefaultDimensionCap);
ComplexMatrix kron_all(std::span<const ComplexMatrix> factors,
                       std::size_t cap = kDefaultDimensionCap);

// Traces out every mode not in `keep`. Kept modes appear in the order they
// have in `space`.
ComplexMatrix partial_trace(const ComplexMatrix& x, const ModeSpace& space,
                            std::span<const int> keep);

// Transposes the tensor factors listed in `subset`.
ComplexMatrix partial_transpose(const ComplexMatrix& x, const ModeSpace& space,
                                std::span<const int> subset);

// Positional variants over n qubits.
ComplexMatrix partial_trace_qubits(const ComplexMatrix& x, int n,
                                   std::span<const std::size_t> keep);
ComplexMatrix partial_transpose_qubits(const ComplexMatrix& x, int n,
                                       std::span<const std::size_t> subset);

// Reorders tensor factors: qubit q of the result is qubit order[q] of x.
ComplexMatrix permute_qubits(const ComplexMatrix& x,
                             std::span<const std::size_t> order);

// Link product of J_a on X (x) Y with J_b on Y (x) Z, contracting Y:
// Tr_Y[(J_a^{T_Y} (x) I_Z)(I_X (x) J_b)].
ComplexMatrix link_product(const ComplexMatrix& ja, std::size_t dim_x,
                           std::size_t dim_y, const ComplexMatrix& jb,
                           std::size_t dim_z);

struct EigenDecomposition {
  RealVector values;     // ascending
  ComplexMatrix vectors;  // columns
};

struct RealEigenDecomposition {
  RealVector values;  // ascending
  RealMatrix vectors;
};

// Cyclic Jacobi diagonalization. Throws NotHermitianError beyond tolerance and
// ConvergenceError after `max_sweeps` sweeps.
EigenDecomposition hermitian_eig(const ComplexMatrix& x, int max_sweeps = 100);
RealEigenDecomposition symmetric_eig(const RealMatrix& x, int max_sweeps = 100);

double lambda_max(const ComplexMatrix& x);
double lambda_min(const ComplexMatrix& x);

// X^{-1/2} on the span of eigenvalues above support_tol, zero elsewhere.
ComplexMatrix psd_sqrt_pinv(const ComplexMatrix& x,
                            double support_tol = kSupportTol);

// Projector onto the eigenvectors of X with eigenvalue above support_tol.
ComplexMatrix support_projector(const ComplexMatrix& x,
                                double support_tol = kSupportTol);

// Haar-random pure qubit: two independent complex Gaussians, normalized.
PureState haar_qubit(Rng& rng);

// Haar-random unitary of the given dimension (QR of a Ginibre matrix with
// phase correction).
ComplexMatrix haar_unitary(std::size_t dim, Rng& rng);

// Random Hermitian matrix with i.i.d. Gaussian entries (GUE-like).
ComplexMatrix random_hermitian(std::size_t dim, Rng& rng);

}  // namespace qmimo::tensor
