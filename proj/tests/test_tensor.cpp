#include <gtest/gtest.h>

#include <vector>

#include "qmimo/error.hpp"
#include "qmimo/tensor.hpp"

using namespace qmimo;
using tensor::Complex;
using tensor::ComplexMatrix;
using tensor::RealMatrix;
using namespace qmimo::tensor;

namespace {

double diff(const ComplexMatrix& a, const ComplexMatrix& b) { return max_abs(a - b); }

ComplexMatrix swap2() {
  ComplexMatrix s = ComplexMatrix::Zero(4, 4);
  s(0, 0) = s(3, 3) = 1.0;
  s(1, 2) = s(2, 1) = 1.0;
  return s;
}

}  // namespace

TEST(Kron, IdentityTimesIdentity) {
  EXPECT_LT(diff(kron(identity(2), identity(2)), identity(4)), 1e-15);
}

TEST(Kron, PauliZTimesIdentityIsDiagonal) {
  ComplexMatrix expected = ComplexMatrix::Zero(4, 4);
  expected.diagonal() << 1.0, 1.0, -1.0, -1.0;
  EXPECT_LT(diff(kron(pauli_z(), identity(2)), expected), 1e-15);
}

TEST(Kron, RejectsProductAboveCap) {
  EXPECT_THROW(kron(identity(64), identity(64), 1024), DimensionError);
}

TEST(PartialTrace, MaximallyEntangledMarginal) {
  const ComplexMatrix phi = phi_plus_unnormalized() / 2.0;
  const std::vector<int> keep = {0};
  EXPECT_LT(diff(partial_trace(phi, ModeSpace::qubits(2), keep), identity(2) / 2.0), 1e-15);
}

TEST(PartialTrace, ProductRule) {
  Rng rng(3);
  const auto a = random_hermitian(2, rng);
  const auto b = random_hermitian(4, rng);
  const std::vector<int> keep = {0};
  const auto out = partial_trace(kron(a, b), ModeSpace::qubits(3), keep);
  EXPECT_LT(diff(out, a * b.trace()), 1e-12);
}

TEST(PartialTrace, KeepsOrderOfSpace) {
  Rng rng(4);
  const auto a = random_hermitian(2, rng);
  const auto b = random_hermitian(2, rng);
  const auto c = random_hermitian(2, rng);
  const auto abc = kron(kron(a, b), c);
  const std::vector<int> keep = {2, 0};
  const auto out = partial_trace(abc, ModeSpace::qubits(3), keep);
  EXPECT_LT(diff(out, kron(a, c) * b.trace()), 1e-12);
}

TEST(PartialTrace, UnknownLabelThrows) {
  const std::vector<int> keep = {7};
  EXPECT_THROW(partial_trace(identity(4), ModeSpace::qubits(2), keep), LabelError);
}

TEST(PartialTranspose, SwapBecomesEntangledProjector) {
  const std::vector<int> subset = {0};
  const auto st = partial_transpose(swap2(), ModeSpace::qubits(2), subset);
  EXPECT_LT(diff(st, phi_plus_unnormalized()), 1e-15);
  EXPECT_NEAR(lambda_max(st), 2.0, 1e-12);
}

TEST(PartialTranspose, EmptySubsetIsIdentityMap) {
  Rng rng(5);
  const auto x = random_hermitian(8, rng);
  const std::vector<int> none;
  EXPECT_LT(diff(partial_transpose(x, ModeSpace::qubits(3), none), x), 1e-15);
}

TEST(PartialTranspose, FullSubsetIsTranspose) {
  Rng rng(6);
  const auto x = random_hermitian(4, rng);
  const std::vector<int> all = {0, 1};
  EXPECT_LT(diff(partial_transpose(x, ModeSpace::qubits(2), all), x.transpose()), 1e-15);
}

TEST(PartialTranspose, UnknownLabelThrows) {
  const std::vector<int> subset = {3};
  EXPECT_THROW(partial_transpose(identity(4), ModeSpace::qubits(2), subset), LabelError);
}

TEST(PermuteQubits, MovesFactors) {
  Rng rng(7);
  const auto a = random_hermitian(2, rng);
  const auto b = random_hermitian(2, rng);
  const std::vector<std::size_t> order = {1, 0};
  EXPECT_LT(diff(permute_qubits(kron(a, b), order), kron(b, a)), 1e-14);
}

TEST(LinkProduct, ComposesIdentityChannels) {
  const auto phi = phi_plus_unnormalized();
  EXPECT_LT(diff(link_product(phi, 2, 2, phi, 2), phi), 1e-14);
}

TEST(HermitianEig, PauliX) {
  const auto e = hermitian_eig(pauli_x());
  EXPECT_NEAR(e.values(0), -1.0, 1e-14);
  EXPECT_NEAR(e.values(1), 1.0, 1e-14);
}

TEST(HermitianEig, DiagonalSortedAscending) {
  ComplexMatrix d = ComplexMatrix::Zero(3, 3);
  d.diagonal() << 3.0, 1.0, 2.0;
  const auto e = hermitian_eig(d);
  EXPECT_NEAR(e.values(0), 1.0, 1e-14);
  EXPECT_NEAR(e.values(1), 2.0, 1e-14);
  EXPECT_NEAR(e.values(2), 3.0, 1e-14);
}

TEST(HermitianEig, ReconstructsRandomMatrices) {
  Rng rng(8);
  for (std::size_t d : {2u, 5u, 16u, 33u}) {
    const auto x = random_hermitian(d, rng);
    const auto e = hermitian_eig(x);
    const ComplexMatrix rec =
        e.vectors * e.values.cast<Complex>().asDiagonal() * e.vectors.adjoint();
    EXPECT_LT(diff(rec, x), 1e-11) << d;
    EXPECT_LT(diff(e.vectors.adjoint() * e.vectors, identity(d)), 1e-11) << d;
  }
}

TEST(HermitianEig, RejectsNonHermitian) {
  ComplexMatrix x = ComplexMatrix::Zero(2, 2);
  x(0, 1) = 1.0;
  EXPECT_THROW(hermitian_eig(x), NotHermitianError);
}

TEST(PsdSqrtPinv, IdentityIsFixed) {
  EXPECT_LT(diff(psd_sqrt_pinv(identity(4)), identity(4)), 1e-14);
}

TEST(PsdSqrtPinv, DropsKernel) {
  ComplexMatrix d = ComplexMatrix::Zero(2, 2);
  d(0, 0) = 4.0;
  ComplexMatrix expected = ComplexMatrix::Zero(2, 2);
  expected(0, 0) = 0.5;
  EXPECT_LT(diff(psd_sqrt_pinv(d, 1e-10), expected), 1e-14);
}

TEST(PsdSqrtPinv, RejectsNegativeEigenvalue) {
  ComplexMatrix d = ComplexMatrix::Zero(2, 2);
  d(0, 0) = 1.0;
  d(1, 1) = -1e-3;
  EXPECT_THROW(psd_sqrt_pinv(d, 1e-10), NotPsdError);
}

TEST(HaarQubit, NormalizedAndUnbiased) {
  Rng rng(9);
  ComplexMatrix mean = ComplexMatrix::Zero(2, 2);
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const auto psi = haar_qubit(rng);
    ASSERT_NEAR(psi.amplitudes.norm(), 1.0, 1e-12);
    mean += psi.projector();
  }
  mean /= static_cast<double>(n);
  EXPECT_LT(diff(mean, identity(2) / 2.0), 0.02);
}

TEST(HaarUnitary, IsUnitary) {
  Rng rng(10);
  const auto u = haar_unitary(8, rng);
  EXPECT_LT(diff(u.adjoint() * u, identity(8)), 1e-12);
}
