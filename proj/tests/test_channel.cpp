#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numeric>

#include "qmimo/channel.hpp"
#include "qmimo/cloner.hpp"
#include "qmimo/error.hpp"

using namespace qmimo;
using tensor::Complex;
using tensor::ComplexMatrix;
using tensor::RealMatrix;
using namespace qmimo::channel;

namespace {

ChannelParams params(int n, double eta, double delta, std::vector<double> lambda) {
  ChannelParams p;
  p.modes = n;
  p.eta = eta;
  p.delta = delta;
  p.lambda = std::move(lambda);
  return p;
}

// Haar-averaged fidelity of a single-qubit Choi operator.
double haar_fidelity(const ComplexMatrix& choi) {
  return (choi.cwiseProduct(cloner::fidelity_functional(1, 0).transpose())).sum().real();
}

ComplexMatrix unit(std::size_t dim, std::size_t i, std::size_t j) {
  ComplexMatrix e = ComplexMatrix::Zero(static_cast<Eigen::Index>(dim),
                                        static_cast<Eigen::Index>(dim));
  e(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = 1.0;
  return e;
}

}  // namespace

TEST(Depolarizing, KrausAtZeroIsIdentity) {
  const auto k = depolarizing_kraus(0.0);
  ASSERT_EQ(k.size(), 4u);
  EXPECT_LT(tensor::max_abs(k[0] - tensor::identity(2)), 1e-15);
  for (int i = 1; i < 4; ++i) EXPECT_EQ(tensor::max_abs(k[static_cast<std::size_t>(i)]), 0.0);
}

TEST(Depolarizing, KrausCompleteness) {
  for (double l : {0.0, 0.3, 1.0}) {
    ComplexMatrix s = ComplexMatrix::Zero(2, 2);
    for (const auto& k : depolarizing_kraus(l)) s += k.adjoint() * k;
    EXPECT_LT(tensor::max_abs(s - tensor::identity(2)), 1e-15);
  }
}

TEST(Depolarizing, HaarFidelities) {
  EXPECT_NEAR(haar_fidelity(depolarizing_choi(1.0)), 0.5, 1e-15);
  EXPECT_NEAR(haar_fidelity(depolarizing_choi(0.4)), 0.8, 1e-15);
}

TEST(Depolarizing, MonteCarloFidelity) {
  Rng rng(21);
  const auto h = channel_choi(params(1, 0.0, 1.0, {0.4}));
  double acc = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const auto psi = tensor::haar_qubit(rng);
    acc += (psi.amplitudes.adjoint() * apply_channel(h, psi.projector()) * psi.amplitudes)(0).real();
  }
  EXPECT_NEAR(acc / n, 0.8, 0.005);
}

TEST(Depolarizing, RejectsOutOfRange) {
  EXPECT_THROW(depolarizing_kraus(1.5), DomainError);
  EXPECT_THROW(depolarizing_kraus(-0.1), DomainError);
}

TEST(CouplingKernel, LargeDecayIsIdentity) {
  const auto c = coupling_kernel(4, 50.0);
  EXPECT_LT((c - RealMatrix::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(CouplingKernel, SmallDecayIsUniform) {
  const auto c = coupling_kernel(4, 1e-9);
  EXPECT_LT((c.array() - 0.25).abs().maxCoeff(), 1e-8);
}

TEST(CouplingKernel, CircularDistance) {
  const auto c = coupling_kernel(4, 1.0);
  EXPECT_NEAR(c(0, 1), c(0, 3), 1e-15);
  const double z = 1.0 + 2.0 * std::exp(-1.0) + std::exp(-2.0);
  EXPECT_NEAR(c(0, 2), std::exp(-2.0) / z, 1e-15);
}

TEST(PermutationWeights, UniformPairIsBalanced) {
  const auto w = permutation_weights(coupling_kernel(2, 1e-12));
  ASSERT_EQ(w.size(), 2u);
  EXPECT_NEAR(w[0].weight, 0.5, 1e-10);
  EXPECT_NEAR(w[1].weight, 0.5, 1e-10);
}

TEST(PermutationWeights, DominantDiagonalPicksIdentity) {
  const auto w = permutation_weights(coupling_kernel(3, 50.0));
  ASSERT_EQ(w.size(), 6u);
  EXPECT_EQ(w[0].pi, (std::vector<int>{0, 1, 2}));
  EXPECT_NEAR(w[0].weight, 1.0, 1e-9);
}

TEST(PermutationWeights, RejectsSevenModes) {
  EXPECT_THROW(permutation_weights(RealMatrix::Identity(7, 7)), DimensionError);
}

TEST(PermutationUnitary, SendsModeToImage) {
  // |a0 a1 a2> with a0 = 1 goes to position pi(0) = 2.
  const auto u = permutation_unitary({2, 0, 1});
  EXPECT_EQ(u(1, 4), Complex(1.0));
  EXPECT_THROW(permutation_unitary({0, 0, 1}), DomainError);
}

TEST(ChannelChoi, NoiselessIsIdentity) {
  for (int n = 1; n <= 3; ++n) {
    const auto h = channel_choi(params(n, 0.0, 1.0, std::vector<double>(static_cast<std::size_t>(n), 0.0)));
    Rng rng(22 + n);
    const auto u = tensor::haar_unitary(std::size_t{1} << n, rng);
    const ComplexMatrix rho = u * unit(std::size_t{1} << n, 0, 0) * u.adjoint();
    EXPECT_LT(tensor::max_abs(apply_channel(h, rho) - rho), 1e-12) << n;
  }
}

TEST(ChannelChoi, FullDepolarizationAbsorbsMixing) {
  const auto h = channel_choi(params(3, 0.6, 0.5, {1.0, 1.0, 1.0}));
  const ComplexMatrix rho = unit(8, 3, 3);
  EXPECT_LT(tensor::max_abs(apply_channel(h, rho) - tensor::identity(8) / 8.0), 1e-14);
}

TEST(ChannelChoi, UniformSwapMixture) {
  const auto h = channel_choi(params(2, 1.0, 1e-12, {0.0, 0.0}));
  const auto s = permutation_unitary({1, 0});
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      const auto e = unit(4, i, j);
      const ComplexMatrix expected = 0.5 * (e + s * e * s.adjoint());
      EXPECT_LT(tensor::max_abs(apply_channel(h, e) - expected), 1e-10);
    }
  }
}

TEST(ChannelChoi, CptpAndUnitalOnRandomDraws) {
  Rng rng(23);
  for (int i = 0; i < 20; ++i) {
    const int n = 1 + i % 4;
    std::vector<double> lambda;
    for (int q = 0; q < n; ++q) lambda.push_back(rng.uniform());
    const auto h = channel_choi(params(n, rng.uniform(), 0.1 + 3.0 * rng.uniform(), lambda));
    std::vector<std::size_t> in(static_cast<std::size_t>(n));
    std::iota(in.begin(), in.end(), std::size_t{0});
    const auto dim = std::size_t{1} << n;
    EXPECT_LT(tensor::max_abs(tensor::partial_trace_qubits(h.choi, 2 * n, in) - tensor::identity(dim)), 1e-8);
    EXPECT_LT(tensor::max_abs(apply_channel(h, tensor::identity(dim)) - tensor::identity(dim)), 1e-8);
  }
}

TEST(ChannelChoi, ValidatesParameters) {
  EXPECT_THROW(channel_choi(params(2, 1.5, 1.0, {0.0, 0.0})), DomainError);
  EXPECT_THROW(channel_choi(params(2, 0.5, 0.0, {0.0, 0.0})), DomainError);
  EXPECT_THROW(channel_choi(params(2, 0.5, 1.0, {0.0})), DimensionError);
  EXPECT_THROW(channel_choi(params(7, 0.5, 1.0, std::vector<double>(7, 0.0))), DimensionError);
}

TEST(CouplingReport, Limits) {
  EXPECT_LT((coupling_report(params(3, 0.0, 1.0, {0, 0, 0})) - RealMatrix::Identity(3, 3))
                .cwiseAbs()
                .maxCoeff(),
            1e-15);
  EXPECT_LT((coupling_report(params(3, 1.0, 1.0, {0, 0, 0})) - coupling_kernel(3, 1.0))
                .cwiseAbs()
                .maxCoeff(),
            1e-15);
}

TEST(ApplyChannel, DepolarizesGroundState) {
  const auto h = channel_choi(params(1, 0.0, 1.0, {0.4}));
  const auto out = apply_channel(h, unit(2, 0, 0));
  EXPECT_NEAR(out(0, 0).real(), 0.8, 1e-15);
  EXPECT_NEAR(out(1, 1).real(), 0.2, 1e-15);
  EXPECT_THROW(apply_channel(h, tensor::identity(4)), DimensionError);
}

TEST(ChannelCache, RoundTripThroughFile) {
  const auto dir = std::filesystem::temp_directory_path() / "qmimo_channel_cache_test";
  std::filesystem::remove_all(dir);
  const auto p = params(2, 0.3, 0.7, {0.1, 0.2});
  const auto a = channel_choi_cached(p, dir);
  ASSERT_TRUE(std::filesystem::exists(dir / cache_file_name(p)));
  const auto b = read_choi_file(dir / cache_file_name(p), 2);
  EXPECT_EQ(tensor::max_abs(a.choi - b), 0.0);
  EXPECT_THROW(read_choi_file(dir / cache_file_name(p), 3), ConfigError);
  std::filesystem::remove_all(dir);
}
