#pragma once

// N-mode depolarizing channel with stochastic permutation crosstalk.
//
// Choi layout: qubits 0..N-1 are the inputs, N..2N-1 the outputs, and
// J = sum |i><j| (x) H(|i><j|), so Tr_out J = I.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "qmimo/tensor.hpp"

namespace qmimo::channel {

using tensor::ComplexMatrix;
using tensor::RealMatrix;

inline constexpr int kMaxModes = 6;

struct ChannelParams {
  int modes = 1;
  double eta = 0.0;             // crosstalk strength in [0, 1]
  std::vector<double> lambda;   // per-mode depolarization in [0, 1]
  double delta = 1.0;           // coupling decay exponent, > 0

  void validate() const;  // throws DomainError / DimensionError
};

// {sqrt(1 - 3l/4) I, sqrt(l/4) X, sqrt(l/4) Y, sqrt(l/4) Z}.
std::vector<ComplexMatrix> depolarizing_kraus(double lambda);

// Single-qubit Choi of rho -> (1 - l) rho + l I/2.
ComplexMatrix depolarizing_choi(double lambda);

// c_ij = exp(-delta d(i,j)) / sum_k exp(-delta d(i,k)) with circular
// distance d(i,j) = min(|i-j|, N-|i-j|).
RealMatrix coupling_kernel(int modes, double delta);

struct WeightedPermutation {
  std::vector<int> pi;  // zero-based; mode i is sent to pi[i]
  double weight;
};

// c_pi proportional to prod_i c_{i, pi(i)} over all of S_N, in
// lexicographic order of pi. N <= 6.
std::vector<WeightedPermutation> permutation_weights(const RealMatrix& kernel);

// U_pi |a_1 .. a_N> = |a_{pi^-1(1)} .. a_{pi^-1(N)}>.
ComplexMatrix permutation_unitary(const std::vector<int>& pi);

struct ChannelChoi {
  ComplexMatrix choi;
  ChannelParams params;
};

// (1 - eta) J_dep + eta sum_pi c_pi (I (x) U_pi) J_dep (I (x) U_pi^dagger).
ChannelChoi channel_choi(const ChannelParams& params);

// Same as channel_choi, reading and writing a binary file below `cache_dir`
// when it is non-empty. Also memoized in process.
ChannelChoi channel_choi_cached(const ChannelParams& params,
                                const std::filesystem::path& cache_dir = {});

// P = (1 - eta) I + eta C. Reporting only.
RealMatrix coupling_report(const ChannelParams& params);

// Lambda(rho) = Tr_in[J (rho^T (x) I)] for any Choi with square input leg of
// dimension dim_in.
ComplexMatrix apply_choi(const ComplexMatrix& choi, std::size_t dim_in,
                         const ComplexMatrix& rho);

ComplexMatrix apply_channel(const ChannelChoi& h, const ComplexMatrix& rho);

// Binary cache layout, little endian:
//   "QMCH" | u32 version (1) | u32 N | u64 rows | u64 cols |
//   rows * cols pairs of f64 (re, im), row major.
void write_choi_file(const std::filesystem::path& path, int modes,
                     const ComplexMatrix& choi);
ComplexMatrix read_choi_file(const std::filesystem::path& path, int expected_modes);

// File name for the cache entry of `params`, from N, eta, delta and lambda
// rounded to 1e-12.
std::string cache_file_name(const ChannelParams& params);

}  // namespace qmimo::channel
