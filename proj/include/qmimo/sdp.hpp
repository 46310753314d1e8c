#pragma once

// Dense primal-dual interior-point solver for small Hermitian SDPs.
//
//   maximize   sum_b Tr[C_b X_b]
//   subject to sum_b Tr[A_{i,b} X_b] = b_i,   X_b >= 0.
//
// Complex blocks are embedded in real symmetric blocks of twice the size.

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "qmimo/tensor.hpp"

namespace qmimo::sdp {

using tensor::Complex;
using tensor::ComplexMatrix;
using tensor::RealMatrix;
using tensor::RealVector;

struct Entry {
  std::size_t row;
  std::size_t col;
  Complex value;
};

// Coefficient matrix of one constraint restricted to one block. Entries list
// both triangles; duplicates are summed.
struct Term {
  std::size_t block;
  std::vector<Entry> entries;

  static Term dense(std::size_t block, const ComplexMatrix& a,
                    double drop_tol = 0.0);
};

struct Constraint {
  std::vector<Term> terms;
  double rhs = 0.0;
};

struct SdpProblem {
  std::vector<std::size_t> blocks;       // complex block dimensions
  std::vector<ComplexMatrix> objective;  // one per block, may be empty (zero)
  std::vector<Constraint> constraints;

  // Throws DimensionError / NotHermitianError on malformed data.
  void validate() const;
  std::size_t realified_dimension() const;
};

enum class Status { optimal, infeasible, unbounded, max_iter };

std::string to_string(Status s);

struct Options {
  double tol = 1e-8;
  int max_iter = 200;
  std::size_t dimension_cap = 512;
  double step_fraction = 0.98;
};

struct IterationInfo {
  double primal_objective;
  double dual_objective;
  double primal_infeasibility;
  double dual_infeasibility;
  double mu;
};

struct SdpSolution {
  std::vector<ComplexMatrix> x;  // primal blocks
  RealVector y;                  // equality multipliers
  std::vector<ComplexMatrix> z;  // dual slack sum_i y_i A_i - C
  Status status = Status::max_iter;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double gap = 0.0;  // relative duality gap
  int iterations = 0;
  std::vector<IterationInfo> history;
};

// [[Re H, -Im H], [Im H, Re H]]. Throws NotHermitianError.
RealMatrix realify(const ComplexMatrix& h);

// Inverse of the embedding for a real symmetric 2n x 2n matrix that need not
// have the block structure: X = (Y11 + Y22)/2 + i (Y21 - Y12)/2.
ComplexMatrix complexify(const RealMatrix& y);

SdpSolution solve(const SdpProblem& problem, const Options& options = {});

struct VerifyReport {
  std::vector<double> residuals;          // A(X) - b per equality
  std::vector<double> eigenvalue_floors;  // lambda_min per primal block
  std::vector<double> dual_slack_floors;  // lambda_min per dual slack block
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double gap = 0.0;  // relative

  double max_residual() const;
  double min_eigenvalue() const;
  bool feasible(double residual_tol = 1e-7, double psd_tol = 1e-8) const;
};

// Recomputes residuals, objectives and eigenvalue floors from the complex data
// without reusing solver internals.
VerifyReport verify(const SdpProblem& problem, const SdpSolution& solution);

// Text dump, one record per line:
//   blocks <d_1> ... <d_B>
//   c <block> <row> <col> <re> <im>
//   a <constraint> <block> <row> <col> <re> <im>
//   b <constraint> <rhs>
// Indices are zero-based; upper triangle only.
void write_triplets(std::ostream& out, const SdpProblem& problem);

}  // namespace qmimo::sdp
