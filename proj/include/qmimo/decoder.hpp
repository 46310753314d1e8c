#pragma once

// Encoder-channel cascades, Haar-averaged fidelity operators, the
// probabilistic purification SDP and the Rayleigh surrogate used to pick the
// cloning asymmetry.
//
// Mode indices are zero-based. Decoder Choi layout: K input qubits, then the
// single output qubit B.

#include <cstdint>
#include <optional>
#include <vector>

#include "qmimo/channel.hpp"
#include "qmimo/cloner.hpp"
#include "qmimo/sdp.hpp"

namespace qmimo::decoder {

using tensor::ComplexMatrix;
using tensor::ComplexVector;

struct EffectiveMap {
  ComplexMatrix choi;  // 1 input qubit -> K output qubits
  std::vector<int> t;  // clone k travels on mode t[k]
  std::vector<int> r;  // decoder reads modes r, in this order
  int width = 0;       // K
};

struct QROperators {
  ComplexMatrix qt;  // Q^{T_A} on (K qubits, reference qubit)
  ComplexMatrix rt;  // R^{T_A}
  int width = 0;
};

struct DecoderSolution {
  ComplexMatrix choi;  // J_D
  double p_target = 1.0;
  double f_success = 0.0;
  double f_avg = 0.0;
  sdp::Status status = sdp::Status::optimal;
  sdp::VerifyReport report;
};

struct RayleighBound {
  double value = 0.0;
  ComplexVector vector;  // principal eigenvector of R^{-1/2} Q R^{-1/2}
};

// Places clone k on mode t[k], prepares I/2 on the other modes, applies the
// channel and keeps modes r.
EffectiveMap compose_effective_map(const cloner::ClonerChoi& cloner,
                                   const channel::ChannelChoi& h,
                                   const std::vector<int>& t,
                                   const std::vector<int>& r);

// Q = (Lambda (x) id)((I + S)/6), R = Lambda(I)/2 (x) I, both transposed on
// the K output qubits.
QROperators build_qr(const EffectiveMap& map);

// maximize Tr[J Qt] / p  s.t. Tr[J Rt] = p, J >= 0, Tr_B J <= I.
// The dominance constraint uses a slack block S with S + Tr_B J = I.
DecoderSolution purification_sdp(const QROperators& qr, double p,
                                 const sdp::Options& options = {});

sdp::SdpProblem purification_problem(const QROperators& qr, double p);

RayleighBound rayleigh_bound(const QROperators& qr);

// p R^{-1/2} |v><v| R^{-1/2} with v from rayleigh_bound.
ComplexMatrix rank_one_certificate(const QROperators& qr, double p);

// Decoder-side fidelity of an arbitrary decoder Choi on the true operators,
// with failures replaced by I/2: Tr[J Qt] + (1 - p_real)/2.
struct BlindEvaluation {
  double p_real = 0.0;
  double f_avg = 0.0;
};
BlindEvaluation evaluate_decoder(const ComplexMatrix& decoder_choi,
                                 const QROperators& truth);

// Operators of the symmetric 1 -> M cloner on the identity channel, cached per
// M. Requires M = K.
QROperators blind_qr(int clones, int width);

struct GammaCandidate {
  std::vector<double> gamma;
  double surrogate = 0.0;
};

struct GammaOptions {
  int grid_steps = 20;        // simplex grid for M <= 3
  int multistarts = 64;       // Dirichlet starts for M >= 4
  int refine_starts = 3;      // best starts refined by Nelder-Mead
  int max_refine_evals = 200;
  double refine_tol = 1e-4;
  double tie_tol = 1e-6;
  std::uint64_t seed = 0;
  sdp::Options sdp;
};

struct GammaResult {
  std::vector<double> gamma;
  double surrogate = 0.0;
  double f_success = 0.0;  // SDP at p
  double f_avg = 0.0;
  DecoderSolution decoder;
  std::vector<GammaCandidate> trace;
};

// Maximizes the Rayleigh surrogate over the simplex, then re-solves the SDP
// at p for the winner. Ties within tie_tol go to the highest asymmetry index
// of the closed-form fidelities, then the lexicographically smallest gamma.
GammaResult optimize_gamma(int clones, const channel::ChannelChoi& h,
                           const std::vector<int>& t, const std::vector<int>& r,
                           double p, const GammaOptions& options = {});

// Surrogate value of one gamma for the given cascade.
double surrogate_value(const std::vector<double>& gamma,
                       const channel::ChannelChoi& h, const std::vector<int>& t,
                       const std::vector<int>& r, const sdp::Options& options = {});

}  // namespace qmimo::decoder
