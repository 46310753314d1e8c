#pragma once

// The five transmission strategies and their fidelity records.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qmimo/channel.hpp"
#include "qmimo/decoder.hpp"

namespace qmimo::strategy {

enum class StrategyId { dir, pur, div, sym, blind };

std::string to_string(StrategyId s);
StrategyId parse_strategy(const std::string& name);  // throws ConfigError
const std::vector<StrategyId>& all_strategies();

struct FidelityRecord {
  StrategyId strategy = StrategyId::dir;
  channel::ChannelParams params;
  int m = 1;
  int k = 1;
  double z = 0.0;
  std::string regime;
  double p_target = 1.0;
  double p_real = 1.0;
  double mu = 0.0;
  int mean_id = 0;
  int realization_id = -1;
  double f_avg = 0.0;
  std::vector<double> gamma;
  std::optional<double> j_index;
  std::vector<int> t;
  std::vector<int> r;
  std::uint64_t seed = 0;
};

struct ModeSelection {
  std::vector<int> t;
  std::vector<int> r;
};

// t: the M least depolarized modes, ascending in lambda with ties by index.
// r: for each clone in turn, the unused receive mode with the highest
// single-branch fidelity (first such mode on ties); then, up to K modes, the
// remaining modes ascending.
ModeSelection select_modes(const std::vector<double>& lambda, int m, int k,
                           const channel::ChannelChoi& h);

// Haar-averaged fidelity of a lone qubit sent on mode `t` and read on `r`,
// all other inputs I/2.
double single_branch_fidelity(const channel::ChannelChoi& h, int t, int r);

struct StrategyConfig {
  int m = 1;
  int k = 1;
  double p = 1.0;
  decoder::GammaOptions gamma;
};

// Evaluates one strategy on one channel. Fills strategy, params, m, k,
// p_target, p_real, f_avg, gamma, j_index, t and r.
// dir: M = K = 1, p = 1. pur: M = 1. blind: M = K.
FidelityRecord run_strategy(StrategyId s, const channel::ChannelChoi& h,
                            const StrategyConfig& config);

// Decoder of the blind strategy at design probability p, cached per (M, p).
tensor::ComplexMatrix blind_decoder(int m, double p, const sdp::Options& options = {});

// Mean of F(p) - F(1) over records matched on everything except p.
double purification_gain(const std::vector<FidelityRecord>& at_p,
                         const std::vector<FidelityRecord>& at_1);

}  // namespace qmimo::strategy
