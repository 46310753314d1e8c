#include "qmimo/strategy.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>

#include "qmimo/error.hpp"
#include "qmimo/metrics.hpp"

namespace qmimo::strategy {

namespace {

// Clone fidelities of a lone signal on one of n modes.
std::optional<double> single_signal_index(int n) {
  std::vector<double> f(static_cast<std::size_t>(n), 0.5);
  f[0] = 1.0;
  return metrics::asymmetry_index(f);
}

void check_config(StrategyId s, const StrategyConfig& c, int n) {
  if (c.m < 1 || c.m > n) throw ConfigError("strategy: M must be in 1..N");
  if (c.k < 1 || c.k > n) throw ConfigError("strategy: K must be in 1..N");
  if (!(c.p > 0.0 && c.p <= 1.0)) throw ConfigError("strategy: p outside (0, 1]");
  switch (s) {
    case StrategyId::dir:
      if (c.m != 1 || c.k != 1 || c.p != 1.0) {
        throw ConfigError("strategy dir: requires M = K = 1 and p = 1");
      }
      break;
    case StrategyId::pur:
      if (c.m != 1) throw ConfigError("strategy pur: requires M = 1");
      break;
    case StrategyId::blind:
      if (c.m != c.k) throw ConfigError("strategy blind: requires M = K");
      break;
    default:
      break;
  }
}

}  // namespace

std::string to_string(StrategyId s) {
  switch (s) {
    case StrategyId::dir: return "dir";
    case StrategyId::pur: return "pur";
    case StrategyId::div: return "div";
    case StrategyId::sym: return "sym";
    case StrategyId::blind: return "blind";
  }
  return "unknown";
}

StrategyId parse_strategy(const std::string& name) {
  for (auto s : all_strategies()) {
    if (to_string(s) == name) return s;
  }
  throw ConfigError("unknown strategy '" + name + "'");
}

const std::vector<StrategyId>& all_strategies() {
  static const std::vector<StrategyId> all = {StrategyId::dir, StrategyId::pur,
                                              StrategyId::div, StrategyId::sym,
                                              StrategyId::blind};
  return all;
}

double single_branch_fidelity(const channel::ChannelChoi& h, int t, int r) {
  const auto id = cloner::ClonerChoi{tensor::phi_plus_unnormalized(), 1};
  const auto map = decoder::compose_effective_map(id, h, {t}, {r});
  const auto g = cloner::fidelity_functional(1, 0);
  return (map.choi.cwiseProduct(g.transpose())).sum().real();
}

ModeSelection select_modes(const std::vector<double>& lambda, int m, int k,
                           const channel::ChannelChoi& h) {
  const int n = static_cast<int>(lambda.size());
  if (m < 1 || m > n || k < 1 || k > n) throw DomainError("select_modes: bad M or K");
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return lambda[static_cast<std::size_t>(a)] < lambda[static_cast<std::size_t>(b)];
  });
  ModeSelection sel;
  sel.t.assign(order.begin(), order.begin() + m);
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  for (int c = 0; c < std::min(m, k); ++c) {
    int best = -1;
    double best_f = -1.0;
    for (int r = 0; r < n; ++r) {
      if (used[static_cast<std::size_t>(r)]) continue;
      const double f = single_branch_fidelity(h, sel.t[static_cast<std::size_t>(c)], r);
      if (f > best_f + 1e-12) {
        best_f = f;
        best = r;
      }
    }
    sel.r.push_back(best);
    used[static_cast<std::size_t>(best)] = true;
  }
  for (int r = 0; r < n && static_cast<int>(sel.r.size()) < k; ++r) {
    if (!used[static_cast<std::size_t>(r)]) {
      sel.r.push_back(r);
      used[static_cast<std::size_t>(r)] = true;
    }
  }
  return sel;
}

tensor::ComplexMatrix blind_decoder(int m, double p, const sdp::Options& options) {
  static std::mutex mutex;
  static std::map<std::pair<int, long long>, tensor::ComplexMatrix> cache;
  const std::pair<int, long long> key{m, std::llround(p * 1e12)};
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  auto sol = decoder::purification_sdp(decoder::blind_qr(m, m), p, options);
  std::lock_guard lock(mutex);
  cache.emplace(key, sol.choi);
  return sol.choi;
}

FidelityRecord run_strategy(StrategyId s, const channel::ChannelChoi& h,
                            const StrategyConfig& config) {
  const int n = h.params.modes;
  check_config(s, config, n);
  FidelityRecord rec;
  rec.strategy = s;
  rec.params = h.params;
  rec.m = config.m;
  rec.k = config.k;
  rec.p_target = config.p;
  rec.p_real = config.p;
  const auto& lambda = h.params.lambda;

  switch (s) {
    case StrategyId::dir: {
      const auto sel = select_modes(lambda, 1, 1, h);
      rec.t = sel.t;
      rec.r = sel.r;
      rec.f_avg = single_branch_fidelity(h, sel.t[0], sel.r[0]);
      rec.gamma = {1.0};
      rec.j_index = single_signal_index(n);
      break;
    }
    case StrategyId::pur: {
      const auto sel = select_modes(lambda, 1, config.k, h);
      rec.t = sel.t;
      rec.r = sel.r;
      const auto id = cloner::ClonerChoi{tensor::phi_plus_unnormalized(), 1};
      const auto qr = decoder::build_qr(decoder::compose_effective_map(id, h, sel.t, sel.r));
      rec.f_avg = decoder::purification_sdp(qr, config.p, config.gamma.sdp).f_avg;
      rec.gamma = {1.0};
      rec.j_index = single_signal_index(n);
      break;
    }
    case StrategyId::div: {
      const auto sel = select_modes(lambda, config.m, config.k, h);
      rec.t = sel.t;
      rec.r = sel.r;
      const auto res = decoder::optimize_gamma(config.m, h, sel.t, sel.r, config.p, config.gamma);
      rec.f_avg = res.f_avg;
      rec.gamma = res.gamma;
      rec.j_index = metrics::asymmetry_index(
          cloner::clone_fidelities(cloner::AsymmetryVector(res.gamma)).fidelity);
      break;
    }
    case StrategyId::sym: {
      const auto sel = select_modes(lambda, config.m, config.k, h);
      rec.t = sel.t;
      rec.r = sel.r;
      const auto g = cloner::AsymmetryVector::uniform(config.m);
      const auto e = cloner::cloner_choi(g, config.gamma.sdp);
      const auto qr = decoder::build_qr(decoder::compose_effective_map(e, h, sel.t, sel.r));
      rec.f_avg = decoder::purification_sdp(qr, config.p, config.gamma.sdp).f_avg;
      rec.gamma = g.gamma();
      rec.j_index = metrics::asymmetry_index(cloner::clone_fidelities(g).fidelity);
      break;
    }
    case StrategyId::blind: {
      rec.t.resize(static_cast<std::size_t>(config.m));
      std::iota(rec.t.begin(), rec.t.end(), 0);
      rec.r = rec.t;
      const auto g = cloner::AsymmetryVector::uniform(config.m);
      const auto e = cloner::cloner_choi(g, config.gamma.sdp);
      const auto truth = decoder::build_qr(decoder::compose_effective_map(e, h, rec.t, rec.r));
      const auto jb = blind_decoder(config.m, config.p, config.gamma.sdp);
      const auto ev = decoder::evaluate_decoder(jb, truth);
      rec.p_real = ev.p_real;
      rec.f_avg = ev.f_avg;
      rec.gamma = g.gamma();
      rec.j_index = metrics::asymmetry_index(cloner::clone_fidelities(g).fidelity);
      break;
    }
  }
  return rec;
}

double purification_gain(const std::vector<FidelityRecord>& at_p,
                         const std::vector<FidelityRecord>& at_1) {
  if (at_p.size() != at_1.size() || at_p.empty()) {
    throw DomainError("purification_gain: record lists do not match");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < at_p.size(); ++i) {
    const auto& a = at_p[i];
    const auto& b = at_1[i];
    const bool same = a.strategy == b.strategy && a.params.modes == b.params.modes &&
                      a.params.lambda == b.params.lambda && a.params.eta == b.params.eta &&
                      a.params.delta == b.params.delta && a.m == b.m && a.k == b.k &&
                      a.mean_id == b.mean_id && a.realization_id == b.realization_id &&
                      a.mu == b.mu;
    if (!same) throw DomainError("purification_gain: parameter mismatch");
    acc += a.f_avg - b.f_avg;
  }
  return acc / static_cast<double>(at_p.size());
}

}  // namespace qmimo::strategy
