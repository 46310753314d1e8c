#include "qmimo/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>

#include "qmimo/error.hpp"
#include "qmimo/metrics.hpp"

namespace qmimo::decoder {

namespace {

using tensor::Complex;

void check_modes(const std::vector<int>& idx, int n, const char* what) {
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  for (int v : idx) {
    if (v < 0 || v >= n) throw LabelError(std::string(what) + ": mode out of range");
    if (seen[static_cast<std::size_t>(v)]) {
      throw DomainError(std::string(what) + ": repeated mode");
    }
    seen[static_cast<std::size_t>(v)] = true;
  }
}

// Channel Choi with every output outside r traced out; outputs ordered as r.
ComplexMatrix reduce_channel(const channel::ChannelChoi& h, const std::vector<int>& r) {
  const int n = h.params.modes;
  std::vector<std::size_t> keep;
  for (int i = 0; i < n; ++i) keep.push_back(static_cast<std::size_t>(i));
  for (int m : r) keep.push_back(static_cast<std::size_t>(n + m));
  return tensor::partial_trace_qubits(h.choi, 2 * n, keep);
}

ComplexMatrix embed_cloner(const cloner::ClonerChoi& cloner, int n,
                           const std::vector<int>& t) {
  const int m = cloner.clones;
  ComplexMatrix j = cloner.choi;
  if (n > m) {
    const auto pad = std::size_t{1} << (n - m);
    j = tensor::kron(j, tensor::identity(pad) / static_cast<double>(pad));
  }
  // Source layout: A', clones 0..M-1, idle modes. Target: A', modes 0..N-1.
  std::vector<std::size_t> order(static_cast<std::size_t>(n + 1));
  order[0] = 0;
  std::vector<int> clone_on(static_cast<std::size_t>(n), -1);
  for (int k = 0; k < m; ++k) clone_on[static_cast<std::size_t>(t[static_cast<std::size_t>(k)])] = k;
  std::size_t idle = static_cast<std::size_t>(m) + 1;
  for (int mode = 0; mode < n; ++mode) {
    const int k = clone_on[static_cast<std::size_t>(mode)];
    order[static_cast<std::size_t>(mode) + 1] =
        k >= 0 ? static_cast<std::size_t>(k) + 1 : idle++;
  }
  return tensor::permute_qubits(j, order);
}

EffectiveMap compose_reduced(const cloner::ClonerChoi& cloner, const ComplexMatrix& reduced,
                             int n, const std::vector<int>& t, const std::vector<int>& r) {
  const auto width = static_cast<int>(r.size());
  ComplexMatrix emb = embed_cloner(cloner, n, t);
  EffectiveMap out;
  out.choi = tensor::link_product(emb, 2, std::size_t{1} << n, reduced,
                                  std::size_t{1} << width);
  out.t = t;
  out.r = r;
  out.width = width;
  return out;
}

// Euclidean projection onto the probability simplex.
std::vector<double> simplex_projection(const std::vector<double>& z) {
  std::vector<double> s = z;
  std::sort(s.begin(), s.end(), std::greater<>());
  double cum = 0.0;
  double theta = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    cum += s[k];
    const double t = (cum - 1.0) / static_cast<double>(k + 1);
    if (s[k] - t > 0.0) theta = t;
  }
  std::vector<double> out(z.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    out[i] = std::max(z[i] - theta, 0.0);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
  return out;
}

double index_of(const std::vector<double>& gamma) {
  const auto f = cloner::clone_fidelities(cloner::AsymmetryVector(gamma));
  return metrics::asymmetry_index(f.fidelity).value_or(0.0);
}

// Nelder-Mead on z in R^M with gamma = projection(z); minimizes -surrogate.
template <typename Eval>
void nelder_mead(std::vector<double> start, Eval&& eval, int max_evals, double tol) {
  const std::size_t m = start.size();
  std::vector<std::vector<double>> pts;
  std::vector<double> val;
  pts.push_back(start);
  for (std::size_t i = 0; i < m; ++i) {
    auto p = start;
    p[i] += 0.1;
    pts.push_back(std::move(p));
  }
  int evals = 0;
  for (const auto& p : pts) {
    val.push_back(-eval(p));
    ++evals;
  }
  auto combine = [&](const std::vector<double>& a, const std::vector<double>& b, double w) {
    std::vector<double> out(m);
    for (std::size_t i = 0; i < m; ++i) out[i] = a[i] + w * (b[i] - a[i]);
    return out;
  };
  while (evals < max_evals) {
    std::vector<std::size_t> idx(pts.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return val[a] < val[b]; });
    const std::size_t best = idx.front();
    const std::size_t worst = idx.back();
    const std::size_t second = idx[idx.size() - 2];
    if (val[worst] - val[best] <= tol) break;
    std::vector<double> centroid(m, 0.0);
    for (std::size_t k = 0; k + 1 < idx.size(); ++k) {
      for (std::size_t i = 0; i < m; ++i) centroid[i] += pts[idx[k]][i] / static_cast<double>(m);
    }
    const auto refl = combine(centroid, pts[worst], -1.0);
    const double fr = -eval(refl);
    ++evals;
    if (fr < val[best]) {
      const auto exp = combine(centroid, pts[worst], -2.0);
      const double fe = -eval(exp);
      ++evals;
      if (fe < fr) {
        pts[worst] = exp;
        val[worst] = fe;
      } else {
        pts[worst] = refl;
        val[worst] = fr;
      }
      continue;
    }
    if (fr < val[second]) {
      pts[worst] = refl;
      val[worst] = fr;
      continue;
    }
    const bool outside = fr < val[worst];
    const auto con = combine(centroid, outside ? refl : pts[worst], 0.5);
    const double fc = -eval(con);
    ++evals;
    if (fc < std::min(fr, val[worst])) {
      pts[worst] = con;
      val[worst] = fc;
      continue;
    }
    for (std::size_t k = 1; k < idx.size(); ++k) {
      pts[idx[k]] = combine(pts[best], pts[idx[k]], 0.5);
      val[idx[k]] = -eval(pts[idx[k]]);
      ++evals;
    }
  }
}

}  // namespace

EffectiveMap compose_effective_map(const cloner::ClonerChoi& cloner,
                                   const channel::ChannelChoi& h,
                                   const std::vector<int>& t,
                                   const std::vector<int>& r) {
  const int n = h.params.modes;
  if (t.size() != static_cast<std::size_t>(cloner.clones)) {
    throw DimensionError("compose_effective_map: need one transmit mode per clone");
  }
  if (r.empty() || r.size() > static_cast<std::size_t>(n)) {
    throw DimensionError("compose_effective_map: receive set size must be in 1..N");
  }
  check_modes(t, n, "compose_effective_map");
  check_modes(r, n, "compose_effective_map");
  return compose_reduced(cloner, reduce_channel(h, r), n, t, r);
}

QROperators build_qr(const EffectiveMap& map) {
  const int k = map.width;
  const auto dk = static_cast<Eigen::Index>(std::size_t{1} << k);
  const ComplexMatrix& j = map.choi;
  if (j.rows() != 2 * dk) throw DimensionError("build_qr: Choi does not match width");
  const ComplexMatrix lam_i = j.block(0, 0, dk, dk) + j.block(dk, dk, dk, dk);
  ComplexMatrix q = tensor::kron(lam_i, tensor::identity(2));
  for (Eigen::Index a = 0; a < 2; ++a) {
    for (Eigen::Index b = 0; b < 2; ++b) {
      ComplexMatrix e = ComplexMatrix::Zero(2, 2);
      e(b, a) = 1.0;
      q += tensor::kron(j.block(a * dk, b * dk, dk, dk), e);
    }
  }
  q /= 6.0;
  const ComplexMatrix r = tensor::kron(lam_i / 2.0, tensor::identity(2));
  std::vector<std::size_t> a(static_cast<std::size_t>(k));
  std::iota(a.begin(), a.end(), 0);
  QROperators out;
  out.qt = tensor::hermitian_part(tensor::partial_transpose_qubits(q, k + 1, a));
  out.rt = tensor::hermitian_part(tensor::partial_transpose_qubits(r, k + 1, a));
  out.width = k;
  return out;
}

sdp::SdpProblem purification_problem(const QROperators& qr, double p) {
  if (!(p > 0.0 && p <= 1.0)) throw DomainError("purification_sdp: p outside (0, 1]");
  const std::size_t dk = std::size_t{1} << qr.width;
  sdp::SdpProblem problem;
  problem.blocks = {2 * dk, dk};
  problem.objective = {qr.qt, ComplexMatrix()};
  problem.constraints.push_back({{sdp::Term::dense(0, qr.rt, 0.0)}, p});
  // S + Tr_B J = I, tested against a Hermitian basis of the K-qubit space.
  auto add = [&](std::size_t a, std::size_t b, Complex v, double rhs) {
    sdp::Term js{0, {}};
    sdp::Term ss{1, {}};
    ss.entries.push_back({a, b, v});
    if (a != b) ss.entries.push_back({b, a, std::conj(v)});
    for (std::size_t o = 0; o < 2; ++o) {
      js.entries.push_back({2 * a + o, 2 * b + o, v});
      if (a != b) js.entries.push_back({2 * b + o, 2 * a + o, std::conj(v)});
    }
    problem.constraints.push_back({{std::move(js), std::move(ss)}, rhs});
  };
  for (std::size_t a = 0; a < dk; ++a) {
    add(a, a, 1.0, 1.0);
    for (std::size_t b = a + 1; b < dk; ++b) {
      add(a, b, 1.0, 0.0);
      add(a, b, Complex(0.0, 1.0), 0.0);
    }
  }
  return problem;
}

DecoderSolution purification_sdp(const QROperators& qr, double p,
                                 const sdp::Options& options) {
  const auto problem = purification_problem(qr, p);
  const auto sol = sdp::solve(problem, options);
  if (sol.status != sdp::Status::optimal) {
    throw ConvergenceError("purification_sdp: solver ended with status " +
                           sdp::to_string(sol.status));
  }
  DecoderSolution out;
  out.choi = tensor::hermitian_part(sol.x[0]);
  out.p_target = p;
  out.status = sol.status;
  out.report = sdp::verify(problem, sol);
  const double value = (out.choi.cwiseProduct(qr.qt.transpose())).sum().real();
  out.f_success = value / p;
  out.f_avg = p * out.f_success + (1.0 - p) / 2.0;
  return out;
}

RayleighBound rayleigh_bound(const QROperators& qr) {
  const auto er = tensor::hermitian_eig(qr.rt);
  std::vector<Eigen::Index> support;
  for (Eigen::Index k = 0; k < er.values.size(); ++k) {
    if (er.values(k) > tensor::kSupportTol) support.push_back(k);
  }
  if (support.empty()) throw DomainError("rayleigh_bound: R has empty support");
  const auto s = static_cast<Eigen::Index>(support.size());
  ComplexMatrix w(qr.rt.rows(), s);  // U_s D^{-1/2}
  for (Eigen::Index c = 0; c < s; ++c) {
    w.col(c) = er.vectors.col(support[static_cast<std::size_t>(c)]) /
               std::sqrt(er.values(support[static_cast<std::size_t>(c)]));
  }
  const ComplexMatrix m = tensor::hermitian_part(w.adjoint() * qr.qt * w);
  const auto em = tensor::hermitian_eig(m);
  RayleighBound out;
  out.value = em.values(s - 1);
  ComplexMatrix basis(qr.rt.rows(), s);
  for (Eigen::Index c = 0; c < s; ++c) {
    basis.col(c) = er.vectors.col(support[static_cast<std::size_t>(c)]);
  }
  out.vector = basis * em.vectors.col(s - 1);
  return out;
}

ComplexMatrix rank_one_certificate(const QROperators& qr, double p) {
  const auto rb = rayleigh_bound(qr);
  const ComplexMatrix rinv = tensor::psd_sqrt_pinv(qr.rt);
  const ComplexVector w = rinv * rb.vector;
  return p * (w * w.adjoint());
}

BlindEvaluation evaluate_decoder(const ComplexMatrix& decoder_choi,
                                 const QROperators& truth) {
  BlindEvaluation out;
  out.p_real = (decoder_choi.cwiseProduct(truth.rt.transpose())).sum().real();
  const double value = (decoder_choi.cwiseProduct(truth.qt.transpose())).sum().real();
  out.f_avg = value + (1.0 - out.p_real) / 2.0;
  return out;
}

QROperators blind_qr(int clones, int width) {
  if (clones != width) throw DomainError("blind_qr: requires M = K");
  static std::mutex mutex;
  static std::map<int, QROperators> cache;
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(clones); it != cache.end()) return it->second;
  }
  channel::ChannelParams params;
  params.modes = clones;
  params.lambda.assign(static_cast<std::size_t>(clones), 0.0);
  const auto h = channel::channel_choi(params);
  std::vector<int> modes(static_cast<std::size_t>(clones));
  std::iota(modes.begin(), modes.end(), 0);
  const auto e = cloner::cloner_choi(cloner::AsymmetryVector::uniform(clones));
  auto qr = build_qr(compose_effective_map(e, h, modes, modes));
  std::lock_guard lock(mutex);
  cache.emplace(clones, qr);
  return qr;
}

double surrogate_value(const std::vector<double>& gamma, const channel::ChannelChoi& h,
                       const std::vector<int>& t, const std::vector<int>& r,
                       const sdp::Options& options) {
  const auto e = cloner::cloner_choi(cloner::AsymmetryVector(gamma), options);
  return rayleigh_bound(build_qr(compose_effective_map(e, h, t, r))).value;
}

GammaResult optimize_gamma(int clones, const channel::ChannelChoi& h,
                           const std::vector<int>& t, const std::vector<int>& r,
                           double p, const GammaOptions& options) {
  if (clones < 1 || clones > cloner::kMaxClones) {
    throw DimensionError("optimize_gamma: M must be in 1..5");
  }
  const int n = h.params.modes;
  if (t.size() != static_cast<std::size_t>(clones)) {
    throw DimensionError("optimize_gamma: need one transmit mode per clone");
  }
  check_modes(t, n, "optimize_gamma");
  check_modes(r, n, "optimize_gamma");
  const ComplexMatrix reduced = reduce_channel(h, r);

  GammaResult result;
  auto eval = [&](const std::vector<double>& gamma) {
    const auto e = cloner::cloner_choi(cloner::AsymmetryVector(gamma), options.sdp);
    const double v = rayleigh_bound(build_qr(compose_reduced(e, reduced, n, t, r))).value;
    result.trace.push_back({gamma, v});
    return v;
  };

  if (clones == 1) {
    eval({1.0});
  } else if (clones <= 3) {
    for (const auto& g : cloner::simplex_grid(clones, options.grid_steps)) eval(g);
  } else {
    Rng rng(options.seed);
    std::vector<std::vector<double>> starts;
    starts.push_back(cloner::AsymmetryVector::uniform(clones).gamma());
    for (int k = 0; k < clones; ++k) {
      starts.push_back(cloner::AsymmetryVector::vertex(clones, k).gamma());
    }
    for (int s = 0; s < options.multistarts; ++s) {
      starts.push_back(rng.dirichlet(static_cast<std::size_t>(clones)));
    }
    std::vector<std::pair<double, std::size_t>> scored;
    for (std::size_t s = 0; s < starts.size(); ++s) scored.push_back({eval(starts[s]), s});
    std::stable_sort(scored.begin(), scored.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    const auto refine = std::min<std::size_t>(static_cast<std::size_t>(options.refine_starts),
                                              scored.size());
    for (std::size_t k = 0; k < refine; ++k) {
      nelder_mead(
          starts[scored[k].second],
          [&](const std::vector<double>& z) { return eval(simplex_projection(z)); },
          options.max_refine_evals, options.refine_tol);
    }
  }

  double best = -std::numeric_limits<double>::infinity();
  for (const auto& c : result.trace) best = std::max(best, c.surrogate);
  const GammaCandidate* pick = nullptr;
  double pick_index = -1.0;
  for (const auto& c : result.trace) {
    if (c.surrogate < best - options.tie_tol) continue;
    const double idx = index_of(c.gamma);
    const bool better =
        pick == nullptr || idx > pick_index + 1e-12 ||
        (std::abs(idx - pick_index) <= 1e-12 && c.gamma < pick->gamma);
    if (better) {
      pick = &c;
      pick_index = idx;
    }
  }
  result.gamma = pick->gamma;
  result.surrogate = pick->surrogate;
  const auto e = cloner::cloner_choi(cloner::AsymmetryVector(result.gamma), options.sdp);
  const auto qr = build_qr(compose_reduced(e, reduced, n, t, r));
  result.decoder = purification_sdp(qr, p, options.sdp);
  result.f_success = result.decoder.f_success;
  result.f_avg = result.decoder.f_avg;
  return result;
}

}  // namespace qmimo::decoder
