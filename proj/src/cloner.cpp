#include "qmimo/cloner.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <shared_mutex>

#include "qmimo/error.hpp"

namespace qmimo::cloner {

namespace {

using tensor::Complex;

constexpr double kSimplexTol = 1e-10;

struct PermutationFamily {
  int n = 0;
  std::vector<std::vector<std::size_t>> maps;  // basis index -> image
  RealMatrix gram_pinv;
};

std::vector<std::vector<int>> all_permutations(int n) {
  std::vector<int> p(static_cast<std::size_t>(n));
  std::iota(p.begin(), p.end(), 0);
  std::vector<std::vector<int>> out;
  do {
    out.push_back(p);
  } while (std::next_permutation(p.begin(), p.end()));
  return out;
}

std::shared_ptr<const PermutationFamily> permutation_family(int n) {
  static std::mutex mutex;
  static std::map<int, std::shared_ptr<const PermutationFamily>> cache;
  std::lock_guard lock(mutex);
  if (auto it = cache.find(n); it != cache.end()) return it->second;

  auto fam = std::make_shared<PermutationFamily>();
  fam->n = n;
  const auto perms = all_permutations(n);
  const std::size_t dim = std::size_t{1} << n;
  const auto un = static_cast<std::size_t>(n);
  for (const auto& p : perms) {
    std::vector<std::size_t> map(dim);
    for (std::size_t x = 0; x < dim; ++x) {
      std::size_t y = 0;
      for (std::size_t q = 0; q < un; ++q) {
        if ((x >> (un - 1 - q)) & 1U) {
          y |= std::size_t{1} << (un - 1 - static_cast<std::size_t>(p[q]));
        }
      }
      map[x] = y;
    }
    fam->maps.push_back(std::move(map));
  }
  // Gram entries Tr[P_s^T P_t] = #{x : P_s x = P_t x}.
  const auto count = static_cast<Eigen::Index>(perms.size());
  RealMatrix gram(count, count);
  for (Eigen::Index s = 0; s < count; ++s) {
    for (Eigen::Index t = s; t < count; ++t) {
      const auto& ms = fam->maps[static_cast<std::size_t>(s)];
      const auto& mt = fam->maps[static_cast<std::size_t>(t)];
      double c = 0.0;
      for (std::size_t x = 0; x < dim; ++x) c += ms[x] == mt[x] ? 1.0 : 0.0;
      gram(s, t) = c;
      gram(t, s) = c;
    }
  }
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(gram);
  const double cutoff = 1e-10 * es.eigenvalues().cwiseAbs().maxCoeff();
  RealMatrix pinv = RealMatrix::Zero(count, count);
  for (Eigen::Index k = 0; k < count; ++k) {
    const double w = es.eigenvalues()(k);
    if (w > cutoff) {
      pinv += (1.0 / w) * es.eigenvectors().col(k) * es.eigenvectors().col(k).transpose();
    }
  }
  fam->gram_pinv = std::move(pinv);
  cache.emplace(n, fam);
  return fam;
}

// Power iteration for the Perron pair of a positive matrix.
std::pair<double, tensor::RealVector> perron(const RealMatrix& a) {
  const Eigen::Index n = a.rows();
  tensor::RealVector u = tensor::RealVector::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
  double value = 0.0;
  for (int it = 0; it < 10000; ++it) {
    tensor::RealVector w = a * u;
    value = w.norm();
    w /= value;
    const double change = (w - u).cwiseAbs().maxCoeff();
    u = w;
    if (change <= 1e-12) return {value, u};
  }
  throw ConvergenceError("clone_amplitudes: power iteration did not converge");
}

struct MemoKey {
  int m;
  std::vector<long long> q;
  double tol;
  auto operator<=>(const MemoKey&) const = default;
};

ComplexMatrix cloner_sdp(const AsymmetryVector& gamma, const sdp::Options& options) {
  const int m = gamma.size();
  const std::size_t dim = std::size_t{2} << m;
  const std::size_t dout = std::size_t{1} << m;
  ComplexMatrix c = ComplexMatrix::Zero(static_cast<Eigen::Index>(dim),
                                        static_cast<Eigen::Index>(dim));
  for (int k = 0; k < m; ++k) c += (gamma[k] + kTiebreak) * fidelity_functional(m, k);

  sdp::SdpProblem problem;
  problem.blocks = {dim};
  problem.objective = {c};
  // Tr_out J = I_2 as four real equations.
  auto add = [&](std::size_t a, std::size_t b, Complex v, double rhs) {
    sdp::Constraint con;
    sdp::Term t{0, {}};
    for (std::size_t o = 0; o < dout; ++o) {
      t.entries.push_back({a * dout + o, b * dout + o, v});
      if (a != b) t.entries.push_back({b * dout + o, a * dout + o, std::conj(v)});
    }
    con.terms.push_back(std::move(t));
    con.rhs = rhs;
    problem.constraints.push_back(std::move(con));
  };
  add(0, 0, 1.0, 1.0);
  add(1, 1, 1.0, 1.0);
  add(0, 1, 1.0, 0.0);
  add(0, 1, Complex(0.0, 1.0), 0.0);

  const auto sol = sdp::solve(problem, options);
  if (sol.status != sdp::Status::optimal) {
    throw ConvergenceError("cloner_choi: SDP ended with status " +
                           sdp::to_string(sol.status));
  }
  return tensor::hermitian_part(sol.x[0]);
}

}  // namespace

AsymmetryVector::AsymmetryVector(std::vector<double> gamma) : gamma_(std::move(gamma)) {
  if (gamma_.empty()) throw DomainError("AsymmetryVector: empty");
  if (gamma_.size() > static_cast<std::size_t>(kMaxClones)) {
    throw DimensionError("AsymmetryVector: more than 5 clones");
  }
  double sum = 0.0;
  for (double g : gamma_) {
    if (!(g >= -kSimplexTol)) throw DomainError("AsymmetryVector: negative weight");
    sum += g;
  }
  if (std::abs(sum - 1.0) > kSimplexTol) {
    throw DomainError("AsymmetryVector: weights do not sum to 1");
  }
  for (double& g : gamma_) g = std::max(g, 0.0) / sum;
}

AsymmetryVector AsymmetryVector::uniform(int m) {
  return AsymmetryVector(std::vector<double>(static_cast<std::size_t>(m), 1.0 / m));
}

AsymmetryVector AsymmetryVector::vertex(int m, int k) {
  std::vector<double> g(static_cast<std::size_t>(m), 0.0);
  g.at(static_cast<std::size_t>(k)) = 1.0;
  return AsymmetryVector(std::move(g));
}

std::vector<double> AsymmetryVector::alpha() const {
  const double s = std::accumulate(gamma_.begin(), gamma_.end(), 0.0);
  std::vector<double> a = gamma_;
  for (double& v : a) v /= s;
  return a;
}

RealMatrix weight_matrix(const AsymmetryVector& gamma) {
  const auto a = gamma.alpha();
  const auto m = static_cast<Eigen::Index>(a.size());
  RealMatrix w(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      w(i, j) = a[static_cast<std::size_t>(i)] + (i == j ? a[static_cast<std::size_t>(i)] : 0.0);
    }
  }
  return w;
}

CloneAmplitudes clone_amplitudes(const AsymmetryVector& gamma) {
  const int m = gamma.size();
  std::vector<Eigen::Index> support;
  for (int k = 0; k < m; ++k) {
    if (gamma[k] > 0.0) support.push_back(k);
  }
  const RealMatrix full = weight_matrix(gamma);
  const auto s = static_cast<Eigen::Index>(support.size());
  RealMatrix a(s, s);
  for (Eigen::Index i = 0; i < s; ++i) {
    for (Eigen::Index j = 0; j < s; ++j) a(i, j) = full(support[i], support[j]);
  }
  const auto [value, u] = perron(a);
  CloneAmplitudes out;
  out.perron_value = value;
  out.perron_vector.assign(static_cast<std::size_t>(m), 0.0);
  for (Eigen::Index i = 0; i < s; ++i) {
    out.perron_vector[static_cast<std::size_t>(support[i])] = std::abs(u(i));
  }
  const double su = std::accumulate(out.perron_vector.begin(), out.perron_vector.end(), 0.0);
  const double scale = std::sqrt(2.0 / (su * su + 1.0));
  out.beta = out.perron_vector;
  for (double& b : out.beta) b *= scale;
  return out;
}

CloneFidelityVector clone_fidelities(const AsymmetryVector& gamma) {
  const auto amp = clone_amplitudes(gamma);
  const double sb = std::accumulate(amp.beta.begin(), amp.beta.end(), 0.0);
  CloneFidelityVector out;
  out.gamma = gamma.gamma();
  for (double b : amp.beta) {
    const double t = b + sb;
    out.fidelity.push_back(1.0 / 3.0 + t * t / 6.0);
  }
  return out;
}

ComplexMatrix fidelity_functional(int clones, int k) {
  if (k < 0 || k >= clones) throw LabelError("fidelity_functional: bad clone index");
  const int n = clones + 1;
  ComplexMatrix pair = (tensor::identity(4) + tensor::phi_plus_unnormalized()) / 6.0;
  ComplexMatrix g = tensor::kron(pair, tensor::identity(std::size_t{1} << (clones - 1)));
  // Current layout: A', clone k, remaining clones in order.
  std::vector<std::size_t> order(static_cast<std::size_t>(n));
  order[0] = 0;
  std::size_t next = 2;
  for (int q = 0; q < clones; ++q) {
    order[static_cast<std::size_t>(q + 1)] = q == k ? 1 : next++;
  }
  return tensor::permute_qubits(g, order);
}

std::vector<double> choi_fidelities(const ClonerChoi& cloner) {
  std::vector<double> out;
  for (int k = 0; k < cloner.clones; ++k) {
    const auto g = fidelity_functional(cloner.clones, k);
    out.push_back((cloner.choi.cwiseProduct(g.transpose())).sum().real());
  }
  return out;
}

ComplexMatrix twirl_permutation_algebra(const ComplexMatrix& x, int n) {
  if (n < 1 || n > 6) {
    throw DimensionError("twirl_permutation_algebra: n must be in 1..6");
  }
  const std::size_t dim = std::size_t{1} << n;
  if (static_cast<std::size_t>(x.rows()) != dim || x.rows() != x.cols()) {
    throw DimensionError("twirl_permutation_algebra: matrix does not match n");
  }
  const auto fam = permutation_family(n);
  const auto count = static_cast<Eigen::Index>(fam->maps.size());
  tensor::ComplexVector b(count);
  for (Eigen::Index s = 0; s < count; ++s) {
    const auto& map = fam->maps[static_cast<std::size_t>(s)];
    Complex acc = 0.0;
    for (std::size_t v = 0; v < dim; ++v) {
      acc += x(static_cast<Eigen::Index>(map[v]), static_cast<Eigen::Index>(v));
    }
    b(s) = acc;
  }
  const tensor::ComplexVector coef = fam->gram_pinv.cast<Complex>() * b;
  ComplexMatrix out = ComplexMatrix::Zero(x.rows(), x.cols());
  for (Eigen::Index s = 0; s < count; ++s) {
    const auto& map = fam->maps[static_cast<std::size_t>(s)];
    for (std::size_t v = 0; v < dim; ++v) {
      out(static_cast<Eigen::Index>(map[v]), static_cast<Eigen::Index>(v)) += coef(s);
    }
  }
  return out;
}

ClonerChoi cloner_choi(const AsymmetryVector& gamma, const sdp::Options& options) {
  static std::shared_mutex mutex;
  static std::map<MemoKey, ClonerChoi> memo;
  MemoKey key{gamma.size(), {}, options.tol};
  for (double g : gamma.gamma()) key.q.push_back(std::llround(g * 1e9));
  {
    std::shared_lock lock(mutex);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
  }
  const int m = gamma.size();
  const int n = m + 1;
  ComplexMatrix j = cloner_sdp(gamma, options);
  const std::size_t input[] = {0};
  ComplexMatrix t = tensor::partial_transpose_qubits(j, n, input);
  t = twirl_permutation_algebra(t, n);
  j = tensor::hermitian_part(tensor::partial_transpose_qubits(t, n, input));
  ClonerChoi out{std::move(j), m};
  std::unique_lock lock(mutex);
  memo.emplace(std::move(key), out);
  return out;
}

std::vector<std::vector<double>> simplex_grid(int dim, int steps) {
  std::vector<std::vector<double>> out;
  std::vector<int> counts(static_cast<std::size_t>(dim), 0);
  // Lexicographic enumeration of compositions of `steps` into `dim` parts.
  auto rec = [&](auto&& self, int pos, int remaining) -> void {
    if (pos == dim - 1) {
      counts[static_cast<std::size_t>(pos)] = remaining;
      std::vector<double> g;
      for (int c : counts) g.push_back(static_cast<double>(c) / steps);
      out.push_back(std::move(g));
      return;
    }
    for (int c = 0; c <= remaining; ++c) {
      counts[static_cast<std::size_t>(pos)] = c;
      self(self, pos + 1, remaining - c);
    }
  };
  rec(rec, 0, steps);
  return out;
}

std::vector<CloneFidelityVector> feasible_boundary(int clones, double grid_resolution) {
  if (clones < 2 || clones > 3) throw DomainError("feasible_boundary: M must be 2 or 3");
  if (!(grid_resolution > 0.0) || grid_resolution > 0.25) {
    throw DomainError("feasible_boundary: grid resolution must be in (0, 0.25]");
  }
  const int steps = static_cast<int>(std::lround(1.0 / grid_resolution));
  std::vector<CloneFidelityVector> out;
  for (auto& g : simplex_grid(clones, steps)) {
    out.push_back(clone_fidelities(AsymmetryVector(std::move(g))));
  }
  return out;
}

}  // namespace qmimo::cloner
