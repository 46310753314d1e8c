#include "qmimo/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <ostream>

#include "qmimo/error.hpp"

namespace qmimo::sdp {

namespace {

struct RealEntry {
  Eigen::Index row;
  Eigen::Index col;
  double value;
};

struct RealTerm {
  std::size_t block;
  std::vector<RealEntry> entries;
  bool dense = false;
  RealMatrix matrix;  // populated when dense
};

struct RealConstraint {
  std::vector<RealTerm> terms;
  double rhs;
};

using Blocks = std::vector<RealMatrix>;

// Realified coefficient matrix scaled by 1/2, so Tr[A~ Y] = Tr[A X].
std::vector<RealEntry> realify_entries(const std::vector<Entry>& entries,
                                       std::size_t n) {
  std::map<std::pair<Eigen::Index, Eigen::Index>, double> acc;
  const auto d = static_cast<Eigen::Index>(n);
  for (const auto& e : entries) {
    const auto r = static_cast<Eigen::Index>(e.row);
    const auto c = static_cast<Eigen::Index>(e.col);
    const double re = 0.5 * e.value.real();
    const double im = 0.5 * e.value.imag();
    if (re != 0.0) {
      acc[{r, c}] += re;
      acc[{r + d, c + d}] += re;
    }
    if (im != 0.0) {
      acc[{r, c + d}] -= im;
      acc[{r + d, c}] += im;
    }
  }
  std::vector<RealEntry> out;
  out.reserve(acc.size());
  for (const auto& [key, v] : acc) {
    if (v != 0.0) out.push_back({key.first, key.second, v});
  }
  return out;
}

double frob_sq(const Blocks& b) {
  double s = 0.0;
  for (const auto& m : b) s += m.squaredNorm();
  return s;
}

double inner(const Blocks& a, const Blocks& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k].cwiseProduct(b[k]).sum();
  return s;
}

class RealSdp {
 public:
  RealSdp(const SdpProblem& p) {
    for (auto d : p.blocks) dims_.push_back(static_cast<Eigen::Index>(2 * d));
    for (std::size_t b = 0; b < p.blocks.size(); ++b) {
      const auto n = dims_[b];
      if (b < p.objective.size() && p.objective[b].size() > 0) {
        c_.push_back(0.5 * realify(p.objective[b]));
      } else {
        c_.push_back(RealMatrix::Zero(n, n));
      }
    }
    for (const auto& con : p.constraints) {
      RealConstraint rc;
      rc.rhs = con.rhs;
      std::map<std::size_t, std::vector<Entry>> per_block;
      for (const auto& t : con.terms) {
        auto& v = per_block[t.block];
        v.insert(v.end(), t.entries.begin(), t.entries.end());
      }
      for (auto& [block, entries] : per_block) {
        RealTerm term;
        term.block = block;
        term.entries = realify_entries(entries, p.blocks[block]);
        if (term.entries.empty()) continue;
        const auto n = dims_[block];
        if (static_cast<Eigen::Index>(term.entries.size()) > 2 * n) {
          term.dense = true;
          term.matrix = RealMatrix::Zero(n, n);
          for (const auto& e : term.entries) term.matrix(e.row, e.col) += e.value;
        }
        rc.terms.push_back(std::move(term));
      }
      a_.push_back(std::move(rc));
    }
    b_.resize(static_cast<Eigen::Index>(a_.size()));
    for (std::size_t i = 0; i < a_.size(); ++i) {
      b_(static_cast<Eigen::Index>(i)) = a_[i].rhs;
    }
  }

  std::size_t m() const { return a_.size(); }
  const std::vector<Eigen::Index>& dims() const { return dims_; }
  const Blocks& c() const { return c_; }
  const RealVector& b() const { return b_; }
  const std::vector<RealConstraint>& a() const { return a_; }

  Blocks zeros() const {
    Blocks out;
    for (auto n : dims_) out.push_back(RealMatrix::Zero(n, n));
    return out;
  }

  // A(W)_i = sum Tr[A_i W].
  RealVector apply(const Blocks& w) const {
    RealVector out(static_cast<Eigen::Index>(a_.size()));
    for (std::size_t i = 0; i < a_.size(); ++i) {
      double s = 0.0;
      for (const auto& t : a_[i].terms) {
        const auto& wb = w[t.block];
        for (const auto& e : t.entries) s += e.value * wb(e.col, e.row);
      }
      out(static_cast<Eigen::Index>(i)) = s;
    }
    return out;
  }

  // A^T(y) = sum_i y_i A_i.
  Blocks adjoint(const RealVector& y) const {
    Blocks out = zeros();
    for (std::size_t i = 0; i < a_.size(); ++i) {
      const double yi = y(static_cast<Eigen::Index>(i));
      if (yi == 0.0) continue;
      for (const auto& t : a_[i].terms) {
        auto& ob = out[t.block];
        for (const auto& e : t.entries) ob(e.row, e.col) += yi * e.value;
      }
    }
    return out;
  }

  // HKM Schur complement M_ij = Tr[A_i X A_j Z^{-1}].
  RealMatrix schur(const Blocks& x, const Blocks& zinv) const {
    const auto m = static_cast<Eigen::Index>(a_.size());
    std::vector<std::vector<RealMatrix>> t(a_.size());
    for (std::size_t j = 0; j < a_.size(); ++j) {
      for (const auto& term : a_[j].terms) {
        if (term.dense) {
          t[j].push_back(x[term.block] * term.matrix * zinv[term.block]);
        } else {
          t[j].emplace_back();
        }
      }
    }
    RealMatrix out = RealMatrix::Zero(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
      const auto& ci = a_[static_cast<std::size_t>(i)];
      for (Eigen::Index j = i; j < m; ++j) {
        const auto& cj = a_[static_cast<std::size_t>(j)];
        double s = 0.0;
        for (std::size_t ti = 0; ti < ci.terms.size(); ++ti) {
          const auto& term_i = ci.terms[ti];
          for (std::size_t tj = 0; tj < cj.terms.size(); ++tj) {
            const auto& term_j = cj.terms[tj];
            if (term_i.block != term_j.block) continue;
            if (term_j.dense) {
              const auto& tm = t[static_cast<std::size_t>(j)][tj];
              for (const auto& e : term_i.entries) s += e.value * tm(e.col, e.row);
            } else if (term_i.dense) {
              const auto& tm = t[static_cast<std::size_t>(i)][ti];
              for (const auto& e : term_j.entries) s += e.value * tm(e.col, e.row);
            } else {
              const auto& xb = x[term_i.block];
              const auto& zb = zinv[term_i.block];
              for (const auto& ei : term_i.entries) {
                for (const auto& ej : term_j.entries) {
                  s += ei.value * ej.value * xb(ei.col, ej.row) * zb(ej.col, ei.row);
                }
              }
            }
          }
        }
        out(i, j) = s;
        out(j, i) = s;
      }
    }
    return out;
  }

 private:
  std::vector<Eigen::Index> dims_;
  Blocks c_;
  std::vector<RealConstraint> a_;
  RealVector b_;
};

// Largest step a with X + a dX >= 0, given the Cholesky factor of X.
double max_step(const Eigen::LLT<RealMatrix>& llt, const RealMatrix& dx) {
  const RealMatrix l = llt.matrixL();
  RealMatrix w = l.triangularView<Eigen::Lower>().solve(dx);
  w = l.triangularView<Eigen::Lower>().solve(w.transpose()).transpose();
  w = 0.5 * (w + w.transpose());
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(w, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  return lo < 0.0 ? -1.0 / lo : std::numeric_limits<double>::infinity();
}

RealMatrix symmetrize(const RealMatrix& m) { return 0.5 * (m + m.transpose()); }

}  // namespace

Term Term::dense(std::size_t block, const ComplexMatrix& a, double drop_tol) {
  Term t{block, {}};
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      if (std::abs(a(i, j)) > drop_tol) {
        t.entries.push_back(
            {static_cast<std::size_t>(i), static_cast<std::size_t>(j), a(i, j)});
      }
    }
  }
  return t;
}

std::string to_string(Status s) {
  switch (s) {
    case Status::optimal: return "optimal";
    case Status::infeasible: return "infeasible";
    case Status::unbounded: return "unbounded";
    case Status::max_iter: return "max_iter";
  }
  return "unknown";
}

void SdpProblem::validate() const {
  if (blocks.empty()) throw DimensionError("sdp: no blocks");
  for (auto d : blocks) {
    if (d == 0) throw DimensionError("sdp: empty block");
  }
  if (objective.size() > blocks.size()) {
    throw DimensionError("sdp: more objective blocks than variable blocks");
  }
  for (std::size_t b = 0; b < objective.size(); ++b) {
    const auto& c = objective[b];
    if (c.size() == 0) continue;
    if (static_cast<std::size_t>(c.rows()) != blocks[b] ||
        static_cast<std::size_t>(c.cols()) != blocks[b]) {
      throw DimensionError("sdp: objective block has wrong shape");
    }
    if (!tensor::is_hermitian(c)) {
      throw NotHermitianError("sdp: objective block is not Hermitian");
    }
  }
  for (const auto& con : constraints) {
    for (const auto& t : con.terms) {
      if (t.block >= blocks.size()) throw DimensionError("sdp: bad block index");
      const auto d = static_cast<Eigen::Index>(blocks[t.block]);
      ComplexMatrix a = ComplexMatrix::Zero(d, d);
      for (const auto& e : t.entries) {
        if (e.row >= blocks[t.block] || e.col >= blocks[t.block]) {
          throw DimensionError("sdp: coefficient index out of range");
        }
        a(static_cast<Eigen::Index>(e.row), static_cast<Eigen::Index>(e.col)) +=
            e.value;
      }
      if (!tensor::is_hermitian(a)) {
        throw NotHermitianError("sdp: constraint coefficient is not Hermitian");
      }
    }
  }
  if (realified_dimension() > std::numeric_limits<std::size_t>::max() / 2) {
    throw DimensionError("sdp: dimension overflow");
  }
}

std::size_t SdpProblem::realified_dimension() const {
  std::size_t n = 0;
  for (auto d : blocks) n += 2 * d;
  return n;
}

RealMatrix realify(const ComplexMatrix& h) {
  if (!tensor::is_hermitian(h)) {
    throw NotHermitianError("realify: input is not Hermitian");
  }
  const Eigen::Index n = h.rows();
  RealMatrix out(2 * n, 2 * n);
  const RealMatrix re = h.real();
  const RealMatrix im = h.imag();
  out.topLeftCorner(n, n) = re;
  out.topRightCorner(n, n) = -im;
  out.bottomLeftCorner(n, n) = im;
  out.bottomRightCorner(n, n) = re;
  return out;
}

ComplexMatrix complexify(const RealMatrix& y) {
  if (y.rows() != y.cols() || y.rows() % 2 != 0) {
    throw DimensionError("complexify: expected a square matrix of even size");
  }
  const Eigen::Index n = y.rows() / 2;
  ComplexMatrix out(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      out(i, j) = Complex(0.5 * (y(i, j) + y(i + n, j + n)),
                          0.5 * (y(i + n, j) - y(i, j + n)));
    }
  }
  return out;
}

SdpSolution solve(const SdpProblem& problem, const Options& options) {
  problem.validate();
  if (problem.realified_dimension() > options.dimension_cap) {
    throw DimensionError("sdp: realified dimension " +
                         std::to_string(problem.realified_dimension()) +
                         " exceeds cap " + std::to_string(options.dimension_cap));
  }
  const RealSdp sdp(problem);
  const auto m = static_cast<Eigen::Index>(sdp.m());
  const auto& dims = sdp.dims();
  const std::size_t nb = dims.size();

  // Internally: minimize <Cm, X> with Cm = -C; dual slack Z = Cm - A^T y.
  Blocks cm;
  for (const auto& c : sdp.c()) cm.push_back(-c);
  const RealVector& b = sdp.b();
  const double norm_b = b.norm();
  const double norm_c = std::sqrt(frob_sq(cm));
  double n_total = 0.0;
  for (auto n : dims) n_total += static_cast<double>(n);

  Blocks x;
  Blocks z;
  for (std::size_t k = 0; k < nb; ++k) {
    const auto n = dims[k];
    const double sn = std::sqrt(static_cast<double>(n));
    double xi = std::max(10.0, sn);
    double zeta = std::max({10.0, sn, cm[k].norm()});
    for (const auto& con : sdp.a()) {
      for (const auto& t : con.terms) {
        if (t.block != k) continue;
        double an = 0.0;
        for (const auto& e : t.entries) an += e.value * e.value;
        an = std::sqrt(an);
        xi = std::max(xi, static_cast<double>(n) * (1.0 + std::abs(con.rhs)) /
                              (1.0 + an));
        zeta = std::max(zeta, an);
      }
    }
    zeta *= sn;
    x.push_back(xi * RealMatrix::Identity(n, n));
    z.push_back(zeta * RealMatrix::Identity(n, n));
  }
  RealVector y = RealVector::Zero(m);

  SdpSolution sol;
  Status status = Status::max_iter;
  int polish = 2;
  Blocks best_x, best_z;
  RealVector best_y;
  int iter = 0;
  for (; iter <= options.max_iter; ++iter) {
    const RealVector ax = sdp.apply(x);
    const RealVector rp = b - ax;
    const Blocks aty = sdp.adjoint(y);
    Blocks rd(nb);
    for (std::size_t k = 0; k < nb; ++k) rd[k] = cm[k] - z[k] - aty[k];
    const double pobj = inner(cm, x);
    const double dobj = b.dot(y);
    const double pinf = rp.norm() / (1.0 + norm_b);
    const double dinf = std::sqrt(frob_sq(rd)) / (1.0 + norm_c);
    const double xz = inner(x, z);
    const double mu = xz / n_total;
    const double denom = 1.0 + std::abs(pobj) + std::abs(dobj);
    const double rel_gap = std::max(std::abs(pobj - dobj), xz) / denom;
    sol.history.push_back({-pobj, -dobj, pinf, dinf, mu});

    // Once the tolerance is met, take up to two polishing steps; the
    // relative criteria leave absolute errors of order tol * |objective|.
    if (pinf <= options.tol && dinf <= options.tol && rel_gap <= options.tol) {
      status = Status::optimal;
      if (polish == 0 || std::max({pinf, dinf, rel_gap}) <= 1e-3 * options.tol) break;
      --polish;
      best_x = x;
      best_y = y;
      best_z = z;
    } else if (status == Status::optimal) {
      x = best_x;
      y = best_y;
      z = best_z;
      break;
    }
    // Farkas rays. Dual ray: b^T y > 0 with A^T y + Z -> 0 after scaling.
    if (dobj > 0.0) {
      Blocks ray = aty;
      for (std::size_t k = 0; k < nb; ++k) ray[k] += z[k];
      if (std::sqrt(frob_sq(ray)) / dobj < 1e-8 && dobj > 1e6) {
        status = Status::infeasible;
        break;
      }
    }
    if (pobj < 0.0) {
      if (ax.norm() / (-pobj) < 1e-8 && -pobj > 1e6) {
        status = Status::unbounded;
        break;
      }
    }
    if (iter == options.max_iter) {
      if (status == Status::optimal) {
        x = best_x;
        y = best_y;
        z = best_z;
      }
      break;
    }

    std::vector<Eigen::LLT<RealMatrix>> lx;
    std::vector<Eigen::LLT<RealMatrix>> lz;
    Blocks zinv(nb);
    bool ok = true;
    for (std::size_t k = 0; k < nb; ++k) {
      lx.emplace_back(x[k]);
      lz.emplace_back(z[k]);
      if (lx.back().info() != Eigen::Success || lz.back().info() != Eigen::Success) {
        ok = false;
        break;
      }
      zinv[k] = lz.back().solve(RealMatrix::Identity(dims[k], dims[k]));
      zinv[k] = symmetrize(zinv[k]);
    }
    if (!ok) {
      if (status == Status::optimal) {
        x = best_x;
        y = best_y;
        z = best_z;
      }
      break;
    }

    const RealMatrix schur = sdp.schur(x, zinv);
    Eigen::LLT<RealMatrix> ls(schur);
    Eigen::LDLT<RealMatrix> ld;
    const bool use_llt = ls.info() == Eigen::Success;
    if (!use_llt) ld.compute(schur);
    auto solve_schur = [&](const RealVector& rhs) -> RealVector {
      return use_llt ? RealVector(ls.solve(rhs)) : RealVector(ld.solve(rhs));
    };

    Blocks xrdz(nb);
    for (std::size_t k = 0; k < nb; ++k) xrdz[k] = x[k] * rd[k] * zinv[k];
    const RealVector a_xrdz = sdp.apply(xrdz);
    const RealVector a_zinv = sdp.apply(zinv);

    auto direction = [&](double sigma_mu, const Blocks* corr, const RealVector& a_corr,
                         Blocks& dx, RealVector& dy, Blocks& dz) {
      RealVector rhs = b - sigma_mu * a_zinv + a_xrdz;
      if (corr != nullptr) rhs += a_corr;
      dy = solve_schur(rhs);
      const Blocks atdy = sdp.adjoint(dy);
      dx.resize(nb);
      dz.resize(nb);
      for (std::size_t k = 0; k < nb; ++k) {
        dz[k] = rd[k] - atdy[k];
        RealMatrix t = x[k] * dz[k] * zinv[k];
        if (corr != nullptr) t += (*corr)[k];
        dx[k] = sigma_mu * zinv[k] - x[k] - symmetrize(t);
      }
    };
    auto steps = [&](const Blocks& dx, const Blocks& dz) {
      double ap = std::numeric_limits<double>::infinity();
      double ad = ap;
      for (std::size_t k = 0; k < nb; ++k) {
        ap = std::min(ap, max_step(lx[k], dx[k]));
        ad = std::min(ad, max_step(lz[k], dz[k]));
      }
      return std::pair{std::min(1.0, options.step_fraction * ap),
                       std::min(1.0, options.step_fraction * ad)};
    };

    Blocks dxa, dza;
    RealVector dya;
    direction(0.0, nullptr, RealVector(), dxa, dya, dza);
    const auto [apa, ada] = steps(dxa, dza);
    double mu_aff = 0.0;
    for (std::size_t k = 0; k < nb; ++k) {
      mu_aff += (x[k] + apa * dxa[k]).cwiseProduct(z[k] + ada * dza[k]).sum();
    }
    mu_aff /= n_total;
    const double expo = std::max(1.0, 3.0 * std::pow(std::min(apa, ada), 2));
    const double sigma = std::clamp(std::pow(std::max(mu_aff, 0.0) / mu, expo), 0.0, 1.0);

    Blocks corr(nb);
    for (std::size_t k = 0; k < nb; ++k) corr[k] = dxa[k] * dza[k] * zinv[k];
    const RealVector a_corr = sdp.apply(corr);
    Blocks dx, dz;
    RealVector dy;
    direction(sigma * mu, &corr, a_corr, dx, dy, dz);
    const auto [ap, ad] = steps(dx, dz);
    for (std::size_t k = 0; k < nb; ++k) {
      x[k] += ap * dx[k];
      x[k] = symmetrize(x[k]);
      z[k] += ad * dz[k];
      z[k] = symmetrize(z[k]);
    }
    y += ad * dy;
  }

  sol.status = status;
  sol.iterations = std::min(iter, options.max_iter);
  for (std::size_t k = 0; k < nb; ++k) sol.x.push_back(complexify(x[k]));
  sol.y = -y;
  sol.primal_objective = -inner(cm, x);
  sol.dual_objective = -b.dot(y);
  sol.gap = std::abs(sol.primal_objective - sol.dual_objective) /
            (1.0 + std::abs(sol.primal_objective) + std::abs(sol.dual_objective));
  // Complex dual slack sum_i y_i A_i - C from the original data.
  for (std::size_t k = 0; k < nb; ++k) {
    const auto d = static_cast<Eigen::Index>(problem.blocks[k]);
    ComplexMatrix zk = ComplexMatrix::Zero(d, d);
    if (k < problem.objective.size() && problem.objective[k].size() > 0) {
      zk -= problem.objective[k];
    }
    sol.z.push_back(std::move(zk));
  }
  for (std::size_t i = 0; i < problem.constraints.size(); ++i) {
    const double yi = sol.y(static_cast<Eigen::Index>(i));
    for (const auto& t : problem.constraints[i].terms) {
      for (const auto& e : t.entries) {
        sol.z[t.block](static_cast<Eigen::Index>(e.row),
                       static_cast<Eigen::Index>(e.col)) += yi * e.value;
      }
    }
  }
  return sol;
}

double VerifyReport::max_residual() const {
  double r = 0.0;
  for (double v : residuals) r = std::max(r, std::abs(v));
  return r;
}

double VerifyReport::min_eigenvalue() const {
  double r = std::numeric_limits<double>::infinity();
  for (double v : eigenvalue_floors) r = std::min(r, v);
  return r;
}

bool VerifyReport::feasible(double residual_tol, double psd_tol) const {
  return max_residual() <= residual_tol && min_eigenvalue() >= -psd_tol;
}

VerifyReport verify(const SdpProblem& problem, const SdpSolution& solution) {
  VerifyReport rep;
  const std::size_t nb = problem.blocks.size();
  if (solution.x.size() != nb) {
    throw DimensionError("verify: solution block count does not match problem");
  }
  std::vector<ComplexMatrix> xh;
  for (const auto& xb : solution.x) xh.push_back(tensor::hermitian_part(xb));
  for (const auto& con : problem.constraints) {
    Complex s = 0.0;
    for (const auto& t : con.terms) {
      for (const auto& e : t.entries) {
        s += e.value * xh[t.block](static_cast<Eigen::Index>(e.col),
                                   static_cast<Eigen::Index>(e.row));
      }
    }
    rep.residuals.push_back(s.real() - con.rhs);
  }
  for (const auto& xb : xh) {
    rep.eigenvalue_floors.push_back(tensor::hermitian_eig(xb).values(0));
  }
  double pobj = 0.0;
  for (std::size_t k = 0; k < problem.objective.size(); ++k) {
    if (problem.objective[k].size() == 0) continue;
    pobj += (problem.objective[k].cwiseProduct(xh[k].transpose())).sum().real();
  }
  rep.primal_objective = pobj;
  double dobj = 0.0;
  for (std::size_t i = 0; i < problem.constraints.size(); ++i) {
    if (static_cast<Eigen::Index>(i) < solution.y.size()) {
      dobj += solution.y(static_cast<Eigen::Index>(i)) * problem.constraints[i].rhs;
    }
  }
  rep.dual_objective = dobj;
  rep.gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
  for (const auto& zb : solution.z) {
    rep.dual_slack_floors.push_back(
        tensor::hermitian_eig(tensor::hermitian_part(zb)).values(0));
  }
  return rep;
}

void write_triplets(std::ostream& out, const SdpProblem& problem) {
  out << std::setprecision(17);
  out << "blocks";
  for (auto d : problem.blocks) out << ' ' << d;
  out << '\n';
  for (std::size_t k = 0; k < problem.objective.size(); ++k) {
    const auto& c = problem.objective[k];
    for (Eigen::Index i = 0; i < c.rows(); ++i) {
      for (Eigen::Index j = i; j < c.cols(); ++j) {
        if (c(i, j) == Complex(0.0)) continue;
        out << "c " << k << ' ' << i << ' ' << j << ' ' << c(i, j).real() << ' '
            << c(i, j).imag() << '\n';
      }
    }
  }
  for (std::size_t i = 0; i < problem.constraints.size(); ++i) {
    std::map<std::tuple<std::size_t, std::size_t, std::size_t>, Complex> acc;
    for (const auto& t : problem.constraints[i].terms) {
      for (const auto& e : t.entries) {
        if (e.row <= e.col) acc[{t.block, e.row, e.col}] += e.value;
      }
    }
    for (const auto& [key, v] : acc) {
      if (v == Complex(0.0)) continue;
      out << "a " << i << ' ' << std::get<0>(key) << ' ' << std::get<1>(key)
          << ' ' << std::get<2>(key) << ' ' << v.real() << ' ' << v.imag() << '\n';
    }
    out << "b " << i << ' ' << problem.constraints[i].rhs << '\n';
  }
}

}  // namespace qmimo::sdp
