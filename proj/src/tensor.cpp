#include "qmimo/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "qmimo/error.hpp"

namespace qmimo::tensor {

namespace {

std::size_t bit_of(std::size_t n, std::size_t q) { return n - 1 - q; }

void check_square(const ComplexMatrix& x, const char* what) {
  if (x.rows() != x.cols()) {
    throw DimensionError(std::string(what) + ": matrix is not square");
  }
}

// Index offsets of every assignment of the listed qubits, in lexicographic
// order of the assignment (first listed qubit most significant).
std::vector<std::size_t> offsets(std::size_t n,
                                 std::span<const std::size_t> qubits) {
  const std::size_t k = qubits.size();
  std::vector<std::size_t> out(std::size_t{1} << k, 0);
  for (std::size_t v = 0; v < out.size(); ++v) {
    std::size_t idx = 0;
    for (std::size_t j = 0; j < k; ++j) {
      if ((v >> (k - 1 - j)) & 1U) idx |= std::size_t{1} << bit_of(n, qubits[j]);
    }
    out[v] = idx;
  }
  return out;
}

template <typename Matrix>
Matrix hermitize(const Matrix& x) {
  return (x + x.adjoint()) * 0.5;
}

double conj_abs(double v) { return std::abs(v); }
double conj_abs(const Complex& v) { return std::abs(v); }
double conj_of(double v) { return v; }
Complex conj_of(const Complex& v) { return std::conj(v); }
double real_of(double v) { return v; }
double real_of(const Complex& v) { return v.real(); }

// Cyclic Jacobi on a Hermitian (or real symmetric) matrix.
template <typename Matrix, typename Vectors>
void jacobi(Matrix& a, Vectors& v, int max_sweeps) {
  using Scalar = typename Matrix::Scalar;
  const Eigen::Index n = a.rows();
  v = Vectors::Identity(n, n);
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) total += std::norm(a(i, j));
  }
  if (total == 0.0 || n < 2) return;
  const double target = 1e-30 * total;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) off += 2.0 * std::norm(a(p, q));
    }
    if (off <= target) return;
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const Scalar apq = a(p, q);
        const double mag = conj_abs(apq);
        if (mag == 0.0) continue;
        const double app = real_of(a(p, p));
        const double aqq = real_of(a(q, q));
        // Rotation would be below rounding of the diagonal.
        if (sweep > 3 && mag < 1e-18 * (std::abs(app) + std::abs(aqq))) {
          a(p, q) = Scalar(0);
          a(q, p) = Scalar(0);
          continue;
        }
        const Scalar phase = apq / mag;
        const double tau = (aqq - app) / (2.0 * mag);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        // G = diag(1, conj(phase)) * [[c, s], [-s, c]] on (p, q).
        const Scalar gpp = c;
        const Scalar gpq = s;
        const Scalar gqp = -s * conj_of(phase);
        const Scalar gqq = c * conj_of(phase);
        for (Eigen::Index k = 0; k < n; ++k) {
          const Scalar akp = a(k, p);
          const Scalar akq = a(k, q);
          a(k, p) = akp * gpp + akq * gqp;
          a(k, q) = akp * gpq + akq * gqq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const Scalar apk = a(p, k);
          const Scalar aqk = a(q, k);
          a(p, k) = conj_of(gpp) * apk + conj_of(gqp) * aqk;
          a(q, k) = conj_of(gpq) * apk + conj_of(gqq) * aqk;
        }
        a(p, q) = Scalar(0);
        a(q, p) = Scalar(0);
        a(p, p) = Scalar(real_of(a(p, p)));
        a(q, q) = Scalar(real_of(a(q, q)));
        for (Eigen::Index k = 0; k < n; ++k) {
          const Scalar vkp = v(k, p);
          const Scalar vkq = v(k, q);
          v(k, p) = vkp * gpp + vkq * gqp;
          v(k, q) = vkp * gpq + vkq * gqq;
        }
      }
    }
  }
  double off = 0.0;
  for (Eigen::Index p = 0; p < n; ++p) {
    for (Eigen::Index q = p + 1; q < n; ++q) off += 2.0 * std::norm(a(p, q));
  }
  if (off > 1e-24 * total) {
    throw ConvergenceError("hermitian_eig: Jacobi sweeps did not converge");
  }
}

template <typename Values, typename Matrix, typename Vectors>
void sort_ascending(const Matrix& a, const Vectors& v, Values& values,
                    Vectors& vectors) {
  const Eigen::Index n = a.rows();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) {
    return real_of(a(i, i)) < real_of(a(j, j));
  });
  values.resize(n);
  vectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    values(k) = real_of(a(order[k], order[k]));
    vectors.col(k) = v.col(order[k]);
  }
}

}  // namespace

ComplexMatrix identity(std::size_t dim) {
  return ComplexMatrix::Identity(static_cast<Eigen::Index>(dim),
                                 static_cast<Eigen::Index>(dim));
}

ComplexMatrix pauli_x() {
  ComplexMatrix m(2, 2);
  m << 0.0, 1.0, 1.0, 0.0;
  return m;
}

ComplexMatrix pauli_y() {
  ComplexMatrix m(2, 2);
  m << 0.0, Complex(0, -1), Complex(0, 1), 0.0;
  return m;
}

ComplexMatrix pauli_z() {
  ComplexMatrix m(2, 2);
  m << 1.0, 0.0, 0.0, -1.0;
  return m;
}

ComplexMatrix phi_plus_unnormalized() {
  ComplexMatrix m = ComplexMatrix::Zero(4, 4);
  m(0, 0) = m(0, 3) = m(3, 0) = m(3, 3) = 1.0;
  return m;
}

double max_abs(const ComplexMatrix& x) {
  return x.size() == 0 ? 0.0 : x.cwiseAbs().maxCoeff();
}

bool is_hermitian(const ComplexMatrix& x, double tol) {
  if (x.rows() != x.cols()) return false;
  const double scale = std::max(1.0, max_abs(x));
  return max_abs(x - x.adjoint()) <= tol * scale;
}

ComplexMatrix hermitian_part(const ComplexMatrix& x) { return hermitize(x); }

int qubit_count(std::size_t dim) {
  if (dim == 0 || (dim & (dim - 1)) != 0) {
    throw DimensionError("dimension " + std::to_string(dim) +
                         " is not a power of two");
  }
  return std::countr_zero(dim);
}

ModeSpace::ModeSpace(std::vector<int> labels) : labels_(std::move(labels)) {
  std::vector<int> sorted = labels_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw LabelError("ModeSpace: duplicate mode label");
  }
  if (labels_.size() > 30) throw DimensionError("ModeSpace: too many modes");
}

ModeSpace ModeSpace::qubits(int n) {
  std::vector<int> labels(static_cast<std::size_t>(n));
  std::iota(labels.begin(), labels.end(), 0);
  return ModeSpace(std::move(labels));
}

bool ModeSpace::contains(int label) const {
  return std::find(labels_.begin(), labels_.end(), label) != labels_.end();
}

std::size_t ModeSpace::position(int label) const {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) {
    throw LabelError("unknown mode label " + std::to_string(label));
  }
  return static_cast<std::size_t>(it - labels_.begin());
}

std::vector<std::size_t> ModeSpace::positions(std::span<const int> labels) const {
  std::vector<std::size_t> out;
  out.reserve(labels.size());
  for (int l : labels) out.push_back(position(l));
  return out;
}

PureState PureState::normalized(ComplexVector v) {
  const double n = v.norm();
  if (!(n > 0.0)) throw DomainError("PureState: zero vector");
  return PureState{v / n};
}

ComplexMatrix PureState::projector() const {
  return amplitudes * amplitudes.adjoint();
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b,
                   std::size_t cap) {
  const auto rows = static_cast<std::size_t>(a.rows() * b.rows());
  const auto cols = static_cast<std::size_t>(a.cols() * b.cols());
  if (rows > cap || cols > cap) {
    throw DimensionError("kron: result dimension " + std::to_string(rows) +
                         " exceeds cap " + std::to_string(cap));
  }
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

ComplexMatrix kron_all(std::span<const ComplexMatrix> factors, std::size_t cap) {
  ComplexMatrix out = ComplexMatrix::Identity(1, 1);
  for (const auto& f : factors) out = kron(out, f, cap);
  return out;
}

ComplexMatrix partial_trace_qubits(const ComplexMatrix& x, int n,
                                   std::span<const std::size_t> keep) {
  check_square(x, "partial_trace");
  const auto un = static_cast<std::size_t>(n);
  if (x.rows() != static_cast<Eigen::Index>(std::size_t{1} << un)) {
    throw DimensionError("partial_trace: matrix does not match mode space");
  }
  std::vector<bool> kept(un, false);
  for (auto q : keep) {
    if (q >= un || kept[q]) throw LabelError("partial_trace: bad keep set");
    kept[q] = true;
  }
  std::vector<std::size_t> traced;
  for (std::size_t q = 0; q < un; ++q) {
    if (!kept[q]) traced.push_back(q);
  }
  const auto ko = offsets(un, keep);
  const auto to = offsets(un, traced);
  const auto dk = static_cast<Eigen::Index>(ko.size());
  ComplexMatrix out = ComplexMatrix::Zero(dk, dk);
  for (Eigen::Index r = 0; r < dk; ++r) {
    for (Eigen::Index c = 0; c < dk; ++c) {
      Complex acc = 0.0;
      for (std::size_t t : to) acc += x(ko[r] + t, ko[c] + t);
      out(r, c) = acc;
    }
  }
  return out;
}

ComplexMatrix partial_trace(const ComplexMatrix& x, const ModeSpace& space,
                            std::span<const int> keep) {
  if (static_cast<std::size_t>(x.rows()) != space.dimension()) {
    throw DimensionError("partial_trace: matrix does not match mode space");
  }
  auto pos = space.positions(keep);
  std::sort(pos.begin(), pos.end());
  return partial_trace_qubits(x, static_cast<int>(space.size()), pos);
}

ComplexMatrix partial_transpose_qubits(const ComplexMatrix& x, int n,
                                       std::span<const std::size_t> subset) {
  check_square(x, "partial_transpose");
  const auto un = static_cast<std::size_t>(n);
  if (x.rows() != static_cast<Eigen::Index>(std::size_t{1} << un)) {
    throw DimensionError("partial_transpose: matrix does not match mode space");
  }
  std::size_t mask = 0;
  for (auto q : subset) {
    if (q >= un) throw LabelError("partial_transpose: bad subset");
    mask |= std::size_t{1} << bit_of(un, q);
  }
  const Eigen::Index d = x.rows();
  ComplexMatrix out(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      const auto ui = static_cast<std::size_t>(i);
      const auto uj = static_cast<std::size_t>(j);
      const std::size_t si = (ui & ~mask) | (uj & mask);
      const std::size_t sj = (uj & ~mask) | (ui & mask);
      out(i, j) = x(static_cast<Eigen::Index>(si), static_cast<Eigen::Index>(sj));
    }
  }
  return out;
}

ComplexMatrix partial_transpose(const ComplexMatrix& x, const ModeSpace& space,
                                std::span<const int> subset) {
  if (static_cast<std::size_t>(x.rows()) != space.dimension()) {
    throw DimensionError("partial_transpose: matrix does not match mode space");
  }
  const auto pos = space.positions(subset);
  return partial_transpose_qubits(x, static_cast<int>(space.size()), pos);
}

ComplexMatrix permute_qubits(const ComplexMatrix& x,
                             std::span<const std::size_t> order) {
  check_square(x, "permute_qubits");
  const std::size_t n = order.size();
  if (x.rows() != static_cast<Eigen::Index>(std::size_t{1} << n)) {
    throw DimensionError("permute_qubits: order does not match dimension");
  }
  std::vector<bool> seen(n, false);
  for (auto q : order) {
    if (q >= n || seen[q]) throw DomainError("permute_qubits: not a permutation");
    seen[q] = true;
  }
  const std::size_t d = std::size_t{1} << n;
  std::vector<Eigen::Index> map(d);
  for (std::size_t idx = 0; idx < d; ++idx) {
    std::size_t y = 0;
    for (std::size_t q = 0; q < n; ++q) {
      if ((idx >> bit_of(n, order[q])) & 1U) y |= std::size_t{1} << bit_of(n, q);
    }
    map[idx] = static_cast<Eigen::Index>(y);
  }
  ComplexMatrix out(x.rows(), x.cols());
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      out(map[i], map[j]) =
          x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  }
  return out;
}

ComplexMatrix link_product(const ComplexMatrix& ja, std::size_t dim_x,
                           std::size_t dim_y, const ComplexMatrix& jb,
                           std::size_t dim_z) {
  const auto dx = static_cast<Eigen::Index>(dim_x);
  const auto dy = static_cast<Eigen::Index>(dim_y);
  const auto dz = static_cast<Eigen::Index>(dim_z);
  if (ja.rows() != dx * dy || ja.cols() != dx * dy || jb.rows() != dy * dz ||
      jb.cols() != dy * dz) {
    throw DimensionError("link_product: operand shapes do not match");
  }
  if (dim_x * dim_z > kDefaultDimensionCap) {
    throw DimensionError("link_product: result exceeds dimension cap");
  }
  ComplexMatrix out = ComplexMatrix::Zero(dx * dz, dx * dz);
  for (Eigen::Index x = 0; x < dx; ++x) {
    for (Eigen::Index xp = 0; xp < dx; ++xp) {
      auto block = out.block(x * dz, xp * dz, dz, dz);
      for (Eigen::Index y = 0; y < dy; ++y) {
        for (Eigen::Index yp = 0; yp < dy; ++yp) {
          const Complex a = ja(x * dy + y, xp * dy + yp);
          if (a == Complex(0.0)) continue;
          block += a * jb.block(y * dz, yp * dz, dz, dz);
        }
      }
    }
  }
  return out;
}

EigenDecomposition hermitian_eig(const ComplexMatrix& x, int max_sweeps) {
  check_square(x, "hermitian_eig");
  if (!is_hermitian(x)) {
    throw NotHermitianError("hermitian_eig: input is not Hermitian");
  }
  ComplexMatrix a = hermitize(x);
  ComplexMatrix v;
  jacobi(a, v, max_sweeps);
  EigenDecomposition out;
  sort_ascending(a, v, out.values, out.vectors);
  return out;
}

RealEigenDecomposition symmetric_eig(const RealMatrix& x, int max_sweeps) {
  if (x.rows() != x.cols()) throw DimensionError("symmetric_eig: not square");
  const double scale = std::max(1.0, x.cwiseAbs().maxCoeff());
  if ((x - x.transpose()).cwiseAbs().maxCoeff() > kHermitianTol * scale) {
    throw NotHermitianError("symmetric_eig: input is not symmetric");
  }
  RealMatrix a = hermitize(x);
  RealMatrix v;
  jacobi(a, v, max_sweeps);
  RealEigenDecomposition out;
  sort_ascending(a, v, out.values, out.vectors);
  return out;
}

double lambda_max(const ComplexMatrix& x) {
  return hermitian_eig(x).values.maxCoeff();
}

double lambda_min(const ComplexMatrix& x) {
  return hermitian_eig(x).values.minCoeff();
}

ComplexMatrix psd_sqrt_pinv(const ComplexMatrix& x, double support_tol) {
  const auto eig = hermitian_eig(x);
  const Eigen::Index n = x.rows();
  ComplexMatrix out = ComplexMatrix::Zero(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double w = eig.values(k);
    if (w < -support_tol) {
      throw NotPsdError("psd_sqrt_pinv: eigenvalue " + std::to_string(w) +
                        " below -support_tol");
    }
    if (w > support_tol) {
      out += (1.0 / std::sqrt(w)) * eig.vectors.col(k) * eig.vectors.col(k).adjoint();
    }
  }
  return out;
}

ComplexMatrix support_projector(const ComplexMatrix& x, double support_tol) {
  const auto eig = hermitian_eig(x);
  const Eigen::Index n = x.rows();
  ComplexMatrix out = ComplexMatrix::Zero(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    if (eig.values(k) > support_tol) {
      out += eig.vectors.col(k) * eig.vectors.col(k).adjoint();
    }
  }
  return out;
}

PureState haar_qubit(Rng& rng) {
  ComplexVector v(2);
  for (Eigen::Index i = 0; i < 2; ++i) {
    const double re = rng.normal();
    const double im = rng.normal();
    v(i) = Complex(re, im);
  }
  return PureState::normalized(std::move(v));
}

ComplexMatrix haar_unitary(std::size_t dim, Rng& rng) {
  const auto d = static_cast<Eigen::Index>(dim);
  Eigen::MatrixXcd g(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      const double re = rng.normal();
      const double im = rng.normal();
      g(i, j) = Complex(re, im);
    }
  }
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
  Eigen::MatrixXcd q = qr.householderQ();
  const Eigen::MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < d; ++j) {
    const Complex rjj = r(j, j);
    const double m = std::abs(rjj);
    if (m > 0.0) q.col(j) *= rjj / m;
  }
  return q;
}

ComplexMatrix random_hermitian(std::size_t dim, Rng& rng) {
  const auto d = static_cast<Eigen::Index>(dim);
  ComplexMatrix g(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      const double re = rng.normal();
      const double im = rng.normal();
      g(i, j) = Complex(re, im);
    }
  }
  return hermitize(g);
}

}  // namespace qmimo::tensor
