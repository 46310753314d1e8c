#include "qmimo/channel.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <shared_mutex>
#include <sstream>

#include "qmimo/error.hpp"
#include "qmimo/random.hpp"

namespace qmimo::channel {

namespace {

using tensor::Complex;

int circular_distance(int i, int j, int n) {
  const int d = std::abs(i - j);
  return std::min(d, n - d);
}

// Basis-index image of U_pi on n qubits.
std::vector<std::size_t> permutation_map(const std::vector<int>& pi) {
  const auto n = pi.size();
  const std::size_t dim = std::size_t{1} << n;
  std::vector<std::size_t> out(dim);
  for (std::size_t a = 0; a < dim; ++a) {
    std::size_t y = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if ((a >> (n - 1 - i)) & 1U) {
        y |= std::size_t{1} << (n - 1 - static_cast<std::size_t>(pi[i]));
      }
    }
    out[a] = y;
  }
  return out;
}

void check_permutation(const std::vector<int>& pi) {
  std::vector<bool> seen(pi.size(), false);
  for (int v : pi) {
    if (v < 0 || static_cast<std::size_t>(v) >= pi.size() || seen[static_cast<std::size_t>(v)]) {
      throw DomainError("invalid permutation");
    }
    seen[static_cast<std::size_t>(v)] = true;
  }
}

template <typename T>
void put(std::ostream& out, T v) {
  static_assert(std::endian::native == std::endian::little,
                "cache format assumes a little-endian host");
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw ConfigError("channel cache: truncated file");
  return v;
}

}  // namespace

void ChannelParams::validate() const {
  if (modes < 1) throw DomainError("channel: need at least one mode");
  if (modes > kMaxModes) throw DimensionError("channel: more than 6 modes");
  if (!(eta >= 0.0 && eta <= 1.0)) throw DomainError("channel: eta outside [0, 1]");
  if (!(delta > 0.0)) throw DomainError("channel: delta must be positive");
  if (lambda.size() != static_cast<std::size_t>(modes)) {
    throw DimensionError("channel: lambda length does not match mode count");
  }
  for (double l : lambda) {
    if (!(l >= 0.0 && l <= 1.0)) throw DomainError("channel: lambda outside [0, 1]");
  }
}

std::vector<ComplexMatrix> depolarizing_kraus(double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw DomainError("depolarizing_kraus: lambda outside [0, 1]");
  }
  const double a = std::sqrt(1.0 - 0.75 * lambda);
  const double b = std::sqrt(0.25 * lambda);
  return {a * tensor::identity(2), b * tensor::pauli_x(), b * tensor::pauli_y(),
          b * tensor::pauli_z()};
}

ComplexMatrix depolarizing_choi(double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw DomainError("depolarizing_choi: lambda outside [0, 1]");
  }
  return (1.0 - lambda) * tensor::phi_plus_unnormalized() +
         (0.5 * lambda) * tensor::identity(4);
}

RealMatrix coupling_kernel(int modes, double delta) {
  if (modes < 1) throw DomainError("coupling_kernel: need at least one mode");
  if (!(delta > 0.0)) throw DomainError("coupling_kernel: delta must be positive");
  RealMatrix c(modes, modes);
  for (int i = 0; i < modes; ++i) {
    double sum = 0.0;
    for (int j = 0; j < modes; ++j) {
      c(i, j) = std::exp(-delta * circular_distance(i, j, modes));
      sum += c(i, j);
    }
    c.row(i) /= sum;
  }
  return c;
}

std::vector<WeightedPermutation> permutation_weights(const RealMatrix& kernel) {
  const auto n = static_cast<int>(kernel.rows());
  if (kernel.rows() != kernel.cols()) throw DimensionError("permutation_weights: kernel not square");
  if (n > kMaxModes) throw DimensionError("permutation_weights: more than 6 modes");
  std::vector<int> pi(static_cast<std::size_t>(n));
  std::iota(pi.begin(), pi.end(), 0);
  std::vector<WeightedPermutation> out;
  double total = 0.0;
  do {
    double w = 1.0;
    for (int i = 0; i < n; ++i) w *= kernel(i, pi[static_cast<std::size_t>(i)]);
    out.push_back({pi, w});
    total += w;
  } while (std::next_permutation(pi.begin(), pi.end()));
  for (auto& p : out) p.weight /= total;
  return out;
}

ComplexMatrix permutation_unitary(const std::vector<int>& pi) {
  check_permutation(pi);
  const auto map = permutation_map(pi);
  const auto dim = static_cast<Eigen::Index>(map.size());
  ComplexMatrix u = ComplexMatrix::Zero(dim, dim);
  for (std::size_t a = 0; a < map.size(); ++a) {
    u(static_cast<Eigen::Index>(map[a]), static_cast<Eigen::Index>(a)) = 1.0;
  }
  return u;
}

ChannelChoi channel_choi(const ChannelParams& params) {
  params.validate();
  const int n = params.modes;
  const auto un = static_cast<std::size_t>(n);
  std::vector<ComplexMatrix> factors;
  for (double l : params.lambda) factors.push_back(depolarizing_choi(l));
  ComplexMatrix interleaved = tensor::kron_all(factors);
  // (in_0, out_0, in_1, out_1, ...) -> (in_0 .. in_{N-1}, out_0 .. out_{N-1})
  std::vector<std::size_t> order(2 * un);
  for (std::size_t i = 0; i < un; ++i) {
    order[i] = 2 * i;
    order[un + i] = 2 * i + 1;
  }
  const ComplexMatrix dep = tensor::permute_qubits(interleaved, order);
  if (params.eta == 0.0 || n == 1) return {dep, params};

  const std::size_t dout = std::size_t{1} << un;
  const auto d = static_cast<Eigen::Index>(dout);
  ComplexMatrix mixed = ComplexMatrix::Zero(dep.rows(), dep.cols());
  for (const auto& wp : permutation_weights(coupling_kernel(n, params.delta))) {
    if (wp.weight == 0.0) continue;
    const auto map = permutation_map(wp.pi);
    for (Eigen::Index i = 0; i < d; ++i) {
      for (Eigen::Index o = 0; o < d; ++o) {
        const Eigen::Index row = i * d + static_cast<Eigen::Index>(map[static_cast<std::size_t>(o)]);
        for (Eigen::Index ip = 0; ip < d; ++ip) {
          for (Eigen::Index op = 0; op < d; ++op) {
            const Eigen::Index col =
                ip * d + static_cast<Eigen::Index>(map[static_cast<std::size_t>(op)]);
            mixed(row, col) += wp.weight * dep(i * d + o, ip * d + op);
          }
        }
      }
    }
  }
  return {(1.0 - params.eta) * dep + params.eta * mixed, params};
}

std::string cache_file_name(const ChannelParams& params) {
  std::ostringstream key;
  key << "N=" << params.modes << ";eta=" << std::llround(params.eta * 1e12)
      << ";delta=" << std::llround(params.delta * 1e12) << ";lambda=";
  for (double l : params.lambda) key << std::llround(l * 1e12) << ',';
  std::ostringstream name;
  name << "qmch_" << std::hex << fnv1a64(key.str()) << ".bin";
  return name.str();
}

ChannelChoi channel_choi_cached(const ChannelParams& params,
                                const std::filesystem::path& cache_dir) {
  static std::shared_mutex mutex;
  static std::map<std::string, std::shared_ptr<const ChannelChoi>> memo;
  static std::size_t memo_bytes = 0;
  constexpr std::size_t kMemoLimit = std::size_t{256} << 20;

  params.validate();
  const std::string name = cache_file_name(params);
  {
    std::shared_lock lock(mutex);
    if (auto it = memo.find(name); it != memo.end()) return *it->second;
  }
  ChannelChoi h;
  bool loaded = false;
  if (!cache_dir.empty()) {
    const auto path = cache_dir / name;
    if (std::filesystem::exists(path)) {
      h = {read_choi_file(path, params.modes), params};
      loaded = true;
    }
  }
  if (!loaded) {
    h = channel_choi(params);
    if (!cache_dir.empty()) {
      std::filesystem::create_directories(cache_dir);
      write_choi_file(cache_dir / name, params.modes, h.choi);
    }
  }
  const std::size_t bytes = static_cast<std::size_t>(h.choi.size()) * sizeof(Complex);
  std::unique_lock lock(mutex);
  if (memo_bytes + bytes > kMemoLimit) {
    memo.clear();
    memo_bytes = 0;
  }
  if (memo.emplace(name, std::make_shared<const ChannelChoi>(h)).second) memo_bytes += bytes;
  return h;
}

RealMatrix coupling_report(const ChannelParams& params) {
  params.validate();
  const RealMatrix id = RealMatrix::Identity(params.modes, params.modes);
  if (params.modes == 1) return id;
  return (1.0 - params.eta) * id + params.eta * coupling_kernel(params.modes, params.delta);
}

ComplexMatrix apply_choi(const ComplexMatrix& choi, std::size_t dim_in,
                         const ComplexMatrix& rho) {
  const auto din = static_cast<Eigen::Index>(dim_in);
  if (rho.rows() != din || rho.cols() != din || choi.rows() % din != 0 ||
      choi.rows() != choi.cols()) {
    throw DimensionError("apply_choi: dimension mismatch");
  }
  const Eigen::Index dout = choi.rows() / din;
  ComplexMatrix out = ComplexMatrix::Zero(dout, dout);
  for (Eigen::Index i = 0; i < din; ++i) {
    for (Eigen::Index j = 0; j < din; ++j) {
      if (rho(i, j) == Complex(0.0)) continue;
      out += rho(i, j) * choi.block(i * dout, j * dout, dout, dout);
    }
  }
  return out;
}

ComplexMatrix apply_channel(const ChannelChoi& h, const ComplexMatrix& rho) {
  return apply_choi(h.choi, std::size_t{1} << h.params.modes, rho);
}

void write_choi_file(const std::filesystem::path& path, int modes,
                     const ComplexMatrix& choi) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("channel cache: cannot write " + path.string());
  out.write("QMCH", 4);
  put<std::uint32_t>(out, 1);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(modes));
  put<std::uint64_t>(out, static_cast<std::uint64_t>(choi.rows()));
  put<std::uint64_t>(out, static_cast<std::uint64_t>(choi.cols()));
  for (Eigen::Index i = 0; i < choi.rows(); ++i) {
    for (Eigen::Index j = 0; j < choi.cols(); ++j) {
      put<double>(out, choi(i, j).real());
      put<double>(out, choi(i, j).imag());
    }
  }
}

ComplexMatrix read_choi_file(const std::filesystem::path& path, int expected_modes) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("channel cache: cannot read " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "QMCH", 4) != 0) {
    throw ConfigError("channel cache: bad magic in " + path.string());
  }
  if (get<std::uint32_t>(in) != 1) throw ConfigError("channel cache: unsupported version");
  const auto modes = get<std::uint32_t>(in);
  const auto rows = get<std::uint64_t>(in);
  const auto cols = get<std::uint64_t>(in);
  const std::uint64_t expect = std::uint64_t{1} << (2 * expected_modes);
  if (static_cast<int>(modes) != expected_modes || rows != expect || cols != expect) {
    throw ConfigError("channel cache: header does not match requested channel");
  }
  ComplexMatrix out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    for (Eigen::Index j = 0; j < out.cols(); ++j) {
      const double re = get<double>(in);
      const double im = get<double>(in);
      out(i, j) = Complex(re, im);
    }
  }
  return out;
}

}  // namespace qmimo::channel
