#pragma once

#include <bit>
#include <cstdint>
#include <random>
#include <string_view>
#include <type_traits>
#include <vector>

namespace qmimo {

// splitmix64 finalizer; used to turn structured keys into stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value) {
  return splitmix64(seed ^ splitmix64(value + 0x632be59bd9b4e019ULL));
}

constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace detail {
inline std::uint64_t key_bits(std::string_view s) { return fnv1a64(s); }
inline std::uint64_t key_bits(const char* s) { return fnv1a64(s); }
inline std::uint64_t key_bits(double v) {
  // -0.0 and 0.0 address the same stream.
  return std::bit_cast<std::uint64_t>(v == 0.0 ? 0.0 : v);
}
template <typename T>
  requires std::is_integral_v<T>
std::uint64_t key_bits(T v) {
  return static_cast<std::uint64_t>(v);
}
}  // namespace detail

// Seed of the stream addressed by (master, parts...). Streams for distinct
// keys are independent, so parallel schedules reproduce serial output.
template <typename... Parts>
std::uint64_t derive_seed(std::uint64_t master, const Parts&... parts) {
  std::uint64_t h = splitmix64(master);
  ((h = hash_combine(h, detail::key_bits(parts))), ...);
  return h;
}

// Random stream with portable samplers. The standard-library distributions
// are implementation defined, so every sampler used for reproducible output
// is written out here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on the open interval (0, 1).
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal, Marsaglia polar method.
  double normal();

  // Gamma(shape, scale) via Marsaglia-Tsang squeeze; shapes below one use the
  // shape+1 boost.
  double gamma(double shape, double scale);

  // Symmetric Dirichlet(alpha, ..., alpha) of length n.
  std::vector<double> dirichlet(std::size_t n, double alpha = 1.0);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace qmimo
