#include "qmimo/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include "qmimo/channel.hpp"
#include "qmimo/cloner.hpp"
#include "qmimo/decoder.hpp"
#include "qmimo/error.hpp"
#include "qmimo/noise.hpp"
#include "qmimo/random.hpp"
#include "qmimo/sdp.hpp"

namespace qmimo::experiment {

using nlohmann::json;
using strategy::FidelityRecord;
using strategy::StrategyId;

namespace {

constexpr int kMaxCiModes = 4;

// ---------------------------------------------------------------------------
// Config parsing

int line_of_key(const std::string& text, const std::string& key) {
  if (text.empty()) return 0;
  const auto pos = text.find("\"" + key + "\"");
  if (pos == std::string::npos) return 0;
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(pos), '\n'));
}

class Reader {
 public:
  explicit Reader(const std::string& text) : text_(text) {}

  [[noreturn]] void fail(const std::string& key, const std::string& message) const {
    const int line = line_of_key(text_, key);
    std::string where = line > 0 ? "config line " + std::to_string(line) : "config";
    throw ConfigError(where + ": '" + key + "' " + message);
  }

  double number(const json& v, const std::string& key) const {
    if (!v.is_number()) fail(key, "must be a number");
    return v.get<double>();
  }

  int integer(const json& v, const std::string& key) const {
    if (!v.is_number_integer()) fail(key, "must be an integer");
    const auto x = v.get<long long>();
    if (x < -1000000000LL || x > 1000000000LL) fail(key, "is out of range");
    return static_cast<int>(x);
  }

  std::vector<double> numbers(const json& v, const std::string& key) const {
    if (v.is_number()) return {v.get<double>()};
    if (!v.is_array()) fail(key, "must be a number or an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) out.push_back(number(e, key));
    return out;
  }

  std::vector<int> integers(const json& v, const std::string& key) const {
    if (v.is_number_integer()) return {integer(v, key)};
    if (!v.is_array()) fail(key, "must be an integer or an array of integers");
    std::vector<int> out;
    for (const auto& e : v) out.push_back(integer(e, key));
    return out;
  }

  std::string string(const json& v, const std::string& key) const {
    if (!v.is_string()) fail(key, "must be a string");
    return v.get<std::string>();
  }

  std::vector<std::string> strings(const json& v, const std::string& key) const {
    if (v.is_string()) return {v.get<std::string>()};
    if (!v.is_array()) fail(key, "must be a string or an array of strings");
    std::vector<std::string> out;
    for (const auto& e : v) out.push_back(string(e, key));
    return out;
  }

  void only_keys(const json& obj, const std::string& where,
                 const std::set<std::string>& allowed) const {
    if (!obj.is_object()) fail(where, "must be an object");
    for (const auto& [k, _] : obj.items()) {
      if (!allowed.count(k)) fail(k, "is not a recognized key" +
                                         (where.empty() ? std::string() : " in '" + where + "'"));
    }
  }

  int line(const std::string& key) const { return line_of_key(text_, key); }

 private:
  const std::string& text_;
};

Regime parse_regime(const std::string& s, const Reader& reader) {
  if (s == "fixed_Z" || s == "fixed_z") return Regime::fixed_z;
  if (s == "scaling") return Regime::scaling;
  if (s == "stochastic") return Regime::stochastic;
  if (s == "boundary") return Regime::boundary;
  reader.fail("regime", "must be one of fixed_Z, scaling, stochastic, boundary");
}

Symmetry parse_symmetry(const std::string& s, const Reader& reader) {
  if (s == "symmetric") return Symmetry::symmetric;
  if (s == "asymmetric") return Symmetry::asymmetric;
  reader.fail("channel_symmetry", "entries must be symmetric or asymmetric");
}

void validate_impl(const ExperimentConfig& c, const Reader& reader) {
  auto fail = [&](const std::string& key, const std::string& msg) { reader.fail(key, msg); };
  auto in_unit = [](double x) { return x >= 0.0 && x <= 1.0; };

  if (c.regime == Regime::boundary) {
    if (c.boundary_clones.empty()) fail("clones", "must list at least one clone count");
    for (int m : c.boundary_clones) {
      if (m != 2 && m != 3) fail("clones", "boundary clone counts must be 2 or 3");
    }
    if (!(c.grid_resolution > 0.0 && c.grid_resolution <= 0.25)) {
      fail("grid_resolution", "must lie in (0, 0.25]");
    }
    return;
  }

  if (c.modes.empty()) fail("modes", "must list at least one mode count");
  const int cap = c.profile == Profile::ci ? kMaxCiModes : channel::kMaxModes - 1;
  for (int n : c.modes) {
    if (n < 1) fail("modes", "entries must be >= 1");
    if (n > cap) {
      fail("modes", "N = " + std::to_string(n) + " exceeds the " + to_string(c.profile) +
                        " profile limit of " + std::to_string(cap));
    }
    if (n > kMaxCiModes && !c.allow_large_modes) {
      fail("modes", "N = " + std::to_string(n) + " requires \"allow_large_modes\": true");
    }
  }
  const int n_min = *std::min_element(c.modes.begin(), c.modes.end());
  if (c.clones < 0 || c.clones > n_min) fail("clones", "must be 0 (= N) or lie in 1..min(N)");
  if (c.width < 0 || c.width > n_min) fail("width", "must be 0 (= N) or lie in 1..min(N)");
  if (std::find(c.strategies.begin(), c.strategies.end(), StrategyId::blind) !=
      c.strategies.end()) {
    for (int n : c.modes) {
      if ((c.clones > 0 ? c.clones : n) != (c.width > 0 ? c.width : n)) {
        fail("strategies", "blind requires clones == width");
      }
    }
  }

  if (c.regime == Regime::scaling) {
    if (c.lambda_x.empty()) fail("lambda_x", "is required for the scaling regime");
    for (double x : c.lambda_x) {
      if (!in_unit(x)) fail("lambda_x", "entries must lie in [0, 1]");
    }
  } else {
    if (c.budget.empty()) fail("budget", "is required for this regime");
    for (double z : c.budget) {
      if (!(z >= 0.0)) fail("budget", "entries must be >= 0");
      for (int n : c.modes) {
        if (z > n) {
          fail("budget", "Z = " + std::to_string(z) + " exceeds N = " + std::to_string(n));
        }
      }
    }
  }
  if (c.eta.empty()) fail("eta", "must list at least one value");
  for (double e : c.eta) {
    if (!in_unit(e)) fail("eta", "entries must lie in [0, 1]");
  }
  if (!(c.delta > 0.0 && std::isfinite(c.delta))) fail("delta", "must be a positive number");
  if (c.p.empty()) fail("p", "must list at least one value");
  for (double p : c.p) {
    if (!(p > 0.0 && p <= 1.0)) fail("p", "entries must lie in (0, 1]");
  }
  if (c.symmetry.empty()) fail("channel_symmetry", "must list at least one class");
  if (c.mean_vectors < 1) fail("num_mean_vectors", "must be >= 1");
  if (c.strategies.empty()) fail("strategies", "must list at least one strategy");
  {
    std::set<StrategyId> seen(c.strategies.begin(), c.strategies.end());
    if (seen.size() != c.strategies.size()) fail("strategies", "contains duplicates");
  }
  if (c.density_points < 2) fail("density_points", "must be >= 2");
  if (c.regime == Regime::stochastic) {
    if (c.mu.empty()) fail("mu", "is required for the stochastic regime");
    for (double m : c.mu) {
      if (!(m >= 0.0 && std::isfinite(m))) fail("mu", "entries must be >= 0");
    }
    if (c.realizations < 2) fail("num_realizations", "must be >= 2");
    if (!(c.boxplot_p > 0.0 && c.boxplot_p <= 1.0)) fail("boxplot", "p must lie in (0, 1]");
    if (!in_unit(c.boxplot_eta)) fail("boxplot", "eta must lie in [0, 1]");
  }
  const auto& o = c.optimizer;
  if (o.grid_steps < 1) fail("grid_steps", "must be >= 1");
  if (o.multistarts < 0) fail("multistarts", "must be >= 0");
  if (o.refine_starts < 0) fail("refine_starts", "must be >= 0");
  if (o.max_refine_evals < 0) fail("max_refine_evals", "must be >= 0");
  if (!(o.refine_tol > 0.0)) fail("refine_tol", "must be positive");
}

std::vector<StrategyId> default_strategies() { return strategy::all_strategies(); }

// ---------------------------------------------------------------------------
// Formatting

std::string num(double x) {
  if (x == 0.0) return "0";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

std::string modes_field(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ';';
    out += std::to_string(v[i] + 1);
  }
  return out;
}

std::string regime_label(Regime r) {
  switch (r) {
    case Regime::fixed_z: return "fixed_Z";
    case Regime::scaling: return "scaling";
    case Regime::stochastic: return "stochastic";
    case Regime::boundary: return "boundary";
  }
  return "unknown";
}

class Csv {
 public:
  explicit Csv(std::vector<std::string> header) : columns_(header.size()) { row(header); }

  void row(const std::vector<std::string>& cells) {
    if (cells.size() != columns_) throw Error("csv: row width mismatch");
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
  }

  std::string str() const { return out_.str(); }

 private:
  std::size_t columns_;
  std::ostringstream out_;
};

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// ---------------------------------------------------------------------------
// Scheduling

// Calls fn(i) for i in [0, count) on up to `workers` threads. The first
// exception stops the queue and is rethrown.
template <typename Fn>
void parallel_for(std::size_t count, int workers, Fn&& fn) {
  const auto w = static_cast<std::size_t>(std::max(1, workers));
  if (w == 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < std::min(w, count); ++t) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next.store(count);
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

// ---------------------------------------------------------------------------
// Shared helpers

int clones_for(const ExperimentConfig& c, int n) { return c.clones > 0 ? c.clones : n; }
int width_for(const ExperimentConfig& c, int n) { return c.width > 0 ? c.width : n; }

std::uint64_t mean_seed(const ExperimentConfig& c, int n, double z, int mean_id) {
  return derive_seed(c.seed, regime_label(c.regime), "mean", n, z, mean_id);
}

std::vector<double> mean_vector(const ExperimentConfig& c, Symmetry sym, int n, double z,
                                int mean_id) {
  if (sym == Symmetry::symmetric) return std::vector<double>(static_cast<std::size_t>(n), z / n);
  Rng rng(mean_seed(c, n, z, mean_id));
  return noise::sample_mean_allocations(n, z, 1, rng).front().lambda;
}

channel::ChannelParams make_params(int n, double eta, double delta, std::vector<double> lambda) {
  channel::ChannelParams p;
  p.modes = n;
  p.eta = eta;
  p.delta = delta;
  p.lambda = std::move(lambda);
  return p;
}

strategy::StrategyConfig strategy_config(StrategyId s, int m, int k, double p,
                                         const decoder::GammaOptions& gamma) {
  strategy::StrategyConfig sc;
  sc.m = m;
  sc.k = k;
  sc.p = p;
  sc.gamma = gamma;
  switch (s) {
    case StrategyId::dir:
      sc.m = 1;
      sc.k = 1;
      sc.p = 1.0;
      break;
    case StrategyId::pur:
      sc.m = 1;
      break;
    case StrategyId::blind:
      sc.k = m;
      break;
    default:
      break;
  }
  return sc;
}

std::vector<double> sorted_union(std::vector<double> v, std::initializer_list<double> extra) {
  v.insert(v.end(), extra.begin(), extra.end());
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

std::size_t index_in(const std::vector<double>& v, double x) {
  return static_cast<std::size_t>(std::lower_bound(v.begin(), v.end(), x) - v.begin());
}

// ---------------------------------------------------------------------------
// CSV emitters

std::vector<std::string> record_header(int max_m) {
  std::vector<std::string> h = {"strategy", "N", "M", "K", "Z", "regime", "eta", "delta",
                                "p_target", "p_real", "mu", "mean_id", "realization_id",
                                "F_avg", "J_index"};
  for (int j = 1; j <= max_m; ++j) h.push_back("gamma_" + std::to_string(j));
  for (const char* s : {"t", "r", "seed", "symmetry"}) h.emplace_back(s);
  return h;
}

std::vector<std::string> record_cells(const FidelityRecord& r, int max_m,
                                      const std::string& symmetry) {
  std::vector<std::string> c = {strategy::to_string(r.strategy),
                                std::to_string(r.params.modes),
                                std::to_string(r.m),
                                std::to_string(r.k),
                                num(r.z),
                                r.regime,
                                num(r.params.eta),
                                num(r.params.delta),
                                num(r.p_target),
                                num(r.p_real),
                                num(r.mu),
                                std::to_string(r.mean_id),
                                std::to_string(r.realization_id),
                                num(r.f_avg),
                                r.j_index ? num(*r.j_index) : std::string()};
  for (int j = 0; j < max_m; ++j) {
    c.push_back(j < static_cast<int>(r.gamma.size()) ? num(r.gamma[static_cast<std::size_t>(j)])
                                                     : std::string());
  }
  c.push_back(modes_field(r.t));
  c.push_back(modes_field(r.r));
  c.push_back(std::to_string(r.seed));
  c.push_back(symmetry);
  return c;
}

std::string noise_csv(const std::vector<NoiseRow>& rows) {
  std::size_t width = 0;
  for (const auto& r : rows) width = std::max(width, r.lambda.size());
  std::vector<std::string> h = {"symmetry", "N", "Z", "mu", "mean_id", "realization_id", "seed"};
  for (std::size_t i = 1; i <= width; ++i) h.push_back("lambda_" + std::to_string(i));
  Csv csv(h);
  for (const auto& r : rows) {
    std::vector<std::string> c = {to_string(r.symmetry), std::to_string(r.n), num(r.z),
                                  num(r.mu), std::to_string(r.mean_id),
                                  std::to_string(r.realization_id), std::to_string(r.seed)};
    for (std::size_t i = 0; i < width; ++i) {
      c.push_back(i < r.lambda.size() ? num(r.lambda[i]) : std::string());
    }
    csv.row(c);
  }
  return csv.str();
}

std::string coupling_csv(const ExperimentConfig& c, const std::vector<double>& etas) {
  Csv csv({"N", "eta", "delta", "i", "j", "P_ij"});
  std::set<int> modes(c.modes.begin(), c.modes.end());
  for (int n : modes) {
    for (double eta : etas) {
      const auto p = channel::coupling_report(
          make_params(n, eta, c.delta, std::vector<double>(static_cast<std::size_t>(n), 0.0)));
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          csv.row({std::to_string(n), num(eta), num(c.delta), std::to_string(i + 1),
                   std::to_string(j + 1), num(p(i, j))});
        }
      }
    }
  }
  return csv.str();
}

void write_file(const std::filesystem::path& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << data;
  if (!out) throw Error("write failed for " + path.string());
}

}  // namespace

// ---------------------------------------------------------------------------
// Public config API

std::string to_string(Regime r) { return regime_label(r); }

std::string to_string(Symmetry s) {
  return s == Symmetry::symmetric ? "symmetric" : "asymmetric";
}

std::string to_string(Profile p) { return p == Profile::ci ? "ci" : "full"; }

Profile parse_profile(const std::string& name) {
  if (name == "ci") return Profile::ci;
  if (name == "full") return Profile::full;
  throw ConfigError("profile must be ci or full, got '" + name + "'");
}

ExperimentConfig parse_config(const std::string& text, Profile profile) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  Reader rd(text);
  rd.only_keys(doc, "",
               {"regime", "modes", "clones", "width", "budget", "lambda_x", "eta", "delta", "p",
                "mu", "channel_symmetry", "num_mean_vectors", "num_realizations", "strategies",
                "seed", "output_dir", "boxplot", "boundary", "density_points",
                "allow_large_modes", "cache_dir", "optimizer"});

  ExperimentConfig c;
  c.profile = profile;
  if (!doc.contains("regime")) throw ConfigError("config: 'regime' is required");
  c.regime = parse_regime(rd.string(doc["regime"], "regime"), rd);

  if (doc.contains("modes")) c.modes = rd.integers(doc["modes"], "modes");
  if (doc.contains("clones")) c.clones = rd.integer(doc["clones"], "clones");
  if (doc.contains("width")) c.width = rd.integer(doc["width"], "width");
  if (doc.contains("budget")) c.budget = rd.numbers(doc["budget"], "budget");
  if (doc.contains("lambda_x")) c.lambda_x = rd.numbers(doc["lambda_x"], "lambda_x");
  if (doc.contains("eta")) c.eta = rd.numbers(doc["eta"], "eta");
  if (doc.contains("delta")) c.delta = rd.number(doc["delta"], "delta");
  if (doc.contains("p")) c.p = rd.numbers(doc["p"], "p");
  if (doc.contains("mu")) c.mu = rd.numbers(doc["mu"], "mu");
  if (doc.contains("channel_symmetry")) {
    c.symmetry.clear();
    for (const auto& s : rd.strings(doc["channel_symmetry"], "channel_symmetry")) {
      c.symmetry.push_back(parse_symmetry(s, rd));
    }
  }
  const int default_count = profile == Profile::ci ? 10 : 50;
  c.mean_vectors = doc.contains("num_mean_vectors")
                       ? rd.integer(doc["num_mean_vectors"], "num_mean_vectors")
                       : default_count;
  c.realizations = doc.contains("num_realizations")
                       ? rd.integer(doc["num_realizations"], "num_realizations")
                       : default_count;
  if (doc.contains("strategies")) {
    for (const auto& s : rd.strings(doc["strategies"], "strategies")) {
      try {
        c.strategies.push_back(strategy::parse_strategy(s));
      } catch (const ConfigError&) {
        rd.fail("strategies", "contains unknown strategy '" + s + "'");
      }
    }
  } else {
    c.strategies = default_strategies();
  }
  if (doc.contains("seed")) {
    const auto& s = doc["seed"];
    if (s.is_number_unsigned()) {
      c.seed = s.get<std::uint64_t>();
    } else if (s.is_number_integer() && s.get<long long>() >= 0) {
      c.seed = static_cast<std::uint64_t>(s.get<long long>());
    } else {
      rd.fail("seed", "must be a nonnegative 64-bit integer");
    }
  }
  if (doc.contains("output_dir")) c.output_dir = rd.string(doc["output_dir"], "output_dir");
  if (doc.contains("cache_dir")) c.cache_dir = rd.string(doc["cache_dir"], "cache_dir");
  if (doc.contains("density_points")) {
    c.density_points = rd.integer(doc["density_points"], "density_points");
  }
  if (doc.contains("allow_large_modes")) {
    if (!doc["allow_large_modes"].is_boolean()) rd.fail("allow_large_modes", "must be a boolean");
    c.allow_large_modes = doc["allow_large_modes"].get<bool>();
  }
  if (doc.contains("boxplot")) {
    const auto& b = doc["boxplot"];
    rd.only_keys(b, "boxplot", {"p", "eta"});
    if (b.contains("p")) c.boxplot_p = rd.number(b["p"], "p");
    if (b.contains("eta")) c.boxplot_eta = rd.number(b["eta"], "eta");
  }
  if (doc.contains("boundary")) {
    const auto& b = doc["boundary"];
    rd.only_keys(b, "boundary", {"clones", "grid_resolution"});
    if (b.contains("clones")) c.boundary_clones = rd.integers(b["clones"], "clones");
    if (b.contains("grid_resolution")) {
      c.grid_resolution = rd.number(b["grid_resolution"], "grid_resolution");
    }
  }
  if (doc.contains("optimizer")) {
    const auto& o = doc["optimizer"];
    rd.only_keys(o, "optimizer",
                 {"grid_steps", "multistarts", "refine_starts", "max_refine_evals", "refine_tol"});
    auto& g = c.optimizer;
    if (o.contains("grid_steps")) g.grid_steps = rd.integer(o["grid_steps"], "grid_steps");
    if (o.contains("multistarts")) g.multistarts = rd.integer(o["multistarts"], "multistarts");
    if (o.contains("refine_starts")) {
      g.refine_starts = rd.integer(o["refine_starts"], "refine_starts");
    }
    if (o.contains("max_refine_evals")) {
      g.max_refine_evals = rd.integer(o["max_refine_evals"], "max_refine_evals");
    }
    if (o.contains("refine_tol")) g.refine_tol = rd.number(o["refine_tol"], "refine_tol");
  }
  validate_impl(c, rd);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path, Profile profile) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), profile);
}

void validate(const ExperimentConfig& config) {
  const std::string empty;
  validate_impl(config, Reader(empty));
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["regime"] = regime_label(c.regime);
  j["modes"] = c.modes;
  j["clones"] = c.clones;
  j["width"] = c.width;
  j["budget"] = c.budget;
  j["lambda_x"] = c.lambda_x;
  j["eta"] = c.eta;
  j["delta"] = c.delta;
  j["p"] = c.p;
  j["mu"] = c.mu;
  std::vector<std::string> sym;
  for (auto s : c.symmetry) sym.push_back(to_string(s));
  j["channel_symmetry"] = sym;
  j["num_mean_vectors"] = c.mean_vectors;
  j["num_realizations"] = c.realizations;
  std::vector<std::string> strategies;
  for (auto s : c.strategies) strategies.push_back(strategy::to_string(s));
  j["strategies"] = strategies;
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir;
  j["boxplot"] = {{"p", c.boxplot_p}, {"eta", c.boxplot_eta}};
  j["boundary"] = {{"clones", c.boundary_clones}, {"grid_resolution", c.grid_resolution}};
  j["density_points"] = c.density_points;
  j["allow_large_modes"] = c.allow_large_modes;
  j["cache_dir"] = c.cache_dir;
  j["optimizer"] = {{"grid_steps", c.optimizer.grid_steps},
                    {"multistarts", c.optimizer.multistarts},
                    {"refine_starts", c.optimizer.refine_starts},
                    {"max_refine_evals", c.optimizer.max_refine_evals},
                    {"refine_tol", c.optimizer.refine_tol}};
  j["profile"] = to_string(c.profile);
  return j;
}

double effective_budget(const ExperimentConfig& config, int n, double level) {
  return config.regime == Regime::scaling ? n * level : level;
}

const std::vector<double>& budget_levels(const ExperimentConfig& config) {
  return config.regime == Regime::scaling ? config.lambda_x : config.budget;
}

// ---------------------------------------------------------------------------
// fixed_Z and scaling

SweepResult run_sweep(const ExperimentConfig& config, int workers) {
  if (config.regime != Regime::fixed_z && config.regime != Regime::scaling) {
    throw ConfigError("run_sweep: regime must be fixed_Z or scaling");
  }
  validate(config);
  const int L = config.mean_vectors;
  const auto& levels = budget_levels(config);
  const std::string regime = regime_label(config.regime);

  struct Task {
    Symmetry sym;
    int n;
    double level;
    double z;
    double eta;
    int mean_id;
    std::vector<double> lambda;
    // [p index][strategy index]
    std::vector<std::vector<FidelityRecord>> out;
  };

  SweepResult result;
  std::vector<Task> tasks;
  for (int n : config.modes) {
    for (auto sym : config.symmetry) {
      for (double level : levels) {
        const double z = effective_budget(config, n, level);
        for (int l = 0; l < L; ++l) {
          NoiseRow nr;
          nr.symmetry = sym;
          nr.n = n;
          nr.z = z;
          nr.mean_id = l;
          nr.seed = mean_seed(config, n, z, l);
          nr.lambda = mean_vector(config, sym, n, z, l);
          result.noise.push_back(nr);
        }
        for (double eta : config.eta) {
          // Symmetric channels are identical across mean ids; one task covers them.
          const int distinct = sym == Symmetry::symmetric ? 1 : L;
          for (int l = 0; l < distinct; ++l) {
            tasks.push_back({sym, n, level, z, eta, l, mean_vector(config, sym, n, z, l), {}});
          }
        }
      }
    }
  }

  parallel_for(tasks.size(), workers, [&](std::size_t i) {
    auto& task = tasks[i];
    const auto h = channel::channel_choi_cached(
        make_params(task.n, task.eta, config.delta, task.lambda), config.cache_dir);
    const int m = clones_for(config, task.n);
    const int k = width_for(config, task.n);
    auto gopt = config.optimizer;
    gopt.seed = derive_seed(config.seed, regime, "gamma", task.n, task.z, task.eta, task.mean_id);
    std::optional<FidelityRecord> dir;
    for (double p : config.p) {
      std::vector<FidelityRecord> at_p;
      for (auto s : config.strategies) {
        if (s == StrategyId::dir && dir) {
          at_p.push_back(*dir);
          continue;
        }
        auto rec = strategy::run_strategy(s, h, strategy_config(s, m, k, p, gopt));
        rec.z = task.z;
        rec.regime = regime;
        if (s == StrategyId::dir) dir = rec;
        at_p.push_back(std::move(rec));
      }
      task.out.push_back(std::move(at_p));
    }
  });

  // Canonical order: N, symmetry, level, eta, p, strategy, mean id.
  std::size_t cursor = 0;
  for (int n : config.modes) {
    for (auto sym : config.symmetry) {
      for (double level : levels) {
        for (double eta : config.eta) {
          const int distinct = sym == Symmetry::symmetric ? 1 : L;
          const std::size_t first = cursor;
          cursor += static_cast<std::size_t>(distinct);
          for (std::size_t pi = 0; pi < config.p.size(); ++pi) {
            for (std::size_t si = 0; si < config.strategies.size(); ++si) {
              SummaryRow summary;
              summary.symmetry = sym;
              summary.n = n;
              summary.level = level;
              summary.eta = eta;
              summary.p_grid = config.p[pi];
              summary.strategy = config.strategies[si];
              std::vector<double> f;
              std::vector<double> j;
              for (int l = 0; l < L; ++l) {
                const auto& task = tasks[first + static_cast<std::size_t>(
                                                     sym == Symmetry::symmetric ? 0 : l)];
                SweepRow row;
                row.record = task.out[pi][si];
                row.record.mean_id = l;
                row.record.realization_id = -1;
                row.record.seed = mean_seed(config, n, task.z, l);
                row.symmetry = sym;
                row.level = level;
                row.p_grid = config.p[pi];
                summary.z = task.z;
                f.push_back(row.record.f_avg);
                if (row.record.j_index) j.push_back(*row.record.j_index);
                result.rows.push_back(std::move(row));
              }
              summary.f_avg = metrics::mean_se(f);
              summary.j_index = metrics::mean_se(j);
              result.summary.push_back(summary);

              const int m = clones_for(config, n);
              if (summary.strategy == StrategyId::div && m >= 2 && j.size() >= 2) {
                DensityRow d;
                d.symmetry = sym;
                d.n = n;
                d.m = m;
                d.level = level;
                d.eta = eta;
                d.p_grid = config.p[pi];
                d.curve = metrics::empirical_density(j, 1.0 / m, 1.0, config.density_points);
                result.density.push_back(std::move(d));
              }
            }
          }
        }
      }
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// stochastic

StochasticResult run_stochastic(const ExperimentConfig& config, int workers) {
  if (config.regime != Regime::stochastic) {
    throw ConfigError("run_stochastic: regime must be stochastic");
  }
  validate(config);
  const int L = config.mean_vectors;
  const int R = config.realizations;
  const std::string regime = regime_label(config.regime);
  const auto ps = sorted_union(config.p, {config.boxplot_p, 1.0});
  const auto etas = sorted_union(config.eta, {config.boxplot_eta});
  const std::size_t p1 = index_in(ps, 1.0);
  const std::size_t pbox = index_in(ps, config.boxplot_p);

  struct Design {
    int n;
    double z;
    double eta;
    int mean_id;
    std::vector<int> t;
    std::vector<int> r;
    std::vector<int> t_dir;
    std::vector<int> r_dir;
    std::vector<double> gamma;
    std::vector<tensor::ComplexMatrix> decoders;  // one per entry of ps
  };
  struct Evaluation {
    std::size_t design;
    std::size_t realization_block;  // first realization in noise rows
    double mu;
    std::vector<std::vector<double>> gain;  // [p][realization]
    std::vector<FidelityRecord> boxplot;
  };

  StochasticResult result;
  std::vector<std::vector<double>> means;  // by (n, z, mean) in noise order
  std::map<std::tuple<int, double, int>, std::size_t> mean_index;
  std::map<std::tuple<int, double, double, int>, std::size_t> realization_index;
  for (int n : config.modes) {
    for (double z : config.budget) {
      for (int l = 0; l < L; ++l) {
        NoiseRow nr;
        nr.n = n;
        nr.z = z;
        nr.mean_id = l;
        nr.seed = mean_seed(config, n, z, l);
        nr.lambda = mean_vector(config, Symmetry::asymmetric, n, z, l);
        mean_index[{n, z, l}] = result.noise.size();
        result.noise.push_back(nr);
      }
      for (double mu : config.mu) {
        for (int l = 0; l < L; ++l) {
          const auto& mean_row = result.noise[mean_index[{n, z, l}]];
          noise::MeanAllocation mean{mean_row.lambda, z};
          std::vector<noise::MeanAllocation> reals;
          realization_index[{n, z, mu, l}] = result.noise.size();
          for (int r = 0; r < R; ++r) {
            NoiseRow nr;
            nr.n = n;
            nr.z = z;
            nr.mu = mu;
            nr.mean_id = l;
            nr.realization_id = r;
            nr.seed = derive_seed(config.seed, regime, "realization", n, z, mu, l, r);
            Rng rng(nr.seed);
            auto real = noise::perturb_and_project(mean, noise::sample_fluctuation(mu, n, rng));
            nr.lambda = real.lambda;
            reals.push_back(std::move(real));
            result.noise.push_back(nr);
          }
          result.variance.push_back({n, z, mu, l, noise::cluster_variance(mean, reals)});
        }
      }
    }
  }

  std::vector<Design> designs;
  for (int n : config.modes) {
    for (double z : config.budget) {
      for (double eta : etas) {
        for (int l = 0; l < L; ++l) designs.push_back({n, z, eta, l, {}, {}, {}, {}, {}, {}});
      }
    }
  }
  parallel_for(designs.size(), workers, [&](std::size_t i) {
    auto& d = designs[i];
    const auto& lambda = result.noise[mean_index.at({d.n, d.z, d.mean_id})].lambda;
    const auto h = channel::channel_choi_cached(make_params(d.n, d.eta, config.delta, lambda),
                                                config.cache_dir);
    const int m = clones_for(config, d.n);
    const int k = width_for(config, d.n);
    const auto sel = strategy::select_modes(lambda, m, k, h);
    const auto dir = strategy::select_modes(lambda, 1, 1, h);
    d.t = sel.t;
    d.r = sel.r;
    d.t_dir = dir.t;
    d.r_dir = dir.r;
    auto gopt = config.optimizer;
    gopt.seed = derive_seed(config.seed, regime, "gamma", d.n, d.z, d.eta, d.mean_id);
    const auto best = decoder::optimize_gamma(m, h, d.t, d.r, 1.0, gopt);
    d.gamma = best.gamma;
    const auto e = cloner::cloner_choi(cloner::AsymmetryVector(d.gamma), gopt.sdp);
    const auto qr = decoder::build_qr(decoder::compose_effective_map(e, h, d.t, d.r));
    for (double p : ps) {
      d.decoders.push_back(p == 1.0 ? best.decoder.choi
                                    : decoder::purification_sdp(qr, p, gopt.sdp).choi);
    }
  });

  std::vector<Evaluation> evals;
  for (std::size_t di = 0; di < designs.size(); ++di) {
    const auto& d = designs[di];
    for (double mu : config.mu) {
      evals.push_back({di, realization_index.at({d.n, d.z, mu, d.mean_id}), mu, {}, {}});
    }
  }
  parallel_for(evals.size(), workers, [&](std::size_t i) {
    auto& ev = evals[i];
    const auto& d = designs[ev.design];
    const int m = static_cast<int>(d.t.size());
    const auto e = cloner::cloner_choi(cloner::AsymmetryVector(d.gamma), config.optimizer.sdp);
    const bool box_cell = d.eta == config.boxplot_eta;
    ev.gain.assign(ps.size(), std::vector<double>(static_cast<std::size_t>(R), 0.0));
    const auto j_div = metrics::asymmetry_index(
        cloner::clone_fidelities(cloner::AsymmetryVector(d.gamma)).fidelity);
    for (int r = 0; r < R; ++r) {
      const auto& row = result.noise[ev.realization_block + static_cast<std::size_t>(r)];
      const auto h = channel::channel_choi(make_params(d.n, d.eta, config.delta, row.lambda));
      const auto truth = decoder::build_qr(decoder::compose_effective_map(e, h, d.t, d.r));
      std::vector<decoder::BlindEvaluation> f;
      for (const auto& jd : d.decoders) f.push_back(decoder::evaluate_decoder(jd, truth));
      for (std::size_t pi = 0; pi < ps.size(); ++pi) {
        ev.gain[pi][static_cast<std::size_t>(r)] = f[pi].f_avg - f[p1].f_avg;
      }
      if (!box_cell) continue;
      FidelityRecord base;
      base.params = h.params;
      base.z = d.z;
      base.regime = regime;
      base.mu = ev.mu;
      base.mean_id = d.mean_id;
      base.realization_id = r;
      base.seed = row.seed;

      FidelityRecord dir = base;
      dir.strategy = StrategyId::dir;
      dir.m = 1;
      dir.k = 1;
      dir.t = d.t_dir;
      dir.r = d.r_dir;
      dir.gamma = {1.0};
      dir.f_avg = strategy::single_branch_fidelity(h, d.t_dir[0], d.r_dir[0]);
      std::vector<double> lone(static_cast<std::size_t>(d.n), 0.5);
      lone[0] = 1.0;
      dir.j_index = metrics::asymmetry_index(lone);
      ev.boxplot.push_back(dir);

      FidelityRecord div = base;
      div.strategy = StrategyId::div;
      div.m = m;
      div.k = static_cast<int>(d.r.size());
      div.p_target = config.boxplot_p;
      div.p_real = f[pbox].p_real;
      div.f_avg = f[pbox].f_avg;
      div.gamma = d.gamma;
      div.j_index = j_div;
      div.t = d.t;
      div.r = d.r;
      ev.boxplot.push_back(div);
    }
  });

  // Canonical order: N, Z, mu, then grid p and eta (heatmap) or mean and
  // realization (boxplot).
  for (int n : config.modes) {
    for (double z : config.budget) {
      for (double mu : config.mu) {
        for (double p : config.p) {
          for (double eta : config.eta) {
            std::vector<double> g;
            for (const auto& ev : evals) {
              const auto& d = designs[ev.design];
              if (d.n != n || d.z != z || ev.mu != mu || d.eta != eta) continue;
              const auto& row = ev.gain[index_in(ps, p)];
              g.insert(g.end(), row.begin(), row.end());
            }
            result.heatmap.push_back({n, z, mu, p, eta, metrics::mean_se(g)});
          }
        }
        for (const auto& ev : evals) {
          const auto& d = designs[ev.design];
          if (d.n != n || d.z != z || ev.mu != mu) continue;
          result.boxplot.insert(result.boxplot.end(), ev.boxplot.begin(), ev.boxplot.end());
        }
        std::vector<double> v;
        for (const auto& row : result.variance) {
          if (row.n == n && row.z == z && row.mu == mu) v.push_back(row.variance);
        }
        if (v.size() >= 2) {
          const double hi = std::max(1.25 * *std::max_element(v.begin(), v.end()), 1e-2);
          result.variance_density.push_back(
              {n, z, mu, metrics::empirical_density(v, 0.0, hi, config.density_points)});
        }
      }
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// boundary

std::vector<BoundaryRow> run_boundary(const ExperimentConfig& config) {
  validate(config);
  std::vector<BoundaryRow> rows;
  for (int m : config.boundary_clones) {
    const auto points = cloner::feasible_boundary(m, config.grid_resolution);
    for (std::size_t i = 0; i < points.size(); ++i) {
      rows.push_back({m, static_cast<int>(i), points[i]});
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Driver

RunResult run(const ExperimentConfig& config, const RunOptions& options) {
  validate(config);
  const auto started = std::chrono::steady_clock::now();
  std::filesystem::create_directories(options.out_dir);
  std::vector<std::pair<std::string, std::string>> files;
  json seeds = json::array();

  auto density_header = [](std::vector<std::string> keys) {
    for (const char* s : {"x", "density", "bandwidth"}) keys.emplace_back(s);
    return keys;
  };

  switch (config.regime) {
    case Regime::fixed_z:
    case Regime::scaling: {
      const auto res = run_sweep(config, options.workers);
      int max_m = 1;
      for (const auto& row : res.rows) max_m = std::max(max_m, row.record.m);
      Csv records(record_header(max_m));
      for (const auto& row : res.rows) {
        records.row(record_cells(row.record, max_m, to_string(row.symmetry)));
      }
      const std::string level_name = config.regime == Regime::scaling ? "lambda_x" : "Z_level";
      Csv summary({"symmetry", "N", level_name, "Z", "eta", "p", "strategy", "count",
                   "F_avg_mean", "F_avg_se", "J_count", "J_mean", "J_se"});
      for (const auto& s : res.summary) {
        summary.row({to_string(s.symmetry), std::to_string(s.n), num(s.level), num(s.z),
                     num(s.eta), num(s.p_grid), strategy::to_string(s.strategy),
                     std::to_string(s.f_avg.count), num(s.f_avg.mean), num(s.f_avg.se),
                     std::to_string(s.j_index.count), num(s.j_index.mean), num(s.j_index.se)});
      }
      Csv density(density_header({"symmetry", "N", "M", level_name, "eta", "p"}));
      for (const auto& d : res.density) {
        for (std::size_t i = 0; i < d.curve.x.size(); ++i) {
          density.row({to_string(d.symmetry), std::to_string(d.n), std::to_string(d.m),
                       num(d.level), num(d.eta), num(d.p_grid), num(d.curve.x[i]),
                       num(d.curve.density[i]), num(d.curve.bandwidth)});
        }
      }
      for (const auto& nr : res.noise) {
        seeds.push_back({{"task", "mean"}, {"symmetry", to_string(nr.symmetry)}, {"N", nr.n},
                         {"Z", nr.z}, {"mean_id", nr.mean_id}, {"seed", nr.seed}});
      }
      files.emplace_back("records.csv", records.str());
      files.emplace_back("summary.csv", summary.str());
      files.emplace_back("density.csv", density.str());
      files.emplace_back("noise.csv", noise_csv(res.noise));
      files.emplace_back("coupling.csv", coupling_csv(config, config.eta));
      break;
    }
    case Regime::stochastic: {
      const auto res = run_stochastic(config, options.workers);
      Csv heat({"N", "Z", "mu", "p", "eta", "count", "G_mean", "G_se"});
      for (const auto& c : res.heatmap) {
        heat.row({std::to_string(c.n), num(c.z), num(c.mu), num(c.p), num(c.eta),
                  std::to_string(c.gain.count), num(c.gain.mean), num(c.gain.se)});
      }
      int max_m = 1;
      for (const auto& r : res.boxplot) max_m = std::max(max_m, r.m);
      Csv box(record_header(max_m));
      for (const auto& r : res.boxplot) box.row(record_cells(r, max_m, "asymmetric"));
      Csv var({"N", "Z", "mu", "mean_id", "variance"});
      for (const auto& v : res.variance) {
        var.row({std::to_string(v.n), num(v.z), num(v.mu), std::to_string(v.mean_id),
                 num(v.variance)});
      }
      Csv vden(density_header({"N", "Z", "mu"}));
      for (const auto& d : res.variance_density) {
        for (std::size_t i = 0; i < d.curve.x.size(); ++i) {
          vden.row({std::to_string(d.n), num(d.z), num(d.mu), num(d.curve.x[i]),
                    num(d.curve.density[i]), num(d.curve.bandwidth)});
        }
      }
      for (const auto& nr : res.noise) {
        if (nr.realization_id >= 0) continue;
        seeds.push_back({{"task", "mean"}, {"N", nr.n}, {"Z", nr.z}, {"mean_id", nr.mean_id},
                         {"seed", nr.seed}});
      }
      files.emplace_back("gain_heatmap.csv", heat.str());
      files.emplace_back("boxplot.csv", box.str());
      files.emplace_back("cluster_variance.csv", var.str());
      files.emplace_back("cluster_variance_density.csv", vden.str());
      files.emplace_back("noise.csv", noise_csv(res.noise));
      files.emplace_back("coupling.csv",
                         coupling_csv(config, sorted_union(config.eta, {config.boxplot_eta})));
      break;
    }
    case Regime::boundary: {
      const auto rows = run_boundary(config);
      int max_m = 1;
      for (const auto& r : rows) max_m = std::max(max_m, r.m);
      std::vector<std::string> h = {"M", "point_id"};
      for (int j = 1; j <= max_m; ++j) h.push_back("gamma_" + std::to_string(j));
      for (int j = 1; j <= max_m; ++j) h.push_back("F_" + std::to_string(j));
      Csv csv(h);
      for (const auto& r : rows) {
        std::vector<std::string> c = {std::to_string(r.m), std::to_string(r.point_id)};
        for (int j = 0; j < max_m; ++j) {
          c.push_back(j < r.m ? num(r.point.gamma[static_cast<std::size_t>(j)]) : "");
        }
        for (int j = 0; j < max_m; ++j) {
          c.push_back(j < r.m ? num(r.point.fidelity[static_cast<std::size_t>(j)]) : "");
        }
        csv.row(c);
      }
      files.emplace_back("boundary.csv", csv.str());
      break;
    }
  }

  RunResult out;
  json outputs = json::array();
  for (const auto& [name, data] : files) {
    const auto path = options.out_dir / name;
    write_file(path, data);
    out.files.push_back(path);
    outputs.push_back({{"file", name}, {"bytes", data.size()}, {"fnv1a64", hex64(fnv1a64(data))}});
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  const std::time_t now = std::time(nullptr);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));

  json manifest;
  manifest["version"] = kVersion;
  manifest["regime"] = regime_label(config.regime);
  manifest["config"] = to_json(config);
  manifest["master_seed"] = config.seed;
  manifest["task_seeds"] = seeds;
  manifest["outputs"] = outputs;
  manifest["excluded"] = {{"wall_clock_seconds", seconds},
                          {"finished_utc", stamp},
                          {"workers", options.workers},
                          {"out_dir", options.out_dir.string()}};
  const auto manifest_path = options.out_dir / "manifest.json";
  write_file(manifest_path, manifest.dump(2) + "\n");
  out.files.push_back(manifest_path);
  out.manifest = std::move(manifest);
  return out;
}

// ---------------------------------------------------------------------------
// Invariant suite

std::vector<CheckLine> validate_invariants(std::uint64_t seed) {
  std::vector<CheckLine> lines;
  Rng rng(derive_seed(seed, "validate"));
  auto check = [&](const std::string& name, auto&& body) {
    CheckLine line{name, false, ""};
    try {
      const auto [ok, detail] = body();
      line.passed = ok;
      line.detail = detail;
    } catch (const std::exception& e) {
      line.detail = std::string("exception: ") + e.what();
    }
    lines.push_back(line);
  };
  auto detail = [](const char* label, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s=%.3e", label, v);
    return std::string(buf);
  };

  check("symmetric cloner fidelity M=2", [&] {
    const auto g = cloner::AsymmetryVector::uniform(2);
    const auto closed = cloner::clone_fidelities(g).fidelity;
    const auto sdp = cloner::choi_fidelities(cloner::cloner_choi(g));
    double closed_err = 0.0;
    double sdp_err = 0.0;
    for (std::size_t k = 0; k < 2; ++k) {
      closed_err = std::max(closed_err, std::abs(closed[k] - 5.0 / 6.0));
      sdp_err = std::max(sdp_err, std::abs(sdp[k] - 5.0 / 6.0));
    }
    return std::pair{closed_err < 1e-6 && sdp_err < 1e-4, detail("sdp err", sdp_err)};
  });

  check("amplitude identity", [&] {
    double err = 0.0;
    for (int i = 0; i < 100; ++i) {
      const int m = 2 + i % 4;
      const auto beta = cloner::clone_amplitudes(
                            cloner::AsymmetryVector(rng.dirichlet(static_cast<std::size_t>(m))))
                            .beta;
      double s1 = 0.0;
      double s2 = 0.0;
      for (double b : beta) {
        s1 += b;
        s2 += b * b;
      }
      err = std::max(err, std::abs(s2 + s1 * s1 - 2.0));
    }
    return std::pair{err < 1e-9, detail("err", err)};
  });

  check("channel trace preservation and unitality", [&] {
    double err = 0.0;
    for (int i = 0; i < 10; ++i) {
      const int n = 1 + i % 3;
      std::vector<double> lambda;
      for (int q = 0; q < n; ++q) lambda.push_back(rng.uniform());
      const auto h = channel::channel_choi(
          make_params(n, rng.uniform(), 0.2 + 2.0 * rng.uniform(), lambda));
      const auto dim = std::size_t{1} << n;
      std::vector<std::size_t> in(static_cast<std::size_t>(n));
      std::iota(in.begin(), in.end(), std::size_t{0});
      const auto tr_out = tensor::partial_trace_qubits(h.choi, 2 * n, in);
      err = std::max(err, tensor::max_abs(tr_out - tensor::identity(dim)));
      err = std::max(err, tensor::max_abs(channel::apply_channel(h, tensor::identity(dim)) -
                                          tensor::identity(dim)));
    }
    return std::pair{err < 1e-8, detail("err", err)};
  });

  check("decoder on identity and depolarizing channels", [&] {
    const auto id = cloner::ClonerChoi{tensor::phi_plus_unnormalized(), 1};
    const auto clean = channel::channel_choi(make_params(1, 0.0, 1.0, {0.0}));
    const auto noisy = channel::channel_choi(make_params(1, 0.0, 1.0, {0.4}));
    const double f1 = decoder::purification_sdp(
                          decoder::build_qr(decoder::compose_effective_map(id, clean, {0}, {0})), 1.0)
                          .f_avg;
    const double f2 = decoder::purification_sdp(
                          decoder::build_qr(decoder::compose_effective_map(id, noisy, {0}, {0})), 1.0)
                          .f_avg;
    const double err = std::max(std::abs(f1 - 1.0), std::abs(f2 - 0.8));
    return std::pair{err < 1e-6, detail("err", err)};
  });

  check("Rayleigh bound dominates the decoder SDP", [&] {
    double worst = 1.0;
    for (int i = 0; i < 5; ++i) {
      const auto h = channel::channel_choi(
          make_params(2, rng.uniform(), 1.0, {rng.uniform(), rng.uniform()}));
      const auto e = cloner::cloner_choi(cloner::AsymmetryVector(rng.dirichlet(2)));
      const auto qr = decoder::build_qr(decoder::compose_effective_map(e, h, {0, 1}, {0, 1}));
      const double bound = decoder::rayleigh_bound(qr).value;
      const double f = decoder::purification_sdp(qr, 0.5).f_success;
      worst = std::min(worst, bound - f);
    }
    return std::pair{worst >= -1e-6, detail("min margin", worst)};
  });

  check("SDP value equals largest eigenvalue", [&] {
    double err = 0.0;
    for (int i = 0; i < 5; ++i) {
      const std::size_t d = 4 + 4 * static_cast<std::size_t>(i);
      const auto c = tensor::random_hermitian(d, rng);
      sdp::SdpProblem prob;
      prob.blocks = {d};
      prob.objective = {c};
      prob.constraints.push_back({{sdp::Term::dense(0, tensor::identity(d))}, 1.0});
      const auto sol = sdp::solve(prob);
      err = std::max(err, std::abs(sol.primal_objective - tensor::lambda_max(c)));
    }
    return std::pair{err < 1e-7, detail("err", err)};
  });

  check("strategy dominance div >= sym >= blind", [&] {
    double worst = 1.0;
    for (int i = 0; i < 3; ++i) {
      const auto mean = noise::sample_mean_allocations(2, 0.6, 1, rng).front();
      const auto h = channel::channel_choi(make_params(2, 0.5 * i, 1.0, mean.lambda));
      const auto cfg = strategy_config(StrategyId::div, 2, 2, 0.8, {});
      const double div = strategy::run_strategy(StrategyId::div, h, cfg).f_avg;
      const double sym = strategy::run_strategy(StrategyId::sym, h, cfg).f_avg;
      const double blind = strategy::run_strategy(StrategyId::blind, h, cfg).f_avg;
      worst = std::min({worst, div - sym, sym - blind});
    }
    return std::pair{worst >= -1e-6, detail("min margin", worst)};
  });

  check("projected allocations are feasible", [&] {
    double err = 0.0;
    for (double mu : {0.25, 0.5, 0.75, 1.0}) {
      const auto mean = noise::sample_mean_allocations(3, 1.2, 1, rng).front();
      for (int r = 0; r < 200; ++r) {
        const auto x = noise::perturb_and_project(mean, noise::sample_fluctuation(mu, 3, rng));
        double sum = 0.0;
        for (double v : x.lambda) {
          sum += v;
          err = std::max({err, -v, v - 1.0});
        }
        err = std::max(err, std::abs(sum - 1.2));
      }
    }
    return std::pair{err <= 1e-10, detail("err", err)};
  });
  return lines;
}

}  // namespace qmimo::experiment
