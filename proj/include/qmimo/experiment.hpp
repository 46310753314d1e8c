#pragma once

// Config-driven experiment runner: the fixed-budget, scaling and stochastic
// regimes, the cloning trade-off boundary, and their CSV/manifest outputs.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "qmimo/metrics.hpp"
#include "qmimo/strategy.hpp"

namespace qmimo::experiment {

inline constexpr const char* kVersion = "qmimo 1.0.0";

enum class Regime { fixed_z, scaling, stochastic, boundary };
enum class Symmetry { symmetric, asymmetric };
enum class Profile { ci, full };

std::string to_string(Regime r);
std::string to_string(Symmetry s);
std::string to_string(Profile p);
Profile parse_profile(const std::string& name);  // throws ConfigError

struct ExperimentConfig {
  Regime regime = Regime::fixed_z;
  std::vector<int> modes = {3};    // N; M = K = N unless overridden
  int clones = 0;                  // M, 0 means N
  int width = 0;                   // K, 0 means N
  std::vector<double> budget;      // Z for fixed_Z and stochastic
  std::vector<double> lambda_x;    // per-mode level for scaling, Z = M lambda_x
  std::vector<double> eta = {0.8};
  double delta = 1.0;
  std::vector<double> p = {0.8};
  std::vector<double> mu;          // stochastic fluctuation strengths
  std::vector<Symmetry> symmetry = {Symmetry::asymmetric};
  int mean_vectors = 0;            // L, 0 picks the profile default
  int realizations = 0;            // R, 0 picks the profile default
  std::vector<strategy::StrategyId> strategies;
  std::uint64_t seed = 0;
  std::string output_dir;
  double boxplot_p = 0.8;
  double boxplot_eta = 0.8;
  std::vector<int> boundary_clones = {2, 3};
  double grid_resolution = 0.05;
  int density_points = 512;
  bool allow_large_modes = false;  // N = 5
  std::string cache_dir;
  decoder::GammaOptions optimizer;
  Profile profile = Profile::ci;
};

// Parses and validates a JSON config. Errors carry the line of the offending
// key. The profile fills L and R when absent (ci: 10, full: 50) and caps N.
ExperimentConfig parse_config(const std::string& text, Profile profile = Profile::ci);
ExperimentConfig load_config(const std::filesystem::path& path,
                             Profile profile = Profile::ci);
void validate(const ExperimentConfig& config);  // throws ConfigError
nlohmann::json to_json(const ExperimentConfig& config);

// Budget used for N modes in the given regime: Z, or N lambda_x for scaling.
double effective_budget(const ExperimentConfig& config, int n, double level);
const std::vector<double>& budget_levels(const ExperimentConfig& config);

struct NoiseRow {
  Symmetry symmetry = Symmetry::asymmetric;
  int n = 0;
  double z = 0.0;
  double mu = 0.0;
  int mean_id = 0;
  int realization_id = -1;  // -1 for the mean vector itself
  std::uint64_t seed = 0;
  std::vector<double> lambda;
};

struct SweepRow {
  strategy::FidelityRecord record;
  Symmetry symmetry = Symmetry::asymmetric;
  double level = 0.0;   // Z or lambda_x as configured
  double p_grid = 0.0;  // grid value of p; dir records carry p_target = 1
};

struct SummaryRow {
  Symmetry symmetry = Symmetry::asymmetric;
  int n = 0;
  double level = 0.0;
  double z = 0.0;
  double eta = 0.0;
  double p_grid = 0.0;
  strategy::StrategyId strategy = strategy::StrategyId::dir;
  metrics::MeanSe f_avg;
  metrics::MeanSe j_index;
};

struct DensityRow {
  Symmetry symmetry = Symmetry::asymmetric;
  int n = 0;
  int m = 0;
  double level = 0.0;
  double eta = 0.0;
  double p_grid = 0.0;
  metrics::DensityCurve curve;
};

struct SweepResult {
  std::vector<SweepRow> rows;  // canonical order
  std::vector<NoiseRow> noise;
  std::vector<SummaryRow> summary;
  std::vector<DensityRow> density;
};

// fixed_Z and scaling.
SweepResult run_sweep(const ExperimentConfig& config, int workers = 1);

struct GainCell {
  int n = 0;
  double z = 0.0;
  double mu = 0.0;
  double p = 0.0;
  double eta = 0.0;
  metrics::MeanSe gain;  // over L x R realizations
};

struct VarianceRow {
  int n = 0;
  double z = 0.0;
  double mu = 0.0;
  int mean_id = 0;
  double variance = 0.0;
};

struct VarianceDensity {
  int n = 0;
  double z = 0.0;
  double mu = 0.0;
  metrics::DensityCurve curve;
};

struct StochasticResult {
  std::vector<NoiseRow> noise;
  std::vector<GainCell> heatmap;
  std::vector<strategy::FidelityRecord> boxplot;  // dir and div per realization
  std::vector<VarianceRow> variance;
  std::vector<VarianceDensity> variance_density;
};

// Decoders and asymmetry are designed on each mean vector and evaluated on
// every realization drawn around it, so G(1) = 0 holds per realization.
StochasticResult run_stochastic(const ExperimentConfig& config, int workers = 1);

struct BoundaryRow {
  int m = 0;
  int point_id = 0;
  cloner::CloneFidelityVector point;
};

std::vector<BoundaryRow> run_boundary(const ExperimentConfig& config);

struct RunOptions {
  std::filesystem::path out_dir;
  int workers = 1;
};

struct RunResult {
  std::vector<std::filesystem::path> files;
  nlohmann::json manifest;
};

// Runs the configured regime and writes its CSV files and manifest.json.
RunResult run(const ExperimentConfig& config, const RunOptions& options);

struct CheckLine {
  std::string name;
  bool passed = false;
  std::string detail;
};

// Fast invariant suite used by the `validate` subcommand.
std::vector<CheckLine> validate_invariants(std::uint64_t seed);

}  // namespace qmimo::experiment
