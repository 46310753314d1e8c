#include <cstdint>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "qmimo/error.hpp"
#include "qmimo/experiment.hpp"

namespace {

using qmimo::experiment::ExperimentConfig;
using qmimo::experiment::Regime;

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  int workers = 0;
  std::string out;
  std::string profile = "ci";
};

void add_common(CLI::App* cmd, Flags& f, bool config_required) {
  auto* opt = cmd->add_option("--config", f.config, "JSON experiment config");
  if (config_required) opt->required();
  opt->check(CLI::ExistingFile);
  cmd->add_option("--seed", f.seed, "master seed, overrides the config");
  cmd->add_option("--workers", f.workers, "worker threads (0: hardware concurrency)")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--out", f.out, "output directory, overrides the config");
  cmd->add_option("--profile", f.profile, "ci or full")->check(CLI::IsMember({"ci", "full"}));
}

int run_regime(Regime expected, const Flags& f) {
  const auto profile = qmimo::experiment::parse_profile(f.profile);
  ExperimentConfig config;
  if (f.config.empty()) {
    config.regime = expected;
    config.profile = profile;
  } else {
    config = qmimo::experiment::load_config(f.config, profile);
  }
  if (config.regime != expected) {
    throw qmimo::ConfigError("config regime '" + qmimo::experiment::to_string(config.regime) +
                             "' does not match the subcommand");
  }
  if (f.seed) config.seed = *f.seed;
  qmimo::experiment::RunOptions options;
  options.out_dir = !f.out.empty() ? f.out : (!config.output_dir.empty() ? config.output_dir : "out");
  options.workers = f.workers > 0 ? f.workers
                                  : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  const auto result = qmimo::experiment::run(config, options);
  for (const auto& path : result.files) std::cout << path.string() << '\n';
  return 0;
}

int run_validate(const Flags& f) {
  std::uint64_t seed = f.seed.value_or(0);
  if (!f.config.empty()) {
    const auto config = qmimo::experiment::load_config(f.config,
                                                       qmimo::experiment::parse_profile(f.profile));
    if (!f.seed) seed = config.seed;
  }
  const auto lines = qmimo::experiment::validate_invariants(seed);
  int failed = 0;
  for (const auto& line : lines) {
    std::cout << (line.passed ? "PASS " : "FAIL ") << line.name << "  (" << line.detail << ")\n";
    if (!line.passed) ++failed;
  }
  std::cout << (lines.size() - static_cast<std::size_t>(failed)) << "/" << lines.size()
            << " invariants hold\n";
  return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cloning, crosstalk channel and purification experiments"};
  app.require_subcommand(1);
  Flags flags;

  auto* fixed = app.add_subcommand("fixed-z", "fixed total depolarization budget");
  auto* scaling = app.add_subcommand("scaling", "budget scaling with the number of modes");
  auto* stochastic = app.add_subcommand("stochastic", "fluctuating depolarization around means");
  auto* boundary = app.add_subcommand("boundary", "closed-form cloning trade-off surface");
  auto* validate = app.add_subcommand("validate", "fast invariant suite");
  add_common(fixed, flags, true);
  add_common(scaling, flags, true);
  add_common(stochastic, flags, true);
  add_common(boundary, flags, false);
  add_common(validate, flags, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*fixed) return run_regime(Regime::fixed_z, flags);
    if (*scaling) return run_regime(Regime::scaling, flags);
    if (*stochastic) return run_regime(Regime::stochastic, flags);
    if (*boundary) return run_regime(Regime::boundary, flags);
    if (*validate) return run_validate(flags);
  } catch (const qmimo::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
