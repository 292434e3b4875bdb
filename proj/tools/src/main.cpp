#include <cstdint>
#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "trustfed/config.hpp"
#include "trustfed/engine.hpp"
#include "trustfed/output.hpp"
#include "trustfed/version.hpp"

namespace {

using namespace trustfed;

struct CommonFlags {
  std::string config_path;
  std::string out_dir = "out";
  std::string format = "csv,json,plot";
  std::string variant;
  std::string attack;
  std::uint64_t seed = 0;
  std::uint32_t realizations = 0;
  std::vector<std::string> overrides;

  CLI::Option* config_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* realizations_opt = nullptr;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
  flags.config_opt = cmd->add_option("-c,--config", flags.config_path,
                                     "JSON config file (defaults when omitted)")
                         ->check(CLI::ExistingFile);
  flags.seed_opt = cmd->add_option("--seed", flags.seed, "Master seed");
  flags.realizations_opt = cmd->add_option("--realizations",
                                           flags.realizations,
                                           "Number of independent runs");
  cmd->add_option("--variant", flags.variant,
                  "trusted, old-baseline, or oracle-filter");
  cmd->add_option("--attack", flags.attack,
                  "fixed-vector, gaussian-noise, sign-flip, dual-inflation, "
                  "or two-faced");
  cmd->add_option("-o,--out-dir", flags.out_dir, "Output directory")
      ->capture_default_str();
  cmd->add_option("--format", flags.format,
                  "Comma-separated artifact list: csv, json, plot")
      ->capture_default_str();
  cmd->add_option("--set", flags.overrides,
                  "Config override as key.path=value, applied last")
      ->take_all();
}

SimConfig load_config(const CommonFlags& flags) {
  std::vector<std::string> overrides;
  if (flags.seed_opt->count() > 0)
    overrides.push_back("seed=" + std::to_string(flags.seed));
  if (flags.realizations_opt->count() > 0)
    overrides.push_back("realizations=" + std::to_string(flags.realizations));
  if (!flags.variant.empty()) overrides.push_back("variant=" + flags.variant);
  if (!flags.attack.empty())
    overrides.push_back("attack.kind=" + flags.attack);
  overrides.insert(overrides.end(), flags.overrides.begin(),
                   flags.overrides.end());

  if (flags.config_opt->count() > 0)
    return parse_config(flags.config_path, overrides);
  SimConfig config;
  for (const std::string& assignment : overrides)
    apply_override(config, assignment);
  config.validate();
  return config;
}

void print_result(const SimConfig& config, const ExperimentResult& result) {
  const auto last = [](const std::vector<double>& v) {
    return v.empty() ? 0.0 : v.back();
  };
  std::printf("mean over %u realizations (%s, %s, seed %llu)\n",
              config.realizations, to_string(config.variant).c_str(),
              to_string(config.attack_kind).c_str(),
              static_cast<unsigned long long>(config.seed));
  std::printf("  time-avg regret:        %.6g\n",
              last(result.mean.timeavg_regret));
  std::printf("  time-avg violation:     %.6g (mean pair), %.6g (worst pair)\n",
              last(result.mean.timeavg_violation_mean),
              last(result.mean.timeavg_violation_max));
  std::printf("  misclassified senders:  %.4g%% honest, %.4g%% byzantine\n",
              100.0 * last(result.mean.misclass_honest),
              100.0 * last(result.mean.misclass_byz));
  if (config.variant != Variant::OldBaseline) {
    const SettlingStats& s = result.settling;
    if (s.finite > 0)
      std::printf(
          "  settling round:         median %.4g (finite %u/%u, max %u)\n",
          s.median, s.finite, s.realizations, s.max);
    else
      std::printf("  settling round:         none finite in %u runs\n",
                  s.realizations);
  }
}

void print_files(const std::string& out_dir,
                 const std::vector<std::string>& files) {
  std::printf("  wrote:");
  for (const std::string& f : files) std::printf(" %s/%s", out_dir.c_str(), f.c_str());
  std::printf("\n");
}

int run_command(const CommonFlags& flags) {
  const SimConfig config = load_config(flags);
  const OutputSelection selection = parse_output_selection(flags.format);
  std::printf("running %u realizations of %u rounds...\n", config.realizations,
              config.horizon);
  std::fflush(stdout);
  const ExperimentResult result = run_experiment(config);
  const auto files = emit_outputs(config, result, flags.out_dir, selection);
  print_result(config, result);
  print_files(flags.out_dir, files);
  return 0;
}

int compare_command(const CommonFlags& flags) {
  const SimConfig proposed = load_config(flags);
  const OutputSelection selection = parse_output_selection(flags.format);

  // The reference point: the unfiltered algorithm in the setting it was
  // built for, the same honest population with every attacker removed.
  SimConfig baseline = honest_restriction(proposed);
  baseline.variant = Variant::OldBaseline;

  std::printf("running proposed: %u realizations of %u rounds...\n",
              proposed.realizations, proposed.horizon);
  std::fflush(stdout);
  const ExperimentResult proposed_result = run_experiment(proposed);
  std::printf("running baseline (honest clients only, no filtering)...\n");
  std::fflush(stdout);
  const ExperimentResult baseline_result = run_experiment(baseline);

  const auto files =
      emit_comparison(proposed, proposed_result, baseline, baseline_result,
                      flags.out_dir, selection);
  std::printf("proposed ");
  print_result(proposed, proposed_result);
  std::printf("baseline ");
  print_result(baseline, baseline_result);
  print_files(flags.out_dir, files);

  const auto last = [](const std::vector<double>& v) {
    return v.empty() ? 0.0 : v.back();
  };
  const double p = last(proposed_result.mean.timeavg_regret);
  const double b = last(baseline_result.mean.timeavg_regret);
  if (b > 0.0)
    std::printf("final regret ratio (proposed / baseline): %.4g\n", p / b);
  return 0;
}

int check_command() {
  int failures = 0;
  const auto check = [&](const char* name, bool ok) {
    std::printf("%s %s\n", ok ? "ok:  " : "FAIL:", name);
    if (!ok) ++failures;
  };

  SimConfig config;
  config.topology.num_clients = 6;
  config.topology.num_byzantine = 3;
  config.task.dimension = 3;
  config.horizon = 50;
  config.realizations = 2;
  config.workers = 1;
  config.comparator.tolerance = 1e-5;

  const ExperimentResult first = run_experiment(config);
  const ExperimentResult second = run_experiment(config);
  check("identical rerun reproduces every series bit for bit",
        first.mean.cumulative_regret == second.mean.cumulative_regret &&
            first.mean.timeavg_violation_max ==
                second.mean.timeavg_violation_max &&
            first.mean.misclass_byz == second.mean.misclass_byz);

  SimConfig threaded = config;
  threaded.workers = 2;
  const ExperimentResult parallel = run_experiment(threaded);
  check("worker count does not change the results",
        first.mean.cumulative_regret == parallel.mean.cumulative_regret &&
            first.mean.timeavg_violation_mean ==
                parallel.mean.timeavg_violation_mean);

  const RealizationRun run = run_realization(config, 0);
  bool inside = true;
  for (const auto& model : run.log.final_models)
    inside = inside && model.norm() <= config.radius;
  check("final models stay inside the feasible ball", inside);

  bool nonneg = true;
  for (const auto& duals : run.log.final_duals)
    for (double lambda : duals) nonneg = nonneg && lambda >= 0.0;
  check("dual variables stay nonnegative", nonneg);

  check("comparator certificate is feasible",
        run.comparator.max_residual <= config.comparator.tolerance);

  bool totals = true;
  for (const auto& counts : run.log.classification)
    totals = totals && counts.honest_total == 6 &&
             counts.byzantine_total == 9 &&
             counts.honest_wrong <= counts.honest_total &&
             counts.byzantine_wrong <= counts.byzantine_total;
  check("classification counts cover exactly the incoming edges", totals);

  if (failures == 0) std::printf("all checks passed\n");
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trust-filtered decentralized online learning simulator"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  CommonFlags run_flags;
  CLI::App* run = app.add_subcommand(
      "run", "Run one experiment and write its artifacts");
  add_common_flags(run, run_flags);

  CommonFlags compare_flags;
  CLI::App* compare = app.add_subcommand(
      "compare", "Run an experiment next to its attacker-free baseline");
  add_common_flags(compare, compare_flags);

  CLI::App* check =
      app.add_subcommand("check", "Fast invariant smoke suite");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return run_command(run_flags);
    if (compare->parsed()) return compare_command(compare_flags);
    if (check->parsed()) return check_command();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
