#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "trustfed/adversary.hpp"
#include "trustfed/learner.hpp"
#include "trustfed/log.hpp"
#include "trustfed/metrics.hpp"
#include "trustfed/oracle.hpp"
#include "trustfed/taskmodel.hpp"
#include "trustfed/topology.hpp"
#include "trustfed/trust.hpp"

namespace trustfed {

// Which filtering rule the engine runs.
//  - Trusted:      score-based filtering of in-neighbors.
//  - OldBaseline:  no trust mechanism at all, every neighbor is used.
//  - OracleFilter: perfect knowledge, exactly the honest neighbors are used
//                  (scores are still tracked, so classification metrics stay
//                  defined, but never steer the updates).
enum class Variant { Trusted, OldBaseline, OracleFilter };

Variant parse_variant(const std::string& name);
std::string to_string(Variant variant);

struct SimConfig {
  TopologySpec topology;
  TrustModel trust;
  DataDistribution task;
  ConstraintParams constraint;

  std::uint32_t horizon = 1000;
  double radius = 1.0;
  double stepsize_scale = 1.0;
  std::optional<double> eta;    // pinned primal/dual step, else a / sqrt(T)
  std::optional<double> delta;  // pinned dual damping, else 1 / (4 eta^2)
  bool clip_inbox = false;      // project received models into the ball

  Variant variant = Variant::Trusted;
  AttackKind attack_kind = AttackKind::GaussianNoise;
  std::optional<double> attack_magnitude;  // default 10 * radius

  std::uint32_t realizations = 50;
  std::uint64_t seed = 1;
  std::uint32_t workers = 0;  // 0: one per hardware thread

  ComparatorOptions comparator;

  double resolved_eta() const;
  double resolved_delta() const;
  double resolved_attack_magnitude() const;
  AlgorithmParams algorithm() const;
  AttackStrategy attack() const;

  void validate() const;

  bool operator==(const SimConfig&) const = default;
};

// The same population with every Byzantine client removed: the induced
// honest subgraph, renumbered densely but keeping each survivor's seed
// label, so their streams (and thus their data) are unchanged.
SimConfig honest_restriction(const SimConfig& config);

// Live state of one realization. step() advances one round and appends to
// the log; the loop is deterministic given (config, realization).
class Simulation {
 public:
  Simulation(const SimConfig& config, std::uint32_t realization);
  ~Simulation();
  Simulation(Simulation&&) noexcept;
  Simulation& operator=(Simulation&&) noexcept;

  const GraphTopology& topology() const;
  std::uint32_t rounds_done() const;

  // Runs one round. With keep_detail the per-round model/dual/trust snapshot
  // is appended to log.rounds as well.
  void step(RealizationLog& log, bool keep_detail);

  const ClientState& client_state(ClientId v) const;  // honest clients only
  const TrustLedger& trust_ledger() const;

  // Largest observed values, for the empirical envelope constants.
  double max_loss_grad_norm() const;
  double max_abs_constraint() const;
  double max_constraint_slope() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct RealizationSummary {
  std::uint32_t realization = 0;
  double final_cumulative_regret = 0.0;
  double final_timeavg_regret = 0.0;
  double final_cumulative_violation_mean = 0.0;
  double final_cumulative_violation_max = 0.0;
  std::optional<std::uint32_t> settling_round;
  double comparator_objective = 0.0;
  double comparator_residual = 0.0;
  std::uint64_t comparator_iterations = 0;
  double max_loss_grad_norm = 0.0;
  double max_abs_constraint = 0.0;
  double max_constraint_slope = 0.0;
  std::vector<double> per_pair_cumulative_violation;
};

struct RealizationRun {
  RealizationLog log;
  Comparator comparator;
  SeriesBundle series;
  RealizationSummary summary;
};

// Runs one full realization: all rounds, the hindsight comparator, and the
// metric series. keep_detail controls RealizationLog.rounds.
RealizationRun run_realization(const SimConfig& config,
                               std::uint32_t realization,
                               bool keep_detail = true);

struct SettlingStats {
  std::uint32_t realizations = 0;
  std::uint32_t finite = 0;
  double fraction_finite = 0.0;
  std::uint32_t min = 0;
  std::uint32_t max = 0;
  double mean = 0.0;
  double median = 0.0;
};

struct BoundReport {
  BoundConstants constants;
  double regret_bound_at_horizon = 0.0;
  double violation_bound_at_horizon = 0.0;
  // Soft check: the mean cumulative regret stays below the envelope at
  // every round.
  bool regret_curve_below_bound = false;
};

struct ExperimentResult {
  SeriesBundle mean;                        // averaged over realizations
  std::vector<SeriesBundle> per_realization;
  std::vector<RealizationSummary> summaries;
  SettlingStats settling;
  BoundReport bounds;
};

// Runs every realization (in parallel across `workers` threads; results are
// a pure function of config and seed, never of the worker count) and
// aggregates.
ExperimentResult run_experiment(const SimConfig& config);

}  // namespace trustfed
