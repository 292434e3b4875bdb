#include "trustfed/metrics.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "doctest.h"
#include "trustfed/engine.hpp"
#include "trustfed/rng.hpp"
#include "trustfed/taskmodel.hpp"

using namespace trustfed;

namespace {

// A two-client log with synthetic losses and samples; the comparator holds
// the origin for both clients so its per-round loss is reproducible.
struct CraftedRun {
  RealizationLog log;
  Comparator comp;
};

CraftedRun crafted_run(std::uint32_t horizon) {
  CraftedRun run;
  run.log.horizon = horizon;
  run.log.honest = {0, 1};
  run.log.honest_pairs = {{0, 1}};

  RandomStream rng(7);
  run.comp.models = {Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(2)};
  for (std::uint32_t t = 0; t < horizon; ++t) {
    std::vector<DataSample> row(2);
    std::vector<double> losses(2);
    for (int v = 0; v < 2; ++v) {
      row[v].features = rng.normal_vector(2);
      row[v].label = rng.uniform01() < 0.5 ? 1 : -1;
      losses[v] = rng.uniform(0.0, 2.0);
    }
    run.log.samples.push_back(std::move(row));
    run.log.losses.push_back(std::move(losses));
    run.log.pair_constraints.push_back({-0.25});
  }
  return run;
}

SimConfig desk_config() {
  SimConfig config;
  config.topology.num_clients = 3;
  config.topology.num_byzantine = 1;
  config.task.dimension = 2;
  config.horizon = 20;
  config.realizations = 1;
  config.comparator.tolerance = 1e-5;
  return config;
}

}  // namespace

TEST_CASE("time averages divide by the elapsed rounds") {
  const std::vector<double> flat{1.0, 2.0, 3.0};
  CHECK(time_average(flat) == std::vector<double>{1.0, 1.0, 1.0});

  const std::vector<double> constant{4.0, 4.0, 4.0};
  CHECK(time_average(constant) == std::vector<double>{4.0, 2.0, 4.0 / 3.0});

  const std::vector<double> zeros{0.0, 0.0};
  CHECK(time_average(zeros) == std::vector<double>{0.0, 0.0});

  CHECK(time_average(std::vector<double>{}).empty());
}

TEST_CASE("regret over zero rounds is zero") {
  const CraftedRun run = crafted_run(5);
  CHECK(cumulative_regret(run.log, run.comp, 0) == 0.0);
}

TEST_CASE("a trajectory that equals the comparator has zero regret") {
  CraftedRun run = crafted_run(6);
  for (std::uint32_t t = 0; t < 6; ++t)
    for (int v = 0; v < 2; ++v)
      run.log.losses[t][v] = loss(run.comp.models[v], run.log.samples[t][v]);
  CHECK(cumulative_regret(run.log, run.comp, 6) == 0.0);
}

TEST_CASE("regret rejects rounds beyond the log and mismatched comparators") {
  const CraftedRun run = crafted_run(5);
  CHECK_THROWS_AS(cumulative_regret(run.log, run.comp, 6),
                  std::invalid_argument);

  Comparator small;
  small.models = {Eigen::VectorXd::Zero(2)};
  CHECK_THROWS_AS(cumulative_regret(run.log, small, 5), std::invalid_argument);
}

TEST_CASE("violation at consensus accumulates the constant slack") {
  const CraftedRun run = crafted_run(8);
  CHECK(cumulative_violation(run.log, {0, 1}, 0) == 0.0);
  CHECK(cumulative_violation(run.log, {0, 1}, 8) == 8 * -0.25);
  // Either orientation of the pair addresses the same series.
  CHECK(cumulative_violation(run.log, {1, 0}, 8) ==
        cumulative_violation(run.log, {0, 1}, 8));
}

TEST_CASE("violation rejects unknown edges") {
  const CraftedRun run = crafted_run(3);
  CHECK_THROWS_AS(cumulative_violation(run.log, {0, 2}, 3),
                  std::invalid_argument);
}

TEST_CASE("misclassification rates split by sender class") {
  std::vector<ClassificationCounts> history(3);
  // Pre-observation state: all byzantine neighbors pass as trusted.
  history[0] = {0, 10, 6, 6};
  history[1] = {2, 10, 3, 6};
  history[2] = {0, 10, 0, 6};

  CHECK(misclassification_rate(history, 0).honest == 0.0);
  CHECK(misclassification_rate(history, 0).byzantine == 1.0);
  CHECK(misclassification_rate(history, 1).honest == doctest::Approx(0.2));
  CHECK(misclassification_rate(history, 1).byzantine == doctest::Approx(0.5));
  CHECK(misclassification_rate(history, 2).byzantine == 0.0);
  CHECK_THROWS_AS(misclassification_rate(history, 3), std::invalid_argument);

  // A class with no pairs reports a zero rate.
  std::vector<ClassificationCounts> no_byzantine{{0, 4, 0, 0}};
  CHECK(misclassification_rate(no_byzantine, 0).byzantine == 0.0);
}

TEST_CASE("settling round is the start of the final perfect streak") {
  auto wrong = [] { return ClassificationCounts{1, 4, 0, 2}; };
  auto clean = [] { return ClassificationCounts{0, 4, 0, 2}; };

  // Perfect from the first observed state onward.
  std::vector<ClassificationCounts> immediate{wrong(), clean(), clean()};
  CHECK(measure_settling_round(immediate) == 1);

  // Last mistake at state 37 of 40.
  std::vector<ClassificationCounts> late(41, clean());
  late[37] = wrong();
  CHECK(measure_settling_round(late) == 38);

  // A mistake in the final state means no settling happened.
  std::vector<ClassificationCounts> unsettled{wrong(), clean(), wrong()};
  CHECK_FALSE(measure_settling_round(unsettled).has_value());

  // The pre-observation state alone carries no information.
  std::vector<ClassificationCounts> empty{wrong()};
  CHECK_FALSE(measure_settling_round(empty).has_value());
}

TEST_CASE("pipeline regret equals an independent re-summation exactly") {
  const RealizationRun run = run_realization(desk_config(), 0);

  for (std::uint32_t upto : {1u, 7u, 20u}) {
    double total = 0.0;
    for (std::uint32_t t = 0; t < upto; ++t) {
      double inst = 0.0;
      for (std::size_t rank = 0; rank < run.log.honest.size(); ++rank)
        inst += run.log.losses[t][rank] -
                loss(run.comparator.models[rank], run.log.samples[t][rank]);
      total += inst;
    }
    CHECK(cumulative_regret(run.log, run.comparator, upto) == total);
    if (upto == 20) CHECK(run.series.cumulative_regret[19] == total);
  }
}

TEST_CASE("series bundle agrees with the scalar metric calls") {
  const RealizationRun run = run_realization(desk_config(), 0);
  const SeriesBundle& s = run.series;

  REQUIRE(s.cumulative_regret.size() == 20);
  for (std::uint32_t t : {1u, 5u, 20u}) {
    CHECK(s.cumulative_regret[t - 1] ==
          cumulative_regret(run.log, run.comparator, t));
    CHECK(s.timeavg_regret[t - 1] ==
          s.cumulative_regret[t - 1] / static_cast<double>(t));
  }

  // One honest pair in this run: its series is both the mean and the max.
  REQUIRE(run.log.honest_pairs.size() == 1);
  const double final_violation =
      cumulative_violation(run.log, run.log.honest_pairs[0], 20);
  CHECK(s.cumulative_violation_mean[19] == final_violation);
  CHECK(s.cumulative_violation_max[19] == final_violation);
  CHECK(s.timeavg_violation_mean[19] == final_violation / 20.0);

  // Misclassification columns reflect the state after each round's update.
  for (std::uint32_t t : {1u, 10u, 20u}) {
    const MisclassRates rates =
        misclassification_rate(run.log.classification, t);
    CHECK(s.misclass_honest[t - 1] == rates.honest);
    CHECK(s.misclass_byz[t - 1] == rates.byzantine);
  }
}

TEST_CASE("per pair totals line up with the per-edge scalar metric") {
  SimConfig config = desk_config();
  config.topology.num_clients = 4;
  config.topology.num_byzantine = 1;
  const RealizationRun run = run_realization(config, 0);

  const auto totals = per_pair_cumulative_violation(run.log);
  REQUIRE(totals.size() == run.log.honest_pairs.size());
  for (std::size_t e = 0; e < totals.size(); ++e)
    CHECK(totals[e] ==
          cumulative_violation(run.log, run.log.honest_pairs[e], 20));
}

TEST_CASE("cumulative series are exact prefix sums of the logged rounds") {
  const RealizationRun run = run_realization(desk_config(), 0);
  const SeriesBundle& s = run.series;
  for (std::uint32_t t = 1; t < 20; ++t) {
    double inst = 0.0;
    for (std::size_t rank = 0; rank < run.log.honest.size(); ++rank)
      inst += run.log.losses[t][rank] -
              loss(run.comparator.models[rank], run.log.samples[t][rank]);
    CHECK(s.cumulative_regret[t] - s.cumulative_regret[t - 1] ==
          doctest::Approx(inst).epsilon(1e-12));
  }
}
