#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "trustfed/log.hpp"
#include "trustfed/oracle.hpp"

namespace trustfed {

// Per-round series of one realization, all indexed by round - 1. The
// violation series aggregate the per-pair cumulative sums.
struct SeriesBundle {
  std::vector<double> cumulative_regret;
  std::vector<double> timeavg_regret;
  std::vector<double> cumulative_violation_mean;
  std::vector<double> cumulative_violation_max;
  std::vector<double> timeavg_violation_mean;
  std::vector<double> timeavg_violation_max;
  std::vector<double> misclass_honest;
  std::vector<double> misclass_byz;
};

// Regret of the logged trajectory against the fixed comparator models over
// the first `upto` rounds, summed over honest clients.
double cumulative_regret(const RealizationLog& log, const Comparator& comp,
                         std::uint32_t upto);

// Summed constraint value over the first `upto` rounds for one honest pair
// (either order). Throws when the pair is not part of the log.
double cumulative_violation(const RealizationLog& log,
                            std::pair<ClientId, ClientId> edge,
                            std::uint32_t upto);

// cumulative[t] / (t + 1), i.e. the running per-round average.
std::vector<double> time_average(std::span<const double> cumulative);

// Misclassification rates per sender class at state `t` of the history
// (index 0 is the state before any observation). A class with no pairs has
// rate zero.
struct MisclassRates {
  double honest = 0.0;
  double byzantine = 0.0;
};
MisclassRates misclassification_rate(
    std::span<const ClassificationCounts> history, std::uint32_t t);

// Earliest round from which on classification stays perfect through the end
// of the history (states 1..T are searched; state 0 is the pre-observation
// state). Empty when the final state still misclassifies someone.
std::optional<std::uint32_t> measure_settling_round(
    std::span<const ClassificationCounts> history);

// All series of one realization in one pass.
SeriesBundle compute_series(const RealizationLog& log, const Comparator& comp);

// Final cumulative violation per honest pair, aligned with
// log.honest_pairs.
std::vector<double> per_pair_cumulative_violation(const RealizationLog& log);

}  // namespace trustfed
