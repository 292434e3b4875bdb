#include "trustfed/metrics.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <string>

namespace trustfed {
namespace {

std::size_t pair_index(const RealizationLog& log,
                       std::pair<ClientId, ClientId> edge) {
  const auto normalized = std::minmax(edge.first, edge.second);
  const std::pair<ClientId, ClientId> key{normalized.first, normalized.second};
  auto it =
      std::lower_bound(log.honest_pairs.begin(), log.honest_pairs.end(), key);
  if (it == log.honest_pairs.end() || *it != key)
    throw std::invalid_argument("metrics: pair (" +
                                std::to_string(edge.first) + ", " +
                                std::to_string(edge.second) +
                                ") is not a logged honest edge");
  return static_cast<std::size_t>(it - log.honest_pairs.begin());
}

void check_round_range(const RealizationLog& log, std::uint32_t upto) {
  if (upto > log.losses.size())
    throw std::invalid_argument("metrics: round " + std::to_string(upto) +
                                " beyond the logged horizon of " +
                                std::to_string(log.losses.size()));
}

}  // namespace

double cumulative_regret(const RealizationLog& log, const Comparator& comp,
                         std::uint32_t upto) {
  check_round_range(log, upto);
  if (comp.models.size() != log.honest.size())
    throw std::invalid_argument(
        "metrics: comparator does not cover the logged clients");
  double total = 0.0;
  for (std::uint32_t t = 0; t < upto; ++t) {
    double inst = 0.0;
    for (std::size_t rank = 0; rank < log.honest.size(); ++rank)
      inst += log.losses[t][rank] -
              loss(comp.models[rank], log.samples[t][rank]);
    total += inst;
  }
  return total;
}

double cumulative_violation(const RealizationLog& log,
                            std::pair<ClientId, ClientId> edge,
                            std::uint32_t upto) {
  check_round_range(log, upto);
  const std::size_t e = pair_index(log, edge);
  double total = 0.0;
  for (std::uint32_t t = 0; t < upto; ++t) total += log.pair_constraints[t][e];
  return total;
}

std::vector<double> time_average(std::span<const double> cumulative) {
  std::vector<double> out(cumulative.size());
  for (std::size_t i = 0; i < cumulative.size(); ++i)
    out[i] = cumulative[i] / static_cast<double>(i + 1);
  return out;
}

MisclassRates misclassification_rate(
    std::span<const ClassificationCounts> history, std::uint32_t t) {
  if (t >= history.size())
    throw std::invalid_argument("metrics: no classification state at t = " +
                                std::to_string(t));
  const ClassificationCounts& c = history[t];
  MisclassRates rates;
  if (c.honest_total > 0)
    rates.honest = static_cast<double>(c.honest_wrong) / c.honest_total;
  if (c.byzantine_total > 0)
    rates.byzantine =
        static_cast<double>(c.byzantine_wrong) / c.byzantine_total;
  return rates;
}

std::optional<std::uint32_t> measure_settling_round(
    std::span<const ClassificationCounts> history) {
  if (history.size() <= 1) return std::nullopt;
  const std::size_t last = history.size() - 1;
  if (!history[last].perfect()) return std::nullopt;
  std::size_t t = last;
  while (t > 1 && history[t - 1].perfect()) --t;
  return static_cast<std::uint32_t>(t);
}

SeriesBundle compute_series(const RealizationLog& log,
                            const Comparator& comp) {
  const std::uint32_t horizon = log.horizon;
  const std::size_t pairs = log.honest_pairs.size();
  SeriesBundle s;

  s.cumulative_regret.resize(horizon);
  double regret = 0.0;
  for (std::uint32_t t = 0; t < horizon; ++t) {
    double inst = 0.0;
    for (std::size_t rank = 0; rank < log.honest.size(); ++rank)
      inst += log.losses[t][rank] -
              loss(comp.models[rank], log.samples[t][rank]);
    regret += inst;
    s.cumulative_regret[t] = regret;
  }
  s.timeavg_regret = time_average(s.cumulative_regret);

  s.cumulative_violation_mean.resize(horizon);
  s.cumulative_violation_max.resize(horizon);
  std::vector<double> per_pair(pairs, 0.0);
  for (std::uint32_t t = 0; t < horizon; ++t) {
    double sum = 0.0;
    double worst = pairs == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
    for (std::size_t e = 0; e < pairs; ++e) {
      per_pair[e] += log.pair_constraints[t][e];
      sum += per_pair[e];
      worst = std::max(worst, per_pair[e]);
    }
    s.cumulative_violation_mean[t] =
        pairs == 0 ? 0.0 : sum / static_cast<double>(pairs);
    s.cumulative_violation_max[t] = worst;
  }
  s.timeavg_violation_mean = time_average(s.cumulative_violation_mean);
  s.timeavg_violation_max = time_average(s.cumulative_violation_max);

  s.misclass_honest.resize(horizon);
  s.misclass_byz.resize(horizon);
  for (std::uint32_t t = 1; t <= horizon; ++t) {
    const MisclassRates rates = misclassification_rate(log.classification, t);
    s.misclass_honest[t - 1] = rates.honest;
    s.misclass_byz[t - 1] = rates.byzantine;
  }
  return s;
}

std::vector<double> per_pair_cumulative_violation(const RealizationLog& log) {
  std::vector<double> totals(log.honest_pairs.size(), 0.0);
  for (const auto& row : log.pair_constraints)
    for (std::size_t e = 0; e < totals.size(); ++e) totals[e] += row[e];
  return totals;
}

}  // namespace trustfed
