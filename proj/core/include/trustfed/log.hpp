#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "trustfed/taskmodel.hpp"
#include "trustfed/topology.hpp"

namespace trustfed {

// Provenance of a message an honest client actually consumed in a round.
struct InboxTag {
  ClientId sender = 0;
  bool sender_byzantine = false;
};

// How many in-neighbors each honest observer currently misclassifies,
// split by the sender's true class.
struct ClassificationCounts {
  std::uint32_t honest_wrong = 0;
  std::uint32_t honest_total = 0;
  std::uint32_t byzantine_wrong = 0;
  std::uint32_t byzantine_total = 0;

  bool perfect() const { return honest_wrong == 0 && byzantine_wrong == 0; }
};

// Detailed state snapshot of one round, indexed by honest rank (position in
// the sorted honest id list). Models and duals are the values the round's
// updates started from.
struct RoundLog {
  std::uint32_t round = 0;  // 1-based
  std::vector<Eigen::VectorXd> models;
  std::vector<std::vector<double>> duals;      // aligned with each client's neighbor list
  std::vector<std::vector<ClientId>> trusted;  // trusted in-neighbors
  std::vector<std::vector<InboxTag>> consumed; // messages that reached the update
};

// Everything recorded about one realization. The flat per-round columns are
// always filled (metrics are computed from them); the detailed `rounds` list
// is kept only when requested, so long experiments stay small in memory.
// Samples are kept in memory for the comparator but never serialized; they
// regenerate from (config, seed).
struct RealizationLog {
  std::uint32_t realization = 0;
  std::uint32_t horizon = 0;
  std::vector<ClientId> honest;                          // rank -> id
  std::vector<std::pair<ClientId, ClientId>> honest_pairs;

  std::vector<std::vector<double>> losses;               // [t-1][rank]
  std::vector<std::vector<DataSample>> samples;          // [t-1][rank]
  std::vector<std::vector<double>> pair_constraints;     // [t-1][pair]
  std::vector<ClassificationCounts> classification;      // [t] for t = 0..T

  std::vector<RoundLog> rounds;                          // optional detail

  std::vector<Eigen::VectorXd> final_models;             // after round T
  std::vector<std::vector<double>> final_duals;
};

}  // namespace trustfed
