#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "trustfed/learner.hpp"
#include "trustfed/rng.hpp"
#include "trustfed/topology.hpp"

namespace trustfed {

enum class AttackKind {
  FixedVector,    // constant vector of norm `magnitude`
  GaussianNoise,  // magnitude * z, one z ~ N(0, I) per round for all targets
  SignFlip,       // -magnitude * mean of the observed honest models
  DualInflation,  // plausible model (mean of observed), inflated dual
  TwoFaced,       // independent Gaussian payload per target
};

AttackKind parse_attack_kind(const std::string& name);
std::string to_string(AttackKind kind);

struct AttackStrategy {
  AttackKind kind = AttackKind::GaussianNoise;
  double magnitude = 10.0;

  bool operator==(const AttackStrategy&) const = default;
};

// Messages one Byzantine client sends this round. `observed_honest` is the
// snapshot of honest models broadcast in the previous round (empty in round
// one, in which case the observed mean is the zero vector). Every message
// carries `magnitude` as its dual report. Payload draws come exclusively
// from the caller-provided stream, so disabling an attack never shifts any
// other stream.
std::vector<RoundMessage> byzantine_messages(
    const AttackStrategy& strategy, ClientId sender,
    std::span<const Eigen::VectorXd> observed_honest,
    std::span<const ClientId> targets, int dimension, RandomStream& rng);

}  // namespace trustfed
