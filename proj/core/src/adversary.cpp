#include "trustfed/adversary.hpp"

#include <stdexcept>

namespace trustfed {

AttackKind parse_attack_kind(const std::string& name) {
  if (name == "fixed-vector") return AttackKind::FixedVector;
  if (name == "gaussian-noise") return AttackKind::GaussianNoise;
  if (name == "sign-flip") return AttackKind::SignFlip;
  if (name == "dual-inflation") return AttackKind::DualInflation;
  if (name == "two-faced") return AttackKind::TwoFaced;
  throw std::invalid_argument("attack.kind: unknown attack '" + name + "'");
}

std::string to_string(AttackKind kind) {
  switch (kind) {
    case AttackKind::FixedVector: return "fixed-vector";
    case AttackKind::GaussianNoise: return "gaussian-noise";
    case AttackKind::SignFlip: return "sign-flip";
    case AttackKind::DualInflation: return "dual-inflation";
    case AttackKind::TwoFaced: return "two-faced";
  }
  throw std::logic_error("attack.kind: unhandled enum value");
}

std::vector<RoundMessage> byzantine_messages(
    const AttackStrategy& strategy, ClientId sender,
    std::span<const Eigen::VectorXd> observed_honest,
    std::span<const ClientId> targets, int dimension, RandomStream& rng) {
  if (dimension < 1)
    throw std::invalid_argument("adversary: dimension must be at least 1");
  if (!(strategy.magnitude >= 0.0))
    throw std::invalid_argument("attack.magnitude: must be nonnegative");

  Eigen::VectorXd observed_mean = Eigen::VectorXd::Zero(dimension);
  if (!observed_honest.empty()) {
    for (const auto& m : observed_honest) observed_mean += m;
    observed_mean /= static_cast<double>(observed_honest.size());
  }

  Eigen::VectorXd shared_payload;
  switch (strategy.kind) {
    case AttackKind::FixedVector:
      shared_payload = Eigen::VectorXd::Zero(dimension);
      shared_payload[0] = strategy.magnitude;
      break;
    case AttackKind::GaussianNoise:
      shared_payload = strategy.magnitude * rng.normal_vector(dimension);
      break;
    case AttackKind::SignFlip:
      shared_payload = -strategy.magnitude * observed_mean;
      break;
    case AttackKind::DualInflation:
      shared_payload = observed_mean;
      break;
    case AttackKind::TwoFaced:
      break;  // drawn per target below
  }

  std::vector<RoundMessage> messages;
  messages.reserve(targets.size());
  for (ClientId target : targets) {
    RoundMessage m;
    m.sender = sender;
    m.receiver = target;
    m.dual = strategy.magnitude;
    if (strategy.kind == AttackKind::TwoFaced)
      m.model = strategy.magnitude * rng.normal_vector(dimension);
    else
      m.model = shared_payload;
    messages.push_back(std::move(m));
  }
  return messages;
}

}  // namespace trustfed
