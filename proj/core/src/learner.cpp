#include "trustfed/learner.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace trustfed {

void AlgorithmParams::validate() const {
  if (!(eta > 0.0)) throw std::invalid_argument("algorithm.eta: must be positive");
  if (!(delta > 0.0))
    throw std::invalid_argument("algorithm.delta: must be positive");
  if (!(radius > 0.0))
    throw std::invalid_argument("algorithm.radius: must be positive");
  if (horizon == 0)
    throw std::invalid_argument("algorithm.horizon: must be at least 1");
}

ClientState::ClientState(ClientId id, const GraphTopology& g, int dimension)
    : id_(id),
      neighbors_(g.neighbors(id)),
      duals_(neighbors_.size(), 0.0),
      model_(Eigen::VectorXd::Zero(dimension)) {
  if (dimension < 1)
    throw std::invalid_argument("learner: dimension must be at least 1");
}

std::size_t ClientState::neighbor_index(ClientId u) const {
  auto it = std::lower_bound(neighbors_.begin(), neighbors_.end(), u);
  if (it == neighbors_.end() || *it != u)
    throw std::out_of_range("learner: client " + std::to_string(id_) +
                            " holds no dual for " + std::to_string(u));
  return static_cast<std::size_t>(it - neighbors_.begin());
}

double ClientState::dual(ClientId u) const { return duals_[neighbor_index(u)]; }

void ClientState::set_dual(ClientId u, double value) {
  duals_[neighbor_index(u)] = value;
}

std::vector<RoundMessage> outgoing_messages(const ClientState& state,
                                            const GraphTopology& g) {
  std::vector<RoundMessage> messages;
  const auto& receivers = g.out_neighbors(state.id());
  messages.reserve(receivers.size());
  const auto& nb = state.neighbors();
  for (ClientId u : receivers) {
    RoundMessage m;
    m.sender = state.id();
    m.receiver = u;
    m.model = state.model();
    m.dual = std::binary_search(nb.begin(), nb.end(), u) ? state.dual(u) : 0.0;
    messages.push_back(std::move(m));
  }
  return messages;
}

Eigen::VectorXd primal_gradient(const ClientState& state,
                                std::span<const RoundMessage> trusted_inbox,
                                const DataSample& sample) {
  Eigen::VectorXd q = loss_grad(state.model(), sample);
  for (const RoundMessage& m : trusted_inbox) {
    if (m.model.size() != state.model().size())
      throw std::invalid_argument(
          "primal_gradient: message model dimension mismatch from sender " +
          std::to_string(m.sender));
    const double weight = state.dual(m.sender) + m.dual;
    q += weight * constraint_grad(state.model(), m.model);
  }
  return q;
}

double dual_residual(const ClientState& state, ClientId u,
                     const Eigen::VectorXd& reported_model,
                     const AlgorithmParams& params,
                     const ConstraintParams& constraint) {
  const double g = constraint_value(state.model(), reported_model, constraint);
  return g - params.delta * params.eta * state.dual(u);
}

Eigen::VectorXd project_ball(const Eigen::VectorXd& x, double radius) {
  if (!(radius > 0.0))
    throw std::invalid_argument("project_ball: radius must be positive");
  const double n = x.norm();
  if (n <= radius) return x;
  Eigen::VectorXd y = x * (radius / n);
  // The rescale can land a hair outside the ball; nudge down by ulps so the
  // result passes its own norm check and reprojection is a no-op.
  while (y.norm() > radius) y *= std::nextafter(1.0, 0.0);
  return y;
}

void primal_step(ClientState& state, const Eigen::VectorXd& q,
                 const AlgorithmParams& params) {
  if (q.size() != state.model().size())
    throw std::invalid_argument("primal_step: gradient dimension mismatch");
  state.model() = project_ball(state.model() - params.eta * q, params.radius);
}

void dual_step(ClientState& state, ClientId u, double residual,
               const AlgorithmParams& params) {
  state.set_dual(u, std::max(state.dual(u) + params.eta * residual, 0.0));
}

}  // namespace trustfed
