#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "trustfed/taskmodel.hpp"
#include "trustfed/topology.hpp"

namespace trustfed {

// Step sizes for the online saddle-point updates. With horizon T the default
// primal/dual step is eta = stepsize_scale / sqrt(T) and the dual damping is
// delta = 1 / (4 eta^2); both can be pinned explicitly in the config.
struct AlgorithmParams {
  double eta = 0.0;
  double delta = 0.0;
  double radius = 1.0;
  std::uint32_t horizon = 0;

  void validate() const;

  bool operator==(const AlgorithmParams&) const = default;
};

struct RoundMessage {
  ClientId sender = 0;
  ClientId receiver = 0;
  Eigen::VectorXd model;
  double dual = 0.0;
};

// One honest client's model plus its dual variable per in-neighbor.
class ClientState {
 public:
  ClientState(ClientId id, const GraphTopology& g, int dimension);

  ClientId id() const { return id_; }
  const Eigen::VectorXd& model() const { return model_; }
  Eigen::VectorXd& model() { return model_; }

  const std::vector<ClientId>& neighbors() const { return neighbors_; }
  // Dual for edge (id, u); throws when u is not an in-neighbor.
  double dual(ClientId u) const;
  void set_dual(ClientId u, double value);
  const std::vector<double>& duals() const { return duals_; }

 private:
  std::size_t neighbor_index(ClientId u) const;

  ClientId id_;
  std::vector<ClientId> neighbors_;  // sorted
  std::vector<double> duals_;        // aligned with neighbors_
  Eigen::VectorXd model_;
};

// The messages an honest client broadcasts in one round: its current model
// to every out-neighbor, plus the dual it holds for that link (zero when it
// does not track the reverse edge).
std::vector<RoundMessage> outgoing_messages(const ClientState& state,
                                            const GraphTopology& g);

// Direction of the primal update: the loss gradient plus, for every trusted
// message, (own dual + sender's reported dual) times the proximity gradient
// against the reported model.
Eigen::VectorXd primal_gradient(const ClientState& state,
                                std::span<const RoundMessage> trusted_inbox,
                                const DataSample& sample);

// Ascent direction for the dual on edge (state, u): the constraint value
// against the reported model, damped by delta * eta * current dual.
double dual_residual(const ClientState& state, ClientId u,
                     const Eigen::VectorXd& reported_model,
                     const AlgorithmParams& params,
                     const ConstraintParams& constraint);

// Euclidean projection onto the ball of the given radius. Idempotent: the
// returned vector passes the norm check it was produced by.
Eigen::VectorXd project_ball(const Eigen::VectorXd& x, double radius);

// model <- project(model - eta * q)
void primal_step(ClientState& state, const Eigen::VectorXd& q,
                 const AlgorithmParams& params);

// dual(u) <- max(dual(u) + eta * residual, 0)
void dual_step(ClientState& state, ClientId u, double residual,
               const AlgorithmParams& params);

}  // namespace trustfed
