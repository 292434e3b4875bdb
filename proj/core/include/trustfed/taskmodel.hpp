#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "trustfed/rng.hpp"
#include "trustfed/topology.hpp"

namespace trustfed {

struct DataSample {
  int label = 1;  // +1 or -1
  Eigen::VectorXd features;
};

// Streaming binary classification with slowly moving per-client ground
// truths. Tasks are related: every client starts from a shared reference
// direction plus its own perturbation, and all ground truths drift along the
// same per-round direction, so neighbors stay learnable from each other.
struct DataDistribution {
  int dimension = 5;
  double label_noise = 0.05;    // probability of flipping the clean label
  double drift_rate = 0.01;     // per-round ground truth movement
  double heterogeneity = 0.3;   // scale of the per-client perturbation

  void validate() const;

  bool operator==(const DataDistribution&) const = default;
};

// Proximity coupling between neighboring models:
//   g(x_v, x_u) = ||x_v - x_u||^2 - kappa^2 <= 0.
struct ConstraintParams {
  double kappa = 0.5;

  void validate() const;

  bool operator==(const ConstraintParams&) const = default;
};

// Owns the ground truth trajectory of a set of clients for one realization.
// Construction and drift consume dedicated streams derived from
// (master seed, realization, seed label), so a client's trajectory is
// unchanged when the surrounding population changes.
class TaskSampler {
 public:
  // `clients` pairs each client id with its seed label. `radius` caps the
  // ground truth norm so the target stays representable inside the model
  // ball.
  TaskSampler(const DataDistribution& dist, double radius,
              const std::vector<std::pair<ClientId, std::uint64_t>>& clients,
              std::uint64_t master_seed, std::uint64_t realization);

  // Draws features ~ N(0, I) from the client's data stream, labels them by
  // the current ground truth, and flips the label with probability
  // `label_noise`. The noise draw is consumed even when label_noise is zero,
  // so toggling noise does not shift the feature stream.
  DataSample sample(ClientId v, RandomStream& data_stream) const;

  // Moves every ground truth one drift step along a shared random direction.
  void advance_round();

  const Eigen::VectorXd& ground_truth(ClientId v) const;

 private:
  DataDistribution dist_;
  double norm_cap_;
  std::vector<ClientId> ids_;
  std::vector<Eigen::VectorXd> truths_;  // aligned with ids_
  RandomStream drift_stream_;
};

// Clean label before noise: the sign of features . truth (ties count as +1).
int clean_label(const Eigen::VectorXd& features, const Eigen::VectorXd& truth);

// Logistic loss log(1 + exp(-label * features . x)), overflow safe at any
// margin.
double loss(const Eigen::VectorXd& x, const DataSample& sample);

// Gradient of the logistic loss in x.
Eigen::VectorXd loss_grad(const Eigen::VectorXd& x, const DataSample& sample);

double constraint_value(const Eigen::VectorXd& x_v, const Eigen::VectorXd& x_u,
                        const ConstraintParams& params);

// Gradient of the proximity constraint in its first argument: 2 (x_v - x_u).
Eigen::VectorXd constraint_grad(const Eigen::VectorXd& x_v,
                                const Eigen::VectorXd& x_u);

}  // namespace trustfed
