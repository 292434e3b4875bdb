#pragma once

#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "trustfed/taskmodel.hpp"

namespace trustfed {

struct ComparatorOptions {
  double tolerance = 1e-6;
  std::uint64_t max_iterations = 100000;

  bool operator==(const ComparatorOptions&) const = default;
};

// Best fixed models in hindsight: one model per honest client minimizing the
// summed loss over the whole horizon subject to every proximity constraint
// and the norm ball.
struct Comparator {
  std::vector<Eigen::VectorXd> models;  // by honest rank
  double objective = 0.0;               // summed loss at the solution
  double max_residual = 0.0;            // largest positive constraint part
  std::uint64_t iterations = 0;         // gradient evaluations spent
};

class ComparatorFailure : public std::runtime_error {
 public:
  ComparatorFailure(const std::string& what, double objective,
                    double max_residual)
      : std::runtime_error(what),
        objective(objective),
        max_residual(max_residual) {}

  double objective;
  double max_residual;
};

// Deterministic solve of the hindsight problem: augmented Lagrangian over
// the pair constraints, with an accelerated projected gradient inner loop
// and penalty doubling while infeasibility is not shrinking. Throws
// ComparatorFailure when the iteration budget runs out.
//
// `samples[rank]` is the per-round sample stream of that client; `pairs`
// couple honest ranks.
Comparator solve_comparator(
    const std::vector<std::vector<DataSample>>& samples,
    const std::vector<std::pair<std::uint32_t, std::uint32_t>>& pairs,
    const ConstraintParams& constraint, double radius,
    const ComparatorOptions& opts);

// Constants of the performance envelopes. The gradient and constraint
// bounds are estimated from observed runs (Gaussian features admit no a
// priori cap); zeta and the coupling level are reporting inputs.
struct BoundConstants {
  double stepsize_scale = 1.0;   // a
  double zeta = 0.5;             // free parameter, in (0, 1/coupling - 1)
  double coupling = 0.5;         // network coupling level inside the regret bound
  double loss_grad_bound = 1.0;  // G: largest loss gradient norm
  double constraint_bound = 1.0; // C: largest |constraint value|
  double constraint_slope = 1.0; // B: largest constraint gradient norm
  double radius = 1.0;           // r
  std::uint64_t edge_count = 1;  // m: directed edges in the graph
  std::uint32_t clients = 1;     // V

  void validate() const;
};

// O(sqrt(T)) envelope for cumulative regret.
double regret_bound(const BoundConstants& k, double horizon);

// O(T^{3/4}) envelope for cumulative constraint violation.
double violation_bound(const BoundConstants& k, double horizon);

}  // namespace trustfed
