#include "trustfed/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "trustfed/learner.hpp"

namespace trustfed {
namespace {

// Stacked view of the per-client models with the pieces the solver needs
// precomputed: per-client feature matrices and signed labels.
struct Problem {
  std::vector<Eigen::MatrixXd> features;  // [rank] (T_rank x d)
  std::vector<Eigen::VectorXd> labels;    // [rank] entries +-1
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  double kappa_sq = 0.0;
  double radius = 0.0;
  int dim = 0;

  std::size_t clients() const { return features.size(); }
};

double softplus(double z) {
  if (z > 0.0) return z + std::log1p(std::exp(-z));
  return std::log1p(std::exp(z));
}

double logistic(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// Summed logistic loss and its gradient, client by client.
double loss_value(const Problem& p, const std::vector<Eigen::VectorXd>& x) {
  double total = 0.0;
  for (std::size_t c = 0; c < p.clients(); ++c) {
    const Eigen::VectorXd margins =
        p.labels[c].cwiseProduct(p.features[c] * x[c]);
    double part = 0.0;
    for (Eigen::Index i = 0; i < margins.size(); ++i)
      part += softplus(-margins[i]);
    total += part;
  }
  return total;
}

void loss_gradient(const Problem& p, const std::vector<Eigen::VectorXd>& x,
                   std::vector<Eigen::VectorXd>& grad) {
  for (std::size_t c = 0; c < p.clients(); ++c) {
    const Eigen::VectorXd margins =
        p.labels[c].cwiseProduct(p.features[c] * x[c]);
    Eigen::VectorXd weights(margins.size());
    for (Eigen::Index i = 0; i < margins.size(); ++i)
      weights[i] = logistic(-margins[i]);
    grad[c] = -p.features[c].transpose() * p.labels[c].cwiseProduct(weights);
  }
}

// Augmented Lagrangian value of the pair constraints and its gradient
// contribution, for fixed multipliers and penalty.
double penalty_value(const Problem& p, const std::vector<Eigen::VectorXd>& x,
                     const std::vector<double>& lambda, double mu) {
  double total = 0.0;
  for (std::size_t e = 0; e < p.pairs.size(); ++e) {
    auto [a, b] = p.pairs[e];
    const double g = (x[a] - x[b]).squaredNorm() - p.kappa_sq;
    const double shifted = lambda[e] + mu * g;
    if (shifted > 0.0)
      total += (shifted * shifted - lambda[e] * lambda[e]) / (2.0 * mu);
    else
      total -= lambda[e] * lambda[e] / (2.0 * mu);
  }
  return total;
}

void penalty_gradient(const Problem& p, const std::vector<Eigen::VectorXd>& x,
                      const std::vector<double>& lambda, double mu,
                      std::vector<Eigen::VectorXd>& grad) {
  for (std::size_t e = 0; e < p.pairs.size(); ++e) {
    auto [a, b] = p.pairs[e];
    const Eigen::VectorXd diff = x[a] - x[b];
    const double g = diff.squaredNorm() - p.kappa_sq;
    const double weight = std::max(lambda[e] + mu * g, 0.0);
    if (weight == 0.0) continue;
    grad[a] += (2.0 * weight) * diff;
    grad[b] -= (2.0 * weight) * diff;
  }
}

double max_residual(const Problem& p, const std::vector<Eigen::VectorXd>& x) {
  double worst = 0.0;
  for (auto [a, b] : p.pairs) {
    const double g = (x[a] - x[b]).squaredNorm() - p.kappa_sq;
    worst = std::max(worst, g);
  }
  return worst;
}

struct InnerResult {
  double value = 0.0;  // augmented objective at exit
  bool converged = false;  // gradient mapping met its tolerance
};

// Accelerated projected gradient (with backtracking and gradient restarts)
// on the augmented objective. Runs until the gradient mapping is small or
// the shared evaluation budget is gone.
InnerResult minimize_inner(const Problem& p, std::vector<Eigen::VectorXd>& x,
                           const std::vector<double>& lambda, double mu,
                           double gmap_tol, std::uint64_t budget,
                           std::uint64_t& evals) {
  const std::size_t n = p.clients();
  auto value_at = [&](const std::vector<Eigen::VectorXd>& z) {
    ++evals;
    return loss_value(p, z) + penalty_value(p, z, lambda, mu);
  };
  auto gradient_at = [&](const std::vector<Eigen::VectorXd>& z,
                         std::vector<Eigen::VectorXd>& g) {
    loss_gradient(p, z, g);
    penalty_gradient(p, z, lambda, mu, g);
  };

  std::vector<Eigen::VectorXd> y = x;
  std::vector<Eigen::VectorXd> x_prev = x;
  std::vector<Eigen::VectorXd> grad(n), candidate(n);
  double momentum = 1.0;
  double lips = 1.0;  // running curvature estimate for the step 1/lips
  double fx = value_at(x);

  while (evals < budget) {
    gradient_at(y, grad);
    const double fy = value_at(y);

    // Backtrack until the quadratic model at y upper-bounds the candidate.
    double step_sq = 0.0;
    double dot = 0.0;
    double fcand = 0.0;
    for (;;) {
      step_sq = 0.0;
      dot = 0.0;
      for (std::size_t c = 0; c < n; ++c) {
        candidate[c] = project_ball(y[c] - grad[c] / lips, p.radius);
        const Eigen::VectorXd d = candidate[c] - y[c];
        step_sq += d.squaredNorm();
        dot += grad[c].dot(d);
      }
      fcand = value_at(candidate);
      if (fcand <= fy + dot + 0.5 * lips * step_sq || evals >= budget) break;
      lips *= 2.0;
    }

    const double gmap = std::sqrt(step_sq) * lips;
    if (gmap <= gmap_tol) {
      x = candidate;
      return {fcand, true};
    }

    // Restart momentum when the accelerated direction stops descending.
    double along = 0.0;
    for (std::size_t c = 0; c < n; ++c)
      along += grad[c].dot(candidate[c] - x_prev[c]);
    if (along > 0.0 || fcand > fx) {
      momentum = 1.0;
      y = candidate;
    } else {
      const double next =
          (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum)) / 2.0;
      const double mix = (momentum - 1.0) / next;
      for (std::size_t c = 0; c < n; ++c)
        y[c] = candidate[c] + mix * (candidate[c] - x_prev[c]);
      momentum = next;
    }

    x_prev = candidate;
    x = candidate;
    fx = fcand;
    lips = std::max(lips * 0.9, 1e-12);
  }
  return {fx, false};
}

}  // namespace

Comparator solve_comparator(
    const std::vector<std::vector<DataSample>>& samples,
    const std::vector<std::pair<std::uint32_t, std::uint32_t>>& pairs,
    const ConstraintParams& constraint, double radius,
    const ComparatorOptions& opts) {
  constraint.validate();
  if (!(radius > 0.0))
    throw std::invalid_argument("comparator: radius must be positive");
  if (samples.empty())
    throw std::invalid_argument("comparator: no clients to solve for");
  if (!(opts.tolerance > 0.0))
    throw std::invalid_argument("comparator.tolerance: must be positive");

  Problem p;
  p.pairs = pairs;
  p.kappa_sq = constraint.kappa * constraint.kappa;
  p.radius = radius;
  p.dim = samples[0].empty() ? 0 : static_cast<int>(samples[0][0].features.size());
  for (const auto& stream : samples) {
    if (stream.empty())
      throw std::invalid_argument("comparator: a client has no samples");
    if (p.dim == 0) p.dim = static_cast<int>(stream[0].features.size());
    Eigen::MatrixXd f(stream.size(), p.dim);
    Eigen::VectorXd l(stream.size());
    for (std::size_t i = 0; i < stream.size(); ++i) {
      if (stream[i].features.size() != p.dim)
        throw std::invalid_argument("comparator: sample dimension mismatch");
      f.row(static_cast<Eigen::Index>(i)) = stream[i].features.transpose();
      l[static_cast<Eigen::Index>(i)] = stream[i].label;
    }
    p.features.push_back(std::move(f));
    p.labels.push_back(std::move(l));
  }
  for (auto [a, b] : p.pairs)
    if (a >= p.clients() || b >= p.clients() || a == b)
      throw std::invalid_argument("comparator: invalid constraint pair");

  std::vector<Eigen::VectorXd> x(p.clients(),
                                 Eigen::VectorXd::Zero(p.dim));
  std::vector<double> lambda(p.pairs.size(), 0.0);
  double mu = 1.0;
  std::uint64_t evals = 0;
  const double gmap_tol = 0.1 * std::sqrt(opts.tolerance);

  double prev_objective = 0.0;
  double prev_residual = std::numeric_limits<double>::infinity();
  bool have_prev = false;

  for (int outer = 0; outer < 60; ++outer) {
    const InnerResult inner =
        minimize_inner(p, x, lambda, mu, gmap_tol, opts.max_iterations, evals);
    const double objective = loss_value(p, x);
    const double residual = max_residual(p, x);

    const bool feasible = residual <= opts.tolerance;
    const bool settled =
        have_prev && std::abs(objective - prev_objective) <=
                         opts.tolerance * std::max(1.0, std::abs(objective));
    if (inner.converged && feasible && (settled || p.pairs.empty())) {
      Comparator out;
      out.models = x;
      out.objective = objective;
      out.max_residual = residual;
      out.iterations = evals;
      return out;
    }
    if (evals >= opts.max_iterations)
      throw ComparatorFailure(
          "comparator: iteration budget exhausted (max residual " +
              std::to_string(residual) + ", objective " +
              std::to_string(objective) + ")",
          objective, residual);

    for (std::size_t e = 0; e < p.pairs.size(); ++e) {
      auto [a, b] = p.pairs[e];
      const double g = (x[a] - x[b]).squaredNorm() - p.kappa_sq;
      lambda[e] = std::max(lambda[e] + mu * g, 0.0);
    }
    if (residual > 0.25 * prev_residual) mu *= 2.0;

    prev_objective = objective;
    prev_residual = std::max(residual, opts.tolerance);
    have_prev = true;
  }
  const double objective = loss_value(p, x);
  const double residual = max_residual(p, x);
  throw ComparatorFailure("comparator: did not settle within the outer "
                          "iteration limit (max residual " +
                              std::to_string(residual) + ")",
                          objective, residual);
}

void BoundConstants::validate() const {
  if (!(stepsize_scale > 0.0))
    throw std::invalid_argument("bounds: stepsize scale must be positive");
  if (!(radius > 0.0))
    throw std::invalid_argument("bounds: radius must be positive");
  if (!(loss_grad_bound > 0.0) || !(constraint_bound > 0.0) ||
      !(constraint_slope >= 0.0))
    throw std::invalid_argument("bounds: constants must be positive");
  if (edge_count == 0 || clients == 0)
    throw std::invalid_argument("bounds: graph constants must be positive");
  if (!(coupling > 0.0 && coupling < 1.0))
    throw std::invalid_argument("bounds: coupling must lie in (0, 1)");
  if (!(zeta > 0.0 && zeta < 1.0 / coupling - 1.0))
    throw std::invalid_argument(
        "bounds: zeta must lie in (0, 1/coupling - 1)");
}

double regret_bound(const BoundConstants& k, double horizon) {
  k.validate();
  if (!(horizon >= 0.0))
    throw std::invalid_argument("bounds: horizon must be nonnegative");
  const double a = k.stepsize_scale;
  const double G2 = k.loss_grad_bound * k.loss_grad_bound;
  const double C2 = k.constraint_bound * k.constraint_bound;
  const double r2 = k.radius * k.radius;
  const double sqrtT = std::sqrt(horizon);

  const double lead =
      (2.0 * r2 / (a * a) + static_cast<double>(k.edge_count) * C2 +
       static_cast<double>(k.clients) * G2) *
      a * sqrtT;
  const double ratio =
      (1.0 + k.coupling / k.zeta) / (1.0 - (1.0 + k.zeta) * k.coupling);
  const double network =
      (5.0 * a * G2 / 2.0) * static_cast<double>(k.clients) * ratio * sqrtT;
  return lead + network;
}

double violation_bound(const BoundConstants& k, double horizon) {
  k.validate();
  if (!(horizon >= 0.0))
    throw std::invalid_argument("bounds: horizon must be nonnegative");
  const double a = k.stepsize_scale;
  const double G = k.loss_grad_bound;
  const double B2 = k.constraint_slope * k.constraint_slope;
  const double C2 = k.constraint_bound * k.constraint_bound;
  const double r = k.radius;
  const double V = static_cast<double>(k.clients);
  const double m = static_cast<double>(k.edge_count);

  const double lead = 2.0 * std::sqrt(V * G * r) *
                      std::sqrt(1.0 / a + a * k.zeta + 2.0 * a * B2) *
                      std::pow(horizon, 0.75);
  const double tail =
      (1.0 + a * a * k.zeta + 2.0 * a * a * B2) *
      std::sqrt(4.0 * r * r / (a * a) + 2.0 * m * C2 + 2.0 * V * G * G);
  return lead + tail;
}

}  // namespace trustfed
