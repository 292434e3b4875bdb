#include "trustfed/taskmodel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace trustfed {
namespace {

double softplus(double z) {
  if (z > 0.0) return z + std::log1p(std::exp(-z));
  return std::log1p(std::exp(z));
}

// 1 / (1 + exp(-z)) without overflow on either tail.
double logistic(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void check_same_dim(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                    const char* what) {
  if (a.size() != b.size())
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (" +
                                std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()) + ")");
}

}  // namespace

void DataDistribution::validate() const {
  if (dimension < 1)
    throw std::invalid_argument("task.dimension: must be at least 1");
  if (!(label_noise >= 0.0 && label_noise <= 1.0))
    throw std::invalid_argument("task.label_noise: must lie in [0, 1]");
  if (!(drift_rate >= 0.0))
    throw std::invalid_argument("task.drift_rate: must be nonnegative");
  if (!(heterogeneity >= 0.0))
    throw std::invalid_argument("task.heterogeneity: must be nonnegative");
}

void ConstraintParams::validate() const {
  if (!(kappa > 0.0))
    throw std::invalid_argument("constraint.kappa: must be positive");
}

TaskSampler::TaskSampler(
    const DataDistribution& dist, double radius,
    const std::vector<std::pair<ClientId, std::uint64_t>>& clients,
    std::uint64_t master_seed, std::uint64_t realization)
    : dist_(dist),
      norm_cap_(std::min(1.0, radius)),
      drift_stream_(
          derive_seed(master_seed, realization, StreamRole::TaskDrift)) {
  dist_.validate();
  if (!(radius > 0.0))
    throw std::invalid_argument("task: radius must be positive");

  RandomStream shared(
      derive_seed(master_seed, realization, StreamRole::TaskShared));
  Eigen::VectorXd reference = shared.normal_vector(dist_.dimension);
  if (reference.norm() == 0.0) reference[0] = 1.0;
  reference.normalize();

  auto sorted = clients;
  std::sort(sorted.begin(), sorted.end());

  ids_.reserve(sorted.size());
  truths_.reserve(sorted.size());
  for (auto [id, label] : sorted) {
    RandomStream init(
        derive_seed(master_seed, realization, StreamRole::TaskInit, label));
    Eigen::VectorXd w =
        reference + dist_.heterogeneity * init.normal_vector(dist_.dimension);
    if (w.norm() == 0.0) w = reference;
    w *= norm_cap_ / w.norm();
    ids_.push_back(id);
    truths_.push_back(std::move(w));
  }
}

DataSample TaskSampler::sample(ClientId v, RandomStream& data_stream) const {
  const Eigen::VectorXd& w = ground_truth(v);
  DataSample s;
  s.features = data_stream.normal_vector(dist_.dimension);
  s.label = clean_label(s.features, w);
  const double flip = data_stream.uniform01();
  if (flip < dist_.label_noise) s.label = -s.label;
  return s;
}

void TaskSampler::advance_round() {
  const Eigen::VectorXd step =
      dist_.drift_rate * drift_stream_.normal_vector(dist_.dimension);
  for (auto& w : truths_) {
    w += step;
    if (w.norm() == 0.0) w[0] = 1.0;
    w *= norm_cap_ / w.norm();
  }
}

const Eigen::VectorXd& TaskSampler::ground_truth(ClientId v) const {
  auto it = std::lower_bound(ids_.begin(), ids_.end(), v);
  if (it == ids_.end() || *it != v)
    throw std::out_of_range("task: no ground truth for client " +
                            std::to_string(v));
  return truths_[static_cast<std::size_t>(it - ids_.begin())];
}

int clean_label(const Eigen::VectorXd& features,
                const Eigen::VectorXd& truth) {
  check_same_dim(features, truth, "clean_label");
  return features.dot(truth) >= 0.0 ? 1 : -1;
}

double loss(const Eigen::VectorXd& x, const DataSample& sample) {
  check_same_dim(x, sample.features, "loss");
  const double margin = sample.label * sample.features.dot(x);
  return softplus(-margin);
}

Eigen::VectorXd loss_grad(const Eigen::VectorXd& x, const DataSample& sample) {
  check_same_dim(x, sample.features, "loss_grad");
  const double margin = sample.label * sample.features.dot(x);
  const double weight = logistic(-margin);
  return (-sample.label * weight) * sample.features;
}

double constraint_value(const Eigen::VectorXd& x_v, const Eigen::VectorXd& x_u,
                        const ConstraintParams& params) {
  check_same_dim(x_v, x_u, "constraint_value");
  return (x_v - x_u).squaredNorm() - params.kappa * params.kappa;
}

Eigen::VectorXd constraint_grad(const Eigen::VectorXd& x_v,
                                const Eigen::VectorXd& x_u) {
  check_same_dim(x_v, x_u, "constraint_grad");
  return 2.0 * (x_v - x_u);
}

}  // namespace trustfed
