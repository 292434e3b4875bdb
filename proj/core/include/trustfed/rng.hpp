#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace trustfed {

// Every random quantity in a simulation is drawn from its own stream, keyed by
// (master seed, realization, role, entity ids). Streams never share engine
// state, so toggling one consumer (say, the attack) cannot shift the draws
// seen by another, and realizations can run on any number of workers without
// changing results.
enum class StreamRole : std::uint64_t {
  TaskShared = 1,  // shared reference direction for all tasks
  TaskInit = 2,    // per-client task perturbation
  TaskDrift = 3,   // shared per-round drift of the ground truths
  Data = 4,        // per-client features and label noise
  Trust = 5,       // per (observer, sender) trust observations
  Attack = 6,      // per Byzantine client payloads
};

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t realization,
                          StreamRole role, std::uint64_t a = 0,
                          std::uint64_t b = 0);

// A seeded engine plus the distributions used throughout the simulator.
// The normal distribution is kept as a member because it caches state between
// calls; keeping it with the engine makes the draw sequence a pure function
// of the seed.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  double uniform01() { return uniform(0.0, 1.0); }

  double normal() { return normal_(engine_); }

  Eigen::VectorXd normal_vector(Eigen::Index dim) {
    Eigen::VectorXd v(dim);
    for (Eigen::Index i = 0; i < dim; ++i) v[i] = normal();
    return v;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace trustfed
