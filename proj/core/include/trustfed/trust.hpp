#pragma once

#include <cstdint>
#include <vector>

#include "trustfed/rng.hpp"
#include "trustfed/topology.hpp"

namespace trustfed {

// Stochastic trust observations: each round an honest observer receives a
// score in [0, 1] about every in-neighbor, drawn uniformly around a class
// mean. Honest senders sit above 1/2 on average, Byzantine senders below, so
// the running sum of centered scores separates the classes over time.
struct TrustModel {
  double mean_honest = 0.55;
  double mean_byzantine = 0.45;
  double spread = 0.8;  // width of the uniform interval around the mean

  double drift_honest() const { return mean_honest - 0.5; }
  double drift_byzantine() const { return mean_byzantine - 0.5; }

  // Throws unless both class intervals stay inside [0, 1] and the means sit
  // on the correct sides of 1/2.
  void validate() const;

  bool operator==(const TrustModel&) const = default;
};

double sample_trust(const TrustModel& model, bool sender_is_byzantine,
                    RandomStream& rng);

// Per (observer, sender) running sum of (score - 1/2). Increments are
// snapped to a 2^-26 grid before adding: every partial sum is then exact in
// double precision, so the accumulated score does not depend on the order
// the observations arrive in. The snap changes each increment by at most
// 2^-27, orders of magnitude below the class drifts that matter.
class TrustLedger {
 public:
  explicit TrustLedger(const GraphTopology& g);

  // Current score for sender u as seen by observer v. Zero until the first
  // observation.
  double score(ClientId v, ClientId u) const;
  std::uint32_t observation_count(ClientId v, ClientId u) const;

  // Folds one observation in and returns the updated score.
  double accumulate(ClientId v, ClientId u, double alpha);

  // In-neighbors of v with nonnegative score. The boundary counts as
  // trusted: a fresh ledger trusts everyone. Throws if v is Byzantine.
  std::vector<ClientId> trusted_set(const GraphTopology& g, ClientId v) const;

 private:
  std::size_t index(ClientId v, ClientId u) const;

  std::uint32_t num_clients_;
  std::vector<bool> observer_valid_;
  std::vector<double> score_;
  std::vector<std::uint32_t> count_;
};

struct EdgeClassification {
  ClientId observer = 0;
  ClientId sender = 0;
  bool sender_byzantine = false;
  bool trusted = false;
  bool correct = false;  // trusted matches the sender actually being honest
};

// Classification snapshot over every (honest observer, in-neighbor) pair.
std::vector<EdgeClassification> classification_state(const TrustLedger& ledger,
                                                     const GraphTopology& g);

// One-sided tail bound on the probability that a sender is misclassified
// after t observations: exp(-2 t E^2), degrading to 1 when the class drift E
// points the wrong way (an honest sender needs E >= 0, a Byzantine one
// E < 0).
double misclassification_bound(std::uint64_t t, double drift,
                               bool sender_is_byzantine = false);

}  // namespace trustfed
