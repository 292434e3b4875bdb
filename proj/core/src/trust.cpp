#include "trustfed/trust.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace trustfed {
namespace {

constexpr double kScoreGrid = 67108864.0;  // 2^26

double snap_increment(double x) { return std::round(x * kScoreGrid) / kScoreGrid; }

}  // namespace

void TrustModel::validate() const {
  if (!(spread >= 0.0))
    throw std::invalid_argument("trust.spread: must be nonnegative");
  auto in_unit = [&](double mean) {
    return mean - spread / 2.0 >= 0.0 && mean + spread / 2.0 <= 1.0;
  };
  if (!in_unit(mean_honest))
    throw std::invalid_argument(
        "trust.mean_honest: interval mean +- spread/2 must stay inside [0, 1]");
  if (!in_unit(mean_byzantine))
    throw std::invalid_argument(
        "trust.mean_byzantine: interval mean +- spread/2 must stay inside "
        "[0, 1]");
  if (!(drift_honest() >= 0.0))
    throw std::invalid_argument("trust.mean_honest: must be at least 0.5");
  if (!(drift_byzantine() < 0.0))
    throw std::invalid_argument("trust.mean_byzantine: must be below 0.5");
}

double sample_trust(const TrustModel& model, bool sender_is_byzantine,
                    RandomStream& rng) {
  const double mean =
      sender_is_byzantine ? model.mean_byzantine : model.mean_honest;
  if (model.spread == 0.0) return mean;
  return rng.uniform(mean - model.spread / 2.0, mean + model.spread / 2.0);
}

TrustLedger::TrustLedger(const GraphTopology& g)
    : num_clients_(g.num_clients()),
      observer_valid_(g.num_clients(), false),
      score_(static_cast<std::size_t>(g.num_clients()) * g.num_clients(), 0.0),
      count_(static_cast<std::size_t>(g.num_clients()) * g.num_clients(), 0) {
  for (ClientId v : g.honest()) observer_valid_[v] = true;
}

std::size_t TrustLedger::index(ClientId v, ClientId u) const {
  if (v >= num_clients_ || u >= num_clients_)
    throw std::out_of_range("trust: unknown client id");
  if (!observer_valid_[v])
    throw std::invalid_argument("trust: observer " + std::to_string(v) +
                                " is not an honest client");
  return static_cast<std::size_t>(v) * num_clients_ + u;
}

double TrustLedger::score(ClientId v, ClientId u) const {
  return score_[index(v, u)];
}

std::uint32_t TrustLedger::observation_count(ClientId v, ClientId u) const {
  return count_[index(v, u)];
}

double TrustLedger::accumulate(ClientId v, ClientId u, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw std::invalid_argument("trust: observation outside [0, 1]");
  const std::size_t i = index(v, u);
  score_[i] += snap_increment(alpha - 0.5);
  ++count_[i];
  return score_[i];
}

std::vector<ClientId> TrustLedger::trusted_set(const GraphTopology& g,
                                               ClientId v) const {
  if (g.is_byzantine(v))
    throw std::invalid_argument("trust: trusted set requested for Byzantine "
                                "client " +
                                std::to_string(v));
  std::vector<ClientId> trusted;
  const auto& nb = g.neighbors(v);
  trusted.reserve(nb.size());
  for (ClientId u : nb)
    if (score_[index(v, u)] >= 0.0) trusted.push_back(u);
  return trusted;
}

std::vector<EdgeClassification> classification_state(const TrustLedger& ledger,
                                                     const GraphTopology& g) {
  std::vector<EdgeClassification> out;
  for (ClientId v : g.honest()) {
    for (ClientId u : g.neighbors(v)) {
      EdgeClassification e;
      e.observer = v;
      e.sender = u;
      e.sender_byzantine = g.is_byzantine(u);
      e.trusted = ledger.score(v, u) >= 0.0;
      e.correct = e.trusted != e.sender_byzantine;
      out.push_back(e);
    }
  }
  return out;
}

double misclassification_bound(std::uint64_t t, double drift,
                               bool sender_is_byzantine) {
  const bool wrong_side = sender_is_byzantine ? drift >= 0.0 : drift < 0.0;
  if (wrong_side) return 1.0;
  const double exponent = -2.0 * static_cast<double>(t) * drift * drift;
  return std::exp(exponent);
}

}  // namespace trustfed
