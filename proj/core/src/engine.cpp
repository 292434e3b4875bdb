#include "trustfed/engine.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace trustfed {

Variant parse_variant(const std::string& name) {
  if (name == "trusted") return Variant::Trusted;
  if (name == "old-baseline") return Variant::OldBaseline;
  if (name == "oracle-filter") return Variant::OracleFilter;
  throw std::invalid_argument("variant: unknown variant '" + name + "'");
}

std::string to_string(Variant variant) {
  switch (variant) {
    case Variant::Trusted: return "trusted";
    case Variant::OldBaseline: return "old-baseline";
    case Variant::OracleFilter: return "oracle-filter";
  }
  throw std::logic_error("variant: unhandled enum value");
}

double SimConfig::resolved_eta() const {
  if (eta) return *eta;
  return stepsize_scale / std::sqrt(static_cast<double>(horizon));
}

double SimConfig::resolved_delta() const {
  if (delta) return *delta;
  const double e = resolved_eta();
  return 1.0 / (4.0 * e * e);
}

double SimConfig::resolved_attack_magnitude() const {
  if (attack_magnitude) return *attack_magnitude;
  return 10.0 * radius;
}

AlgorithmParams SimConfig::algorithm() const {
  AlgorithmParams p;
  p.eta = resolved_eta();
  p.delta = resolved_delta();
  p.radius = radius;
  p.horizon = horizon;
  return p;
}

AttackStrategy SimConfig::attack() const {
  return AttackStrategy{attack_kind, resolved_attack_magnitude()};
}

void SimConfig::validate() const {
  GraphTopology::build(topology);  // throws on an inconsistent graph
  trust.validate();
  task.validate();
  constraint.validate();
  if (!(radius > 0.0))
    throw std::invalid_argument("algorithm.radius: must be positive");
  if (!(stepsize_scale > 0.0))
    throw std::invalid_argument("algorithm.stepsize_scale: must be positive");
  if (eta && !(*eta > 0.0))
    throw std::invalid_argument("algorithm.eta: must be positive");
  if (delta && !(*delta > 0.0))
    throw std::invalid_argument("algorithm.delta: must be positive");
  if (attack_magnitude && !(*attack_magnitude >= 0.0))
    throw std::invalid_argument("attack.magnitude: must be nonnegative");
  if (realizations == 0)
    throw std::invalid_argument("realizations: must be at least 1");
  if (!(comparator.tolerance > 0.0))
    throw std::invalid_argument("comparator.tolerance: must be positive");
  if (comparator.max_iterations == 0)
    throw std::invalid_argument("comparator.max_iterations: must be positive");
}

SimConfig honest_restriction(const SimConfig& config) {
  const GraphTopology g = GraphTopology::build(config.topology);
  const auto& honest = g.honest();
  if (honest.size() < 2)
    throw std::invalid_argument(
        "honest_restriction: need at least two honest clients");

  std::vector<std::uint32_t> rank_of(g.num_clients(),
                                     g.num_clients());
  for (std::size_t r = 0; r < honest.size(); ++r)
    rank_of[honest[r]] = static_cast<std::uint32_t>(r);

  TopologySpec spec;
  spec.generator = GraphKind::Custom;
  spec.num_clients = static_cast<std::uint32_t>(honest.size());
  spec.num_byzantine = 0;
  for (ClientId v : honest)
    for (ClientId u : g.out_neighbors(v))
      if (!g.is_byzantine(u)) spec.edges.emplace_back(rank_of[v], rank_of[u]);
  spec.seed_labels.reserve(honest.size());
  for (ClientId v : honest) spec.seed_labels.push_back(g.seed_label(v));

  SimConfig restricted = config;
  restricted.topology = spec;
  return restricted;
}

struct Simulation::Impl {
  SimConfig config;
  std::uint32_t realization = 0;
  GraphTopology topo;
  AlgorithmParams params;
  AttackStrategy attack;
  TrustLedger ledger;
  std::unique_ptr<TaskSampler> sampler;

  std::vector<ClientId> honest;
  std::vector<std::uint32_t> rank_of;  // id -> honest rank, or num_clients
  std::vector<ClientState> states;     // by honest rank

  std::vector<RandomStream> data_streams;               // by honest rank
  std::vector<std::vector<RandomStream>> trust_streams; // [rank][nb index]
  std::vector<RandomStream> attack_streams;             // by byzantine rank
  std::vector<std::vector<ClientId>> byz_targets;       // honest receivers

  std::vector<Eigen::VectorXd> prev_broadcast;  // last round's honest models
  std::uint32_t rounds_done = 0;

  double max_grad_norm = 0.0;
  double max_abs_g = 0.0;
  double max_slope = 0.0;

  Impl(const SimConfig& cfg, std::uint32_t real)
      : config(cfg),
        realization(real),
        topo(GraphTopology::build(cfg.topology)),
        params(cfg.algorithm()),
        attack(cfg.attack()),
        ledger(topo) {
    params.validate();
    honest = topo.honest();
    rank_of.assign(topo.num_clients(), topo.num_clients());
    for (std::size_t r = 0; r < honest.size(); ++r)
      rank_of[honest[r]] = static_cast<std::uint32_t>(r);

    std::vector<std::pair<ClientId, std::uint64_t>> sampled;
    sampled.reserve(honest.size());
    for (ClientId v : honest) sampled.emplace_back(v, topo.seed_label(v));
    sampler = std::make_unique<TaskSampler>(config.task, config.radius,
                                            sampled, config.seed, realization);

    states.reserve(honest.size());
    data_streams.reserve(honest.size());
    trust_streams.reserve(honest.size());
    for (ClientId v : honest) {
      states.emplace_back(v, topo, config.task.dimension);
      data_streams.emplace_back(derive_seed(config.seed, realization,
                                            StreamRole::Data,
                                            topo.seed_label(v)));
      std::vector<RandomStream> per_neighbor;
      per_neighbor.reserve(topo.neighbors(v).size());
      for (ClientId u : topo.neighbors(v))
        per_neighbor.emplace_back(derive_seed(config.seed, realization,
                                              StreamRole::Trust,
                                              topo.seed_label(v),
                                              topo.seed_label(u)));
      trust_streams.push_back(std::move(per_neighbor));
    }

    for (ClientId k : topo.byzantine()) {
      attack_streams.emplace_back(derive_seed(
          config.seed, realization, StreamRole::Attack, topo.seed_label(k)));
      std::vector<ClientId> targets;
      for (ClientId u : topo.out_neighbors(k))
        if (!topo.is_byzantine(u)) targets.push_back(u);
      byz_targets.push_back(std::move(targets));
    }
  }

  bool tracks_trust() const { return config.variant != Variant::OldBaseline; }

  ClassificationCounts classification_counts() const {
    ClassificationCounts c;
    for (ClientId v : honest) {
      for (ClientId u : topo.neighbors(v)) {
        if (topo.is_byzantine(u)) {
          ++c.byzantine_total;
          if (tracks_trust() && ledger.score(v, u) >= 0.0) ++c.byzantine_wrong;
        } else {
          ++c.honest_total;
          if (tracks_trust() && ledger.score(v, u) < 0.0) ++c.honest_wrong;
        }
      }
    }
    return c;
  }

  std::vector<ClientId> trusted_for(ClientId v) const {
    switch (config.variant) {
      case Variant::Trusted:
        return ledger.trusted_set(topo, v);
      case Variant::OldBaseline:
        return topo.neighbors(v);
      case Variant::OracleFilter: {
        std::vector<ClientId> out;
        for (ClientId u : topo.neighbors(v))
          if (!topo.is_byzantine(u)) out.push_back(u);
        return out;
      }
    }
    throw std::logic_error("variant: unhandled enum value");
  }

  void step(RealizationLog& log, bool keep_detail);
};

void Simulation::Impl::step(RealizationLog& log, bool keep_detail) {
  if (rounds_done >= config.horizon)
    throw std::logic_error("engine: stepping past the configured horizon");
  if (log.honest.empty()) {
    log.realization = realization;
    log.horizon = config.horizon;
    log.honest = honest;
    log.honest_pairs = topo.honest_pairs();
  }
  const std::uint32_t t = ++rounds_done;
  const std::size_t ranks = honest.size();
  const int dim = config.task.dimension;

  // Fresh samples for the round.
  std::vector<DataSample> samples;
  samples.reserve(ranks);
  for (std::size_t r = 0; r < ranks; ++r)
    samples.push_back(sampler->sample(honest[r], data_streams[r]));

  // Exchange: honest clients broadcast their state, Byzantine clients inject
  // whatever the attack dictates. Inboxes are sorted by sender so the update
  // arithmetic has one canonical order.
  std::vector<std::vector<RoundMessage>> inbox(ranks);
  for (std::size_t r = 0; r < ranks; ++r) {
    for (RoundMessage& m : outgoing_messages(states[r], topo)) {
      const std::uint32_t rr = rank_of[m.receiver];
      if (rr < ranks) inbox[rr].push_back(std::move(m));
    }
  }
  for (std::size_t b = 0; b < attack_streams.size(); ++b) {
    const ClientId k = topo.byzantine()[b];
    for (RoundMessage& m :
         byzantine_messages(attack, k, prev_broadcast, byz_targets[b], dim,
                            attack_streams[b])) {
      const std::uint32_t rr = rank_of[m.receiver];
      if (rr < ranks) inbox[rr].push_back(std::move(m));
    }
  }
  for (auto& box : inbox)
    std::sort(box.begin(), box.end(),
              [](const RoundMessage& a, const RoundMessage& b) {
                return a.sender < b.sender;
              });

  // Trust observations for this round, then the per-variant trusted sets.
  if (tracks_trust()) {
    for (std::size_t r = 0; r < ranks; ++r) {
      const ClientId v = honest[r];
      const auto& nb = topo.neighbors(v);
      for (std::size_t j = 0; j < nb.size(); ++j) {
        const double alpha = sample_trust(
            config.trust, topo.is_byzantine(nb[j]), trust_streams[r][j]);
        ledger.accumulate(v, nb[j], alpha);
      }
    }
  }
  log.classification.push_back(classification_counts());

  std::vector<std::vector<ClientId>> trusted(ranks);
  for (std::size_t r = 0; r < ranks; ++r) trusted[r] = trusted_for(honest[r]);

  // Snapshot the round state the updates start from.
  std::vector<double> losses(ranks);
  for (std::size_t r = 0; r < ranks; ++r)
    losses[r] = loss(states[r].model(), samples[r]);

  std::vector<double> pair_g(log.honest_pairs.size());
  for (std::size_t e = 0; e < log.honest_pairs.size(); ++e) {
    auto [v, u] = log.honest_pairs[e];
    const Eigen::VectorXd& xv = states[rank_of[v]].model();
    const Eigen::VectorXd& xu = states[rank_of[u]].model();
    pair_g[e] = constraint_value(xv, xu, config.constraint);
    max_abs_g = std::max(max_abs_g, std::abs(pair_g[e]));
    max_slope = std::max(max_slope, 2.0 * (xv - xu).norm());
  }

  if (keep_detail) {
    RoundLog detail;
    detail.round = t;
    detail.models.reserve(ranks);
    detail.duals.reserve(ranks);
    for (std::size_t r = 0; r < ranks; ++r) {
      detail.models.push_back(states[r].model());
      detail.duals.push_back(states[r].duals());
    }
    detail.trusted = trusted;
    detail.consumed.resize(ranks);
    log.rounds.push_back(std::move(detail));
  }

  std::vector<Eigen::VectorXd> broadcast;
  broadcast.reserve(ranks);
  for (std::size_t r = 0; r < ranks; ++r) broadcast.push_back(states[r].model());

  // Updates. Messages hold copies of the senders' round-start models, so
  // updating clients in place cannot leak new state into this round.
  std::vector<RoundMessage> trusted_inbox;
  for (std::size_t r = 0; r < ranks; ++r) {
    const ClientId v = honest[r];
    ClientState& state = states[r];

    trusted_inbox.clear();
    {
      const auto& want = trusted[r];
      std::size_t w = 0;
      for (const RoundMessage& m : inbox[r]) {
        while (w < want.size() && want[w] < m.sender) ++w;
        if (w < want.size() && want[w] == m.sender)
          trusted_inbox.push_back(m);
      }
      if (trusted_inbox.size() != want.size())
        throw std::logic_error(
            "engine: a trusted neighbor delivered no message");
    }
    if (config.clip_inbox)
      for (RoundMessage& m : trusted_inbox)
        m.model = project_ball(m.model, config.radius);

    if (keep_detail) {
      auto& tags = log.rounds.back().consumed[r];
      tags.reserve(trusted_inbox.size());
      for (const RoundMessage& m : trusted_inbox)
        tags.push_back(InboxTag{m.sender, topo.is_byzantine(m.sender)});
    }

    max_grad_norm =
        std::max(max_grad_norm, loss_grad(state.model(), samples[r]).norm());

    const Eigen::VectorXd q = primal_gradient(state, trusted_inbox, samples[r]);
    std::vector<double> residuals(trusted_inbox.size());
    for (std::size_t i = 0; i < trusted_inbox.size(); ++i)
      residuals[i] = dual_residual(state, trusted_inbox[i].sender,
                                   trusted_inbox[i].model, params,
                                   config.constraint);

    primal_step(state, q, params);
    for (std::size_t i = 0; i < trusted_inbox.size(); ++i)
      dual_step(state, trusted_inbox[i].sender, residuals[i], params);

    // Distrusted neighbors lose their dual: the edge restarts from zero if
    // they are ever readmitted.
    {
      const auto& want = trusted[r];
      std::size_t w = 0;
      for (ClientId u : topo.neighbors(v)) {
        while (w < want.size() && want[w] < u) ++w;
        if (w < want.size() && want[w] == u) continue;
        state.set_dual(u, 0.0);
      }
    }
  }

  prev_broadcast = std::move(broadcast);
  sampler->advance_round();

  log.losses.push_back(std::move(losses));
  log.samples.push_back(std::move(samples));
  log.pair_constraints.push_back(std::move(pair_g));
}

Simulation::Simulation(const SimConfig& config, std::uint32_t realization)
    : impl_(std::make_unique<Impl>(config, realization)) {}
Simulation::~Simulation() = default;
Simulation::Simulation(Simulation&&) noexcept = default;
Simulation& Simulation::operator=(Simulation&&) noexcept = default;

const GraphTopology& Simulation::topology() const { return impl_->topo; }
std::uint32_t Simulation::rounds_done() const { return impl_->rounds_done; }

void Simulation::step(RealizationLog& log, bool keep_detail) {
  impl_->step(log, keep_detail);
}

const ClientState& Simulation::client_state(ClientId v) const {
  const std::uint32_t r = impl_->rank_of.at(v);
  if (r >= impl_->states.size())
    throw std::invalid_argument("engine: client " + std::to_string(v) +
                                " is not an honest client");
  return impl_->states[r];
}

const TrustLedger& Simulation::trust_ledger() const { return impl_->ledger; }

double Simulation::max_loss_grad_norm() const { return impl_->max_grad_norm; }
double Simulation::max_abs_constraint() const { return impl_->max_abs_g; }
double Simulation::max_constraint_slope() const { return impl_->max_slope; }

namespace {

ClassificationCounts initial_counts(const Simulation& sim,
                                    const SimConfig& config) {
  ClassificationCounts c;
  const GraphTopology& g = sim.topology();
  for (ClientId v : g.honest()) {
    for (ClientId u : g.neighbors(v)) {
      if (g.is_byzantine(u)) {
        ++c.byzantine_total;
        // A fresh ledger trusts everyone, so Byzantine senders start out
        // misclassified (unless no trust is tracked at all).
        if (config.variant != Variant::OldBaseline) ++c.byzantine_wrong;
      } else {
        ++c.honest_total;
      }
    }
  }
  return c;
}

}  // namespace

RealizationRun run_realization(const SimConfig& config,
                               std::uint32_t realization, bool keep_detail) {
  config.validate();

  RealizationRun run;
  RealizationLog& log = run.log;
  log.realization = realization;
  log.horizon = config.horizon;

  const GraphTopology topo = GraphTopology::build(config.topology);
  log.honest = topo.honest();
  log.honest_pairs = topo.honest_pairs();

  run.summary.realization = realization;
  if (config.horizon == 0) return run;  // nothing to run, nothing to compare

  Simulation sim(config, realization);
  log.classification.push_back(initial_counts(sim, config));
  for (std::uint32_t t = 0; t < config.horizon; ++t)
    sim.step(log, keep_detail);

  log.final_models.reserve(log.honest.size());
  log.final_duals.reserve(log.honest.size());
  for (ClientId v : log.honest) {
    log.final_models.push_back(sim.client_state(v).model());
    log.final_duals.push_back(sim.client_state(v).duals());
  }

  // Hindsight comparator over the realized samples.
  std::vector<std::vector<DataSample>> by_rank(log.honest.size());
  for (std::size_t r = 0; r < log.honest.size(); ++r) {
    by_rank[r].reserve(config.horizon);
    for (std::uint32_t t = 0; t < config.horizon; ++t)
      by_rank[r].push_back(log.samples[t][r]);
  }
  std::vector<std::uint32_t> rank_of(topo.num_clients());
  for (std::size_t r = 0; r < log.honest.size(); ++r)
    rank_of[log.honest[r]] = static_cast<std::uint32_t>(r);
  std::vector<std::pair<std::uint32_t, std::uint32_t>> rank_pairs;
  rank_pairs.reserve(log.honest_pairs.size());
  for (auto [v, u] : log.honest_pairs)
    rank_pairs.emplace_back(rank_of[v], rank_of[u]);

  run.comparator = solve_comparator(by_rank, rank_pairs, config.constraint,
                                    config.radius, config.comparator);
  run.series = compute_series(log, run.comparator);

  RealizationSummary& s = run.summary;
  s.final_cumulative_regret = run.series.cumulative_regret.back();
  s.final_timeavg_regret = run.series.timeavg_regret.back();
  s.final_cumulative_violation_mean =
      run.series.cumulative_violation_mean.back();
  s.final_cumulative_violation_max =
      run.series.cumulative_violation_max.back();
  if (config.variant != Variant::OldBaseline)
    s.settling_round = measure_settling_round(log.classification);
  s.comparator_objective = run.comparator.objective;
  s.comparator_residual = run.comparator.max_residual;
  s.comparator_iterations = run.comparator.iterations;
  s.max_loss_grad_norm = sim.max_loss_grad_norm();
  s.max_abs_constraint = sim.max_abs_constraint();
  s.max_constraint_slope = sim.max_constraint_slope();
  s.per_pair_cumulative_violation = per_pair_cumulative_violation(log);
  return run;
}

namespace {

void accumulate_mean(SeriesBundle& mean, const SeriesBundle& one,
                     double weight) {
  auto add = [&](std::vector<double>& into, const std::vector<double>& from) {
    if (into.empty()) into.assign(from.size(), 0.0);
    for (std::size_t i = 0; i < from.size(); ++i) into[i] += weight * from[i];
  };
  add(mean.cumulative_regret, one.cumulative_regret);
  add(mean.timeavg_regret, one.timeavg_regret);
  add(mean.cumulative_violation_mean, one.cumulative_violation_mean);
  add(mean.cumulative_violation_max, one.cumulative_violation_max);
  add(mean.timeavg_violation_mean, one.timeavg_violation_mean);
  add(mean.timeavg_violation_max, one.timeavg_violation_max);
  add(mean.misclass_honest, one.misclass_honest);
  add(mean.misclass_byz, one.misclass_byz);
}

}  // namespace

ExperimentResult run_experiment(const SimConfig& config) {
  config.validate();
  const std::uint32_t n = config.realizations;

  std::vector<RealizationRun> runs(n);
  std::uint32_t workers = config.workers;
  if (workers == 0)
    workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, n);

  if (workers <= 1) {
    for (std::uint32_t i = 0; i < n; ++i)
      runs[i] = run_realization(config, i, false);
  } else {
    std::mutex failure_mutex;
    std::exception_ptr failure;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::uint32_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::uint32_t i = w; i < n; i += workers) {
          try {
            runs[i] = run_realization(config, i, false);
          } catch (...) {
            std::lock_guard<std::mutex> hold(failure_mutex);
            if (!failure) failure = std::current_exception();
            return;
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
  }

  ExperimentResult result;
  result.per_realization.reserve(n);
  result.summaries.reserve(n);
  const double weight = 1.0 / static_cast<double>(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    accumulate_mean(result.mean, runs[i].series, weight);
    result.per_realization.push_back(std::move(runs[i].series));
    result.summaries.push_back(std::move(runs[i].summary));
  }

  SettlingStats& stats = result.settling;
  stats.realizations = n;
  std::vector<std::uint32_t> finite;
  for (const auto& s : result.summaries)
    if (s.settling_round) finite.push_back(*s.settling_round);
  stats.finite = static_cast<std::uint32_t>(finite.size());
  stats.fraction_finite = static_cast<double>(stats.finite) / n;
  if (!finite.empty()) {
    std::sort(finite.begin(), finite.end());
    stats.min = finite.front();
    stats.max = finite.back();
    stats.mean = std::accumulate(finite.begin(), finite.end(), 0.0) /
                 static_cast<double>(finite.size());
    const std::size_t mid = finite.size() / 2;
    stats.median = finite.size() % 2 == 1
                       ? finite[mid]
                       : (finite[mid - 1] + finite[mid]) / 2.0;
  }

  if (config.horizon > 0) {
    BoundConstants k;
    k.stepsize_scale = config.stepsize_scale;
    k.zeta = 0.5;
    k.coupling = 0.5;
    k.radius = config.radius;
    const GraphTopology topo = GraphTopology::build(config.topology);
    k.edge_count = topo.num_edges();
    k.clients = topo.num_clients();
    double g_est = 0.0, c_est = 0.0, b_est = 0.0;
    for (const auto& s : result.summaries) {
      g_est = std::max(g_est, s.max_loss_grad_norm);
      c_est = std::max(c_est, s.max_abs_constraint);
      b_est = std::max(b_est, s.max_constraint_slope);
    }
    if (g_est > 0.0 && c_est > 0.0) {
      k.loss_grad_bound = g_est;
      k.constraint_bound = c_est;
      k.constraint_slope = b_est;
      result.bounds.constants = k;
      result.bounds.regret_bound_at_horizon =
          regret_bound(k, config.horizon);
      result.bounds.violation_bound_at_horizon =
          violation_bound(k, config.horizon);
      bool below = true;
      for (std::uint32_t t = 1; t <= config.horizon; ++t)
        if (result.mean.cumulative_regret[t - 1] >
            regret_bound(k, static_cast<double>(t))) {
          below = false;
          break;
        }
      result.bounds.regret_curve_below_bound = below;
    }
  }
  return result;
}

}  // namespace trustfed
