// Microbenchmarks for the hot paths: one simulation round at stock scale,
// trust accumulation, the loss gradient, the ball projection, and a small
// hindsight comparator solve.

#include <cstdint>
#include <vector>

#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "trustfed/config.hpp"
#include "trustfed/engine.hpp"
#include "trustfed/learner.hpp"
#include "trustfed/oracle.hpp"
#include "trustfed/rng.hpp"
#include "trustfed/taskmodel.hpp"
#include "trustfed/topology.hpp"
#include "trustfed/trust.hpp"

using namespace trustfed;

namespace {

void BM_SimulationRound(benchmark::State& state) {
  SimConfig config = default_config();
  config.horizon = 1u << 30;  // never reached; the loop below sets the count
  Simulation sim(config, 0);
  RealizationLog log;
  const GraphTopology topo = GraphTopology::build(config.topology);
  log.horizon = config.horizon;
  log.honest = topo.honest();
  log.honest_pairs = topo.honest_pairs();

  for (auto _ : state) {
    sim.step(log, false);
    benchmark::DoNotOptimize(log.losses.back());
  }
  state.SetItemsProcessed(state.iterations() *
                          static_cast<std::int64_t>(log.honest.size()));
}
BENCHMARK(BM_SimulationRound)->Unit(benchmark::kMillisecond);

void BM_TrustRound(benchmark::State& state) {
  TopologySpec spec;
  spec.num_clients = 45;
  spec.num_byzantine = 30;
  const GraphTopology graph = GraphTopology::build(spec);
  const TrustModel model;
  TrustLedger ledger(graph);
  RandomStream rng(derive_seed(7, 0, StreamRole::Trust, 0, 0));
  const ClientId observer = graph.honest().front();
  const auto& senders = graph.neighbors(observer);

  for (auto _ : state) {
    double last = 0.0;
    for (ClientId u : senders)
      last = ledger.accumulate(
          observer, u, sample_trust(model, graph.is_byzantine(u), rng));
    benchmark::DoNotOptimize(last);
  }
  state.SetItemsProcessed(state.iterations() *
                          static_cast<std::int64_t>(senders.size()));
}
BENCHMARK(BM_TrustRound);

void BM_LossGradient(benchmark::State& state) {
  RandomStream rng(derive_seed(7, 0, StreamRole::Data, 0, 0));
  const Eigen::VectorXd x = rng.normal_vector(5) * 0.4;
  DataSample sample;
  sample.features = rng.normal_vector(5);
  sample.label = 1;

  for (auto _ : state) {
    benchmark::DoNotOptimize(loss_grad(x, sample));
  }
}
BENCHMARK(BM_LossGradient);

void BM_ProjectBall(benchmark::State& state) {
  RandomStream rng(derive_seed(7, 0, StreamRole::Data, 1, 0));
  const Eigen::VectorXd x = rng.normal_vector(5) * 3.0;

  for (auto _ : state) {
    benchmark::DoNotOptimize(project_ball(x, 1.0));
  }
}
BENCHMARK(BM_ProjectBall);

void BM_ComparatorSolve(benchmark::State& state) {
  const int clients = 3;
  const int rounds = static_cast<int>(state.range(0));
  RandomStream rng(derive_seed(7, 0, StreamRole::Data, 2, 0));

  std::vector<std::vector<DataSample>> samples(clients);
  for (auto& list : samples) {
    list.reserve(rounds);
    for (int t = 0; t < rounds; ++t) {
      DataSample s;
      s.features = rng.normal_vector(2);
      s.label = rng.uniform01() < 0.5 ? -1 : 1;
      list.push_back(s);
    }
  }
  const std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs{
      {0, 1}, {0, 2}, {1, 2}};
  const ConstraintParams constraint;
  ComparatorOptions options;
  options.tolerance = 1e-6;

  for (auto _ : state) {
    benchmark::DoNotOptimize(
        solve_comparator(samples, pairs, constraint, 1.0, options));
  }
}
BENCHMARK(BM_ComparatorSolve)->Arg(20)->Arg(50)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
