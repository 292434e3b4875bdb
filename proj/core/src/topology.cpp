#include "trustfed/topology.hpp"

#include <algorithm>
#include <queue>
#include <set>
#include <stdexcept>
#include <string>

namespace trustfed {
namespace {

std::vector<std::pair<ClientId, ClientId>> generate_edges(
    const TopologySpec& spec) {
  const std::uint32_t n = spec.num_clients;
  std::vector<std::pair<ClientId, ClientId>> edges;
  switch (spec.generator) {
    case GraphKind::Complete:
      edges.reserve(static_cast<std::size_t>(n) * (n - 1));
      for (ClientId u = 0; u < n; ++u)
        for (ClientId v = 0; v < n; ++v)
          if (u != v) edges.emplace_back(u, v);
      break;
    case GraphKind::Ring:
      for (ClientId v = 0; v < n; ++v) {
        ClientId next = (v + 1) % n;
        edges.emplace_back(v, next);
        edges.emplace_back(next, v);
      }
      break;
    case GraphKind::Custom:
      edges = spec.edges;
      break;
  }
  // Normalize: sorted, deduplicated (a ring of two clients generates the same
  // link twice).
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

}  // namespace

GraphTopology GraphTopology::build(const TopologySpec& spec) {
  const std::uint32_t n = spec.num_clients;
  if (n < 2)
    throw std::invalid_argument("topology: need at least 2 clients, got " +
                                std::to_string(n));

  std::vector<ClientId> byz;
  if (spec.byzantine_ids) {
    byz = *spec.byzantine_ids;
    std::sort(byz.begin(), byz.end());
    if (std::adjacent_find(byz.begin(), byz.end()) != byz.end())
      throw std::invalid_argument("topology: duplicate byzantine id");
    if (byz.size() != spec.num_byzantine)
      throw std::invalid_argument(
          "topology: byzantine id list does not match the byzantine count");
  } else {
    for (ClientId v = 0; v < spec.num_byzantine && v < n; ++v)
      byz.push_back(v);
  }
  if (byz.size() >= n)
    throw std::invalid_argument(
        "topology: byzantine count must leave at least one honest client (" +
        std::to_string(byz.size()) + " of " + std::to_string(n) + ")");
  for (ClientId v : byz)
    if (v >= n)
      throw std::invalid_argument("topology: byzantine id " +
                                  std::to_string(v) + " out of range");

  auto edges = generate_edges(spec);
  for (auto [u, v] : edges) {
    if (u >= n || v >= n)
      throw std::invalid_argument("topology: edge (" + std::to_string(u) +
                                  ", " + std::to_string(v) + ") out of range");
    if (u == v)
      throw std::invalid_argument("topology: self edge at client " +
                                  std::to_string(u));
  }

  if (!spec.seed_labels.empty() && spec.seed_labels.size() != n)
    throw std::invalid_argument(
        "topology: seed label list must cover every client");

  GraphTopology g;
  g.spec_ = spec;
  g.num_clients_ = n;
  g.num_edges_ = edges.size();
  g.in_.resize(n);
  g.out_.resize(n);
  g.byzantine_flag_.assign(n, false);
  for (ClientId v : byz) g.byzantine_flag_[v] = true;
  g.byzantine_ = byz;
  for (ClientId v = 0; v < n; ++v)
    if (!g.byzantine_flag_[v]) g.honest_.push_back(v);

  for (auto [u, v] : edges) {
    g.out_[u].push_back(v);
    g.in_[v].push_back(u);
  }
  for (auto& nb : g.in_) std::sort(nb.begin(), nb.end());
  for (auto& nb : g.out_) std::sort(nb.begin(), nb.end());

  if (spec.seed_labels.empty()) {
    g.seed_labels_.resize(n);
    for (ClientId v = 0; v < n; ++v) g.seed_labels_[v] = v;
  } else {
    g.seed_labels_ = spec.seed_labels;
  }

  if (!honest_subgraph_connected(n, edges, g.byzantine_flag_))
    throw std::invalid_argument(
        "topology: honest clients do not form a connected subgraph");

  std::set<std::pair<ClientId, ClientId>> pairs;
  for (auto [u, v] : edges) {
    if (g.byzantine_flag_[u] || g.byzantine_flag_[v]) continue;
    pairs.emplace(std::min(u, v), std::max(u, v));
  }
  g.honest_pairs_.assign(pairs.begin(), pairs.end());

  return g;
}

const std::vector<ClientId>& GraphTopology::neighbors(ClientId v) const {
  if (v >= num_clients_)
    throw std::out_of_range("topology: unknown client id " +
                            std::to_string(v));
  return in_[v];
}

const std::vector<ClientId>& GraphTopology::out_neighbors(ClientId v) const {
  if (v >= num_clients_)
    throw std::out_of_range("topology: unknown client id " +
                            std::to_string(v));
  return out_[v];
}

bool GraphTopology::is_byzantine(ClientId v) const {
  if (v >= num_clients_)
    throw std::out_of_range("topology: unknown client id " +
                            std::to_string(v));
  return byzantine_flag_[v];
}

std::uint64_t GraphTopology::seed_label(ClientId v) const {
  if (v >= num_clients_)
    throw std::out_of_range("topology: unknown client id " +
                            std::to_string(v));
  return seed_labels_[v];
}

bool GraphTopology::has_edge(ClientId from, ClientId to) const {
  const auto& nb = out_neighbors(from);
  return std::binary_search(nb.begin(), nb.end(), to);
}

bool honest_subgraph_connected(
    std::uint32_t num_clients,
    const std::vector<std::pair<ClientId, ClientId>>& edges,
    const std::vector<bool>& byzantine_flag) {
  std::vector<std::vector<ClientId>> adj(num_clients);
  for (auto [u, v] : edges) {
    if (byzantine_flag[u] || byzantine_flag[v]) continue;
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  ClientId start = num_clients;
  std::size_t honest_count = 0;
  for (ClientId v = 0; v < num_clients; ++v) {
    if (byzantine_flag[v]) continue;
    ++honest_count;
    if (start == num_clients) start = v;
  }
  if (honest_count <= 1) return true;

  std::vector<bool> seen(num_clients, false);
  std::queue<ClientId> frontier;
  frontier.push(start);
  seen[start] = true;
  std::size_t reached = 1;
  while (!frontier.empty()) {
    ClientId v = frontier.front();
    frontier.pop();
    for (ClientId u : adj[v]) {
      if (seen[u]) continue;
      seen[u] = true;
      ++reached;
      frontier.push(u);
    }
  }
  return reached == honest_count;
}

bool honest_subgraph_connected(const GraphTopology& g) {
  std::vector<std::pair<ClientId, ClientId>> edges;
  for (ClientId v = 0; v < g.num_clients(); ++v)
    for (ClientId u : g.out_neighbors(v)) edges.emplace_back(v, u);
  std::vector<bool> flags(g.num_clients());
  for (ClientId v = 0; v < g.num_clients(); ++v) flags[v] = g.is_byzantine(v);
  return honest_subgraph_connected(g.num_clients(), edges, flags);
}

}  // namespace trustfed
