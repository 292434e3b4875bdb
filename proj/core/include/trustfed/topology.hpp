#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace trustfed {

using ClientId = std::uint32_t;

enum class GraphKind { Complete, Ring, Custom };

// Declarative description of the communication graph. Generators emit
// symmetric edge sets; a custom edge list may be asymmetric. Byzantine ids
// default to the lowest `num_byzantine` indices when not given explicitly.
//
// `seed_labels` decouples a client's random streams from its index: when a
// sub-population is carved out of a larger run (for baseline comparisons),
// surviving clients keep their original labels and therefore their original
// draws. Empty means identity.
struct TopologySpec {
  GraphKind generator = GraphKind::Complete;
  std::uint32_t num_clients = 45;
  std::uint32_t num_byzantine = 30;
  std::optional<std::vector<ClientId>> byzantine_ids;
  std::vector<std::pair<ClientId, ClientId>> edges;  // custom generator only
  std::vector<std::uint64_t> seed_labels;

  bool operator==(const TopologySpec&) const = default;
};

// Directed edge (u, v) means u's messages reach v, i.e. u is an in-neighbor
// of v. Generators produce both directions for every link.
class GraphTopology {
 public:
  static GraphTopology build(const TopologySpec& spec);

  std::uint32_t num_clients() const { return num_clients_; }
  std::uint32_t num_byzantine() const {
    return static_cast<std::uint32_t>(byzantine_.size());
  }

  // Sorted in-neighbors of v: the senders v listens to. Throws on unknown id.
  const std::vector<ClientId>& neighbors(ClientId v) const;
  // Sorted receivers of v's messages.
  const std::vector<ClientId>& out_neighbors(ClientId v) const;

  bool is_byzantine(ClientId v) const;
  const std::vector<ClientId>& honest() const { return honest_; }
  const std::vector<ClientId>& byzantine() const { return byzantine_; }

  std::uint64_t seed_label(ClientId v) const;
  bool has_edge(ClientId from, ClientId to) const;

  // Unordered honest pairs {v, u} with v < u joined by at least one directed
  // edge; the edges the constraint metrics are reported over.
  const std::vector<std::pair<ClientId, ClientId>>& honest_pairs() const {
    return honest_pairs_;
  }

  // Total number of directed edges.
  std::uint64_t num_edges() const { return num_edges_; }

  const TopologySpec& spec() const { return spec_; }

 private:
  GraphTopology() = default;

  TopologySpec spec_;
  std::uint32_t num_clients_ = 0;
  std::uint64_t num_edges_ = 0;
  std::vector<std::vector<ClientId>> in_;
  std::vector<std::vector<ClientId>> out_;
  std::vector<bool> byzantine_flag_;
  std::vector<ClientId> honest_;
  std::vector<ClientId> byzantine_;
  std::vector<std::uint64_t> seed_labels_;
  std::vector<std::pair<ClientId, ClientId>> honest_pairs_;
};

// True when every honest client can reach every other through honest clients
// only, treating edges as undirected. Exposed on raw parts so candidate
// graphs can be checked before construction.
bool honest_subgraph_connected(
    std::uint32_t num_clients,
    const std::vector<std::pair<ClientId, ClientId>>& edges,
    const std::vector<bool>& byzantine_flag);

bool honest_subgraph_connected(const GraphTopology& g);

}  // namespace trustfed
