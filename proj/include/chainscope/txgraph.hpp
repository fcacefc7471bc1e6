#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "chainscope/cluster.hpp"

namespace chainscope {

using NodeId = std::uint32_t;
using ExternalId = std::int64_t;

enum class NodeKind : std::uint8_t { User, CoinbaseSource, UnknownSink };

/// External ids reserved for the synthetic endpoints of the user graph.
inline constexpr ExternalId kCoinbaseExternalId = -1;
inline constexpr ExternalId kUnknownExternalId = -2;

struct Edge {
  NodeId src = 0;
  NodeId dst = 0;
  Satoshi value = 0;
  Timestamp timestamp = 0;

  bool operator==(const Edge&) const = default;
};

/// Immutable directed multigraph of users with CSR indexes in both
/// directions. Node ids are dense; external ids are kept for export.
class TxGraph {
 public:
  TxGraph() = default;
  /// Validates the invariants (no self-edges, values >= 0, ids in range,
  /// unique external ids) and builds the adjacency indexes.
  TxGraph(std::vector<ExternalId> external_ids, std::vector<Edge> edges);

  std::size_t node_count() const { return external_ids_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  std::span<const Edge> edges() const { return edges_; }
  const Edge& edge(std::size_t i) const { return edges_[i]; }

  /// Indices into edges() of edges leaving / entering `node`, in edge order.
  std::span<const std::uint32_t> out_edges(NodeId node) const;
  std::span<const std::uint32_t> in_edges(NodeId node) const;

  ExternalId external_id(NodeId node) const { return external_ids_[node]; }
  std::span<const ExternalId> external_ids() const { return external_ids_; }
  NodeKind kind(NodeId node) const;
  bool is_reserved(NodeId node) const { return kind(node) != NodeKind::User; }
  /// Dense id for an external id, if present.
  std::optional<NodeId> find(ExternalId external) const;

  /// Same topology with edge values replaced, in edge order.
  TxGraph with_values(std::span<const Satoshi> values) const;

 private:
  std::vector<ExternalId> external_ids_;
  std::vector<Edge> edges_;
  std::vector<std::uint32_t> out_offsets_, out_index_;
  std::vector<std::uint32_t> in_offsets_, in_index_;
  std::vector<std::pair<ExternalId, NodeId>> lookup_;
};

/// Densifies arbitrary external ids: sorted unique ids map to 0..n-1.
/// Edges reference external ids through `src`/`dst` fields of ExternalEdge.
struct ExternalEdge {
  ExternalId src = 0;
  ExternalId dst = 0;
  Satoshi value = 0;
  Timestamp timestamp = 0;
};
TxGraph graph_from_external_edges(std::span<const ExternalEdge> edges,
                                  std::span<const ExternalId> extra_nodes = {});

struct UserGraph {
  TxGraph graph;
  std::uint64_t self_edges_dropped = 0;
  Satoshi self_edge_value = 0;
};

/// One edge per output from the spending user (first resolved input's
/// cluster) to the receiving user. Coinbase outputs come from the reserved
/// coinbase node; outputs without an address, and transactions with no
/// resolved inputs, use the reserved unknown node. Self-edges are dropped.
UserGraph build_user_graph(std::span<const ResolvedTransaction> transactions,
                           const AddressClustering& clustering);

enum class IngestMode { Strict, Skip };

struct RejectedRow {
  std::size_t line = 0;
  std::string reason;
};

struct EdgeListIngest {
  TxGraph graph;
  std::vector<RejectedRow> rejected;
  std::uint64_t self_edges_dropped = 0;
};

inline constexpr std::string_view kEdgeListHeader = "src_user,dst_user,timestamp_unix,value_satoshi";

/// Reads `src_user,dst_user,timestamp_unix,value_satoshi` rows. The header
/// line is optional; blank lines and '#' comments are skipped. Strict mode
/// throws DataError on the first malformed row; skip mode records it.
EdgeListIngest ingest_edge_list(std::istream& in, IngestMode mode = IngestMode::Strict);
EdgeListIngest ingest_edge_list(const std::filesystem::path& file, IngestMode mode = IngestMode::Strict);

void write_edge_list(std::ostream& out, const TxGraph& graph);

struct NodeMetrics {
  std::uint64_t in_degree = 0;
  std::uint64_t out_degree = 0;
  Satoshi in_value = 0;
  Satoshi out_value = 0;
  /// Zero for nodes without edges.
  Timestamp first_ts = 0;
  Timestamp last_ts = 0;

  bool active() const { return in_degree + out_degree > 0; }
  bool operator==(const NodeMetrics&) const = default;
};

/// Exact per-node sums over incident edges, indexed by NodeId.
std::vector<NodeMetrics> node_metrics(const TxGraph& graph);

}  // namespace chainscope
