#include "chainscope/txgraph.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

namespace chainscope {

namespace {

void build_csr(std::size_t n, std::span<const Edge> edges, bool outgoing,
               std::vector<std::uint32_t>& offsets, std::vector<std::uint32_t>& index) {
  offsets.assign(n + 1, 0);
  for (const auto& e : edges) ++offsets[(outgoing ? e.src : e.dst) + 1];
  for (std::size_t i = 0; i < n; ++i) offsets[i + 1] += offsets[i];
  index.resize(edges.size());
  std::vector<std::uint32_t> cursor(offsets.begin(), offsets.end() - 1);
  for (std::uint32_t i = 0; i < edges.size(); ++i) {
    index[cursor[outgoing ? edges[i].src : edges[i].dst]++] = i;
  }
}

template <typename T>
bool parse_field(std::string_view field, T& out) {
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, out);
  return ec == std::errc{} && ptr == end && !field.empty();
}

}  // namespace

TxGraph::TxGraph(std::vector<ExternalId> external_ids, std::vector<Edge> edges)
    : external_ids_(std::move(external_ids)), edges_(std::move(edges)) {
  const std::size_t n = external_ids_.size();
  lookup_.reserve(n);
  for (std::size_t i = 0; i < n; ++i) lookup_.emplace_back(external_ids_[i], static_cast<NodeId>(i));
  std::sort(lookup_.begin(), lookup_.end());
  const auto same_id = [](const auto& a, const auto& b) { return a.first == b.first; };
  if (std::adjacent_find(lookup_.begin(), lookup_.end(), same_id) != lookup_.end()) {
    throw UsageError("TxGraph: duplicate external node id");
  }
  for (const auto& e : edges_) {
    if (e.src >= n || e.dst >= n) throw UsageError("TxGraph: edge endpoint out of range");
    if (e.src == e.dst) throw UsageError("TxGraph: self-edge");
    if (e.value < 0) throw UsageError("TxGraph: negative edge value");
  }
  build_csr(n, edges_, true, out_offsets_, out_index_);
  build_csr(n, edges_, false, in_offsets_, in_index_);
}

std::span<const std::uint32_t> TxGraph::out_edges(NodeId node) const {
  return std::span<const std::uint32_t>(out_index_).subspan(out_offsets_[node],
                                                            out_offsets_[node + 1] - out_offsets_[node]);
}

std::span<const std::uint32_t> TxGraph::in_edges(NodeId node) const {
  return std::span<const std::uint32_t>(in_index_).subspan(in_offsets_[node],
                                                           in_offsets_[node + 1] - in_offsets_[node]);
}

NodeKind TxGraph::kind(NodeId node) const {
  switch (external_ids_[node]) {
    case kCoinbaseExternalId: return NodeKind::CoinbaseSource;
    case kUnknownExternalId: return NodeKind::UnknownSink;
    default: return NodeKind::User;
  }
}

std::optional<NodeId> TxGraph::find(ExternalId external) const {
  const auto it = std::lower_bound(lookup_.begin(), lookup_.end(), std::pair<ExternalId, NodeId>{external, 0});
  if (it == lookup_.end() || it->first != external) return std::nullopt;
  return it->second;
}

TxGraph TxGraph::with_values(std::span<const Satoshi> values) const {
  if (values.size() != edges_.size()) throw UsageError("with_values: one value per edge required");
  TxGraph copy = *this;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] < 0) throw UsageError("with_values: negative edge value");
    copy.edges_[i].value = values[i];
  }
  return copy;
}

TxGraph graph_from_external_edges(std::span<const ExternalEdge> edges,
                                  std::span<const ExternalId> extra_nodes) {
  std::vector<ExternalId> ids(extra_nodes.begin(), extra_nodes.end());
  ids.reserve(ids.size() + 2 * edges.size());
  for (const auto& e : edges) {
    ids.push_back(e.src);
    ids.push_back(e.dst);
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());

  const auto dense = [&ids](ExternalId x) {
    return static_cast<NodeId>(std::lower_bound(ids.begin(), ids.end(), x) - ids.begin());
  };
  std::vector<Edge> out;
  out.reserve(edges.size());
  for (const auto& e : edges) out.push_back({dense(e.src), dense(e.dst), e.value, e.timestamp});
  return TxGraph(std::move(ids), std::move(out));
}

UserGraph build_user_graph(std::span<const ResolvedTransaction> transactions,
                           const AddressClustering& clustering) {
  UserGraph result;
  std::vector<ExternalId> nodes{kUnknownExternalId, kCoinbaseExternalId};
  for (const AddressId user : clustering.assignment()) nodes.push_back(user);

  std::vector<ExternalEdge> edges;
  for (const auto& tx : transactions) {
    ExternalId src = kUnknownExternalId;
    if (tx.is_coinbase) {
      src = kCoinbaseExternalId;
    } else if (!tx.input_addresses.empty()) {
      src = clustering.user_of(tx.input_addresses.front());
    }
    for (const auto& out : tx.outputs) {
      const ExternalId dst = out.address ? ExternalId{clustering.user_of(*out.address)} : kUnknownExternalId;
      if (dst == src) {
        ++result.self_edges_dropped;
        result.self_edge_value += out.value;
        continue;
      }
      edges.push_back({src, dst, out.value, tx.timestamp});
    }
  }
  result.graph = graph_from_external_edges(edges, nodes);
  return result;
}

EdgeListIngest ingest_edge_list(std::istream& in, IngestMode mode) {
  EdgeListIngest result;
  std::vector<ExternalEdge> edges;
  std::string line;
  std::size_t line_no = 0;

  const auto reject = [&](const std::string& reason) {
    if (mode == IngestMode::Strict) throw DataError("edge list: " + reason, line_no);
    result.rejected.push_back({line_no, reason});
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (line == kEdgeListHeader) continue;

    std::vector<std::string_view> fields;
    std::string_view rest(line);
    while (true) {
      const auto comma = rest.find(',');
      fields.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (fields.size() != 4) {
      reject("expected 4 fields, got " + std::to_string(fields.size()));
      continue;
    }
    ExternalEdge e;
    if (!parse_field(fields[0], e.src) || !parse_field(fields[1], e.dst) ||
        !parse_field(fields[2], e.timestamp) || !parse_field(fields[3], e.value)) {
      reject("non-numeric field");
      continue;
    }
    const auto bad_id = [](ExternalId id) {
      return id < 0 && id != kCoinbaseExternalId && id != kUnknownExternalId;
    };
    if (bad_id(e.src) || bad_id(e.dst)) {
      reject("negative user id");
      continue;
    }
    if (e.timestamp < 0) {
      reject("negative timestamp");
      continue;
    }
    if (e.value < 0) {
      reject("negative value");
      continue;
    }
    if (e.src == e.dst) {
      ++result.self_edges_dropped;
      continue;
    }
    edges.push_back(e);
  }
  result.graph = graph_from_external_edges(edges);
  return result;
}

EdgeListIngest ingest_edge_list(const std::filesystem::path& file, IngestMode mode) {
  std::ifstream in(file);
  if (!in) throw DataError("cannot open edge list: " + file.string());
  return ingest_edge_list(in, mode);
}

void write_edge_list(std::ostream& out, const TxGraph& graph) {
  out << kEdgeListHeader << '\n';
  for (const auto& e : graph.edges()) {
    out << graph.external_id(e.src) << ',' << graph.external_id(e.dst) << ',' << e.timestamp << ','
        << e.value << '\n';
  }
}

std::vector<NodeMetrics> node_metrics(const TxGraph& graph) {
  std::vector<NodeMetrics> m(graph.node_count());
  const auto touch = [](NodeMetrics& nm, Timestamp t) {
    if (!nm.active()) {
      nm.first_ts = nm.last_ts = t;
    } else {
      nm.first_ts = std::min(nm.first_ts, t);
      nm.last_ts = std::max(nm.last_ts, t);
    }
  };
  for (const auto& e : graph.edges()) {
    touch(m[e.src], e.timestamp);
    ++m[e.src].out_degree;
    m[e.src].out_value += e.value;
    touch(m[e.dst], e.timestamp);
    ++m[e.dst].in_degree;
    m[e.dst].in_value += e.value;
  }
  return m;
}

}  // namespace chainscope
