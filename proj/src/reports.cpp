#include "chainscope/reports.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <ostream>

#include "chainscope/random.hpp"

namespace chainscope {

namespace {

// Iterates data rows of one of our CSV reports: skips comments and blank
// lines, checks the header, and reports physical line numbers.
class CsvRows {
 public:
  CsvRows(std::istream& in, std::string_view header, std::string_view report)
      : in_(in), header_(header), report_(report) {}

  bool next() {
    while (std::getline(in_, line_)) {
      ++line_no_;
      if (!line_.empty() && line_.back() == '\r') line_.pop_back();
      if (line_.empty() || line_.front() == '#') continue;
      if (!seen_header_) {
        if (line_ != header_) fail("unexpected header, want '" + std::string(header_) + "'");
        seen_header_ = true;
        continue;
      }
      fields_ = split_csv(line_);
      return true;
    }
    if (!seen_header_) throw DataError(std::string(report_) + ": missing header");
    return false;
  }

  std::size_t line() const { return line_no_; }

  std::string_view field(std::size_t i) const {
    if (i >= fields_.size()) fail("too few fields");
    return fields_[i];
  }

  void expect_fields(std::size_t n) const {
    if (fields_.size() != n) fail("expected " + std::to_string(n) + " fields");
  }

  template <typename T>
  T integer(std::size_t i) const {
    const auto f = field(i);
    T v{};
    const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
    if (ec != std::errc{} || ptr != f.data() + f.size() || f.empty()) fail("bad integer field");
    return v;
  }

  bool flag(std::size_t i) const {
    const auto f = field(i);
    if (f == "0") return false;
    if (f == "1") return true;
    fail("bad 0/1 field");
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw DataError(std::string(report_) + ": " + what, line_no_);
  }

 private:
  std::istream& in_;
  std::string_view header_;
  std::string_view report_;
  std::string line_;
  std::vector<std::string_view> fields_;
  std::size_t line_no_ = 0;
  bool seen_header_ = false;
};

TimeSeries column(const std::vector<Timestamp>& grid, std::vector<double> values) {
  return TimeSeries{grid, std::move(values)};
}

}  // namespace

void write_echo(std::ostream& out, std::string_view report, const ConfigEcho& echo) {
  out << "# chainscope " << report << '\n';
  for (const auto& [key, value] : echo) out << "# " << key << '=' << value << '\n';
}

void write_unavailable(std::ostream& out, std::string_view report, const ConfigEcho& echo,
                       std::string_view header, std::string_view reason) {
  write_echo(out, report, echo);
  out << "# not available: " << reason << '\n' << header << '\n';
}

std::string format_double(double value) {
  if (std::isnan(value)) return {};
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

double parse_double(std::string_view field, std::size_t line) {
  if (field.empty()) return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc{} || ptr != field.data() + field.size()) throw DataError("bad number", line);
  return v;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> fields;
  while (true) {
    const auto comma = line.find(',');
    fields.push_back(line.substr(0, comma));
    if (comma == std::string_view::npos) break;
    line.remove_prefix(comma + 1);
  }
  return fields;
}

void write_addresses(std::ostream& out, const AddressBook& book, const ConfigEcho& echo) {
  write_echo(out, "addresses", echo);
  out << "address_id,address\n";
  for (AddressId id = 0; id < book.size(); ++id) out << id << ',' << book.at(id).encoded() << '\n';
}

AddressBook read_addresses(std::istream& in) {
  AddressBook book;
  CsvRows rows(in, "address_id,address", "addresses");
  while (rows.next()) {
    rows.expect_fields(2);
    const auto id = rows.integer<AddressId>(0);
    const auto address = Address::from_encoded(rows.field(1));
    if (!address) rows.fail("invalid Base58Check address");
    if (id != book.size() || book.intern(*address) != id) rows.fail("address ids must be dense and unique");
  }
  return book;
}

void write_transactions(std::ostream& out, std::span<const ResolvedTransaction> txs, const ConfigEcho& echo) {
  write_echo(out, "transactions", echo);
  out << "tx,timestamp,coinbase,side,address_id,value_satoshi\n";
  for (std::size_t i = 0; i < txs.size(); ++i) {
    const auto& tx = txs[i];
    const auto prefix = [&] {
      out << i << ',' << tx.timestamp << ',' << (tx.is_coinbase ? 1 : 0) << ',';
    };
    prefix();
    out << "tx,,\n";
    for (const AddressId a : tx.input_addresses) {
      prefix();
      out << "in," << a << ",\n";
    }
    for (std::uint32_t u = 0; u < tx.unresolved_inputs; ++u) {
      prefix();
      out << "unresolved,,\n";
    }
    for (const auto& o : tx.outputs) {
      prefix();
      out << "out,";
      if (o.address) out << *o.address;
      out << ',' << o.value << '\n';
    }
  }
}

std::vector<ResolvedTransaction> read_transactions(std::istream& in) {
  std::vector<ResolvedTransaction> txs;
  CsvRows rows(in, "tx,timestamp,coinbase,side,address_id,value_satoshi", "transactions");
  while (rows.next()) {
    rows.expect_fields(6);
    const auto index = rows.integer<std::size_t>(0);
    const auto side = rows.field(3);
    if (side == "tx") {
      if (index != txs.size()) rows.fail("transaction indices must be consecutive");
      ResolvedTransaction tx;
      tx.timestamp = rows.integer<Timestamp>(1);
      tx.is_coinbase = rows.flag(2);
      txs.push_back(std::move(tx));
      continue;
    }
    if (txs.empty() || index != txs.size() - 1) rows.fail("row does not follow its tx row");
    auto& tx = txs.back();
    if (side == "in") {
      tx.input_addresses.push_back(rows.integer<AddressId>(4));
    } else if (side == "unresolved") {
      ++tx.unresolved_inputs;
    } else if (side == "out") {
      ResolvedOutput o;
      if (!rows.field(4).empty()) o.address = rows.integer<AddressId>(4);
      o.value = rows.integer<Satoshi>(5);
      if (o.value < 0) rows.fail("negative value");
      tx.outputs.push_back(o);
    } else {
      rows.fail("unknown side");
    }
  }
  return txs;
}

void write_scan_issues(std::ostream& out, std::span<const ScanIssue> issues, const ConfigEcho& echo) {
  write_echo(out, "parse_issues", echo);
  out << "file,offset,message\n";
  for (const auto& issue : issues) {
    std::string message = issue.message;
    std::replace(message.begin(), message.end(), ',', ';');
    out << issue.file.filename().string() << ',' << issue.offset << ',' << message << '\n';
  }
}

void write_clustering(std::ostream& out, const AddressBook& book, const AddressClustering& clustering,
                      const ConfigEcho& echo) {
  write_echo(out, "clustering", echo);
  out << "address,user_id\n";
  for (AddressId a = 0; a < clustering.address_count(); ++a) {
    out << book.at(a).encoded() << ',' << clustering.user_of(a) << '\n';
  }
}

AddressClustering read_clustering(std::istream& in, const AddressBook& book) {
  std::vector<AddressId> user_of(book.size(), static_cast<AddressId>(-1));
  CsvRows rows(in, "address,user_id", "clustering");
  while (rows.next()) {
    rows.expect_fields(2);
    const auto address = Address::from_encoded(rows.field(0));
    if (!address) rows.fail("invalid Base58Check address");
    const auto id = book.find(*address);
    if (!id) rows.fail("address not in address table");
    user_of[*id] = rows.integer<AddressId>(1);
  }
  for (const AddressId u : user_of) {
    if (u == static_cast<AddressId>(-1)) throw DataError("clustering: address missing from clustering");
  }
  return AddressClustering::from_assignment(std::move(user_of));
}

void write_histogram(std::ostream& out, const ReuseHistogram& hist, const ConfigEcho& echo) {
  write_echo(out, "reuse_histogram", echo);
  out << "# total_addresses=" << hist.total_addresses << '\n';
  out << "r,count\n";
  for (const auto& [r, count] : hist.bins) out << r << ',' << count << '\n';
}

ReuseHistogram read_histogram(std::istream& in) {
  ReuseHistogram hist;
  CsvRows rows(in, "r,count", "reuse_histogram");
  while (rows.next()) {
    rows.expect_fields(2);
    const auto r = rows.integer<std::uint64_t>(0);
    const auto count = rows.integer<std::uint64_t>(1);
    if (r == 0) rows.fail("usage count must be >= 1");
    hist.bins[r] += count;
    hist.total_addresses += count;
  }
  return hist;
}

void write_fits(std::ostream& out, std::span<const PowerLawFit> fits, const ConfigEcho& echo) {
  write_echo(out, "power_law_fit", echo);
  out << "exponent,amplitude,r_min,residual,method\n";
  for (const auto& f : fits) {
    out << format_double(f.exponent) << ',' << format_double(f.amplitude) << ',' << f.r_min << ','
        << format_double(f.residual) << ',' << fit_method_name(f.method) << '\n';
  }
}

void write_node_metrics(std::ostream& out, const TxGraph& graph, std::span<const NodeMetrics> metrics,
                        const ConfigEcho& echo) {
  write_echo(out, "node_metrics", echo);
  out << "node,in_degree,out_degree,in_value_satoshi,out_value_satoshi,first_ts,last_ts\n";
  for (NodeId v = 0; v < metrics.size(); ++v) {
    const auto& m = metrics[v];
    out << graph.external_id(v) << ',' << m.in_degree << ',' << m.out_degree << ',' << m.in_value << ','
        << m.out_value << ',' << m.first_ts << ',' << m.last_ts << '\n';
  }
}

void write_thresholds(std::ostream& out, const SignificanceThresholds& thresholds,
                      const NullModelConfig& config, const ConfigEcho& echo) {
  write_echo(out, "thresholds", echo);
  out << "metric,threshold\n";
  for (const Metric m : kAllMetrics) out << metric_name(m) << ',' << thresholds[m] << '\n';
  out << "config.n," << config.nodes << '\n';
  out << "config.m," << config.edges << '\n';
  out << "config.p_value," << format_double(config.p_value) << '\n';
  out << "config.seed," << config.seed << '\n';
  out << "config.rng_name," << kRngName << '\n';
}

SignificanceThresholds read_thresholds(std::istream& in) {
  SignificanceThresholds t;
  std::map<std::string, bool> seen;
  CsvRows rows(in, "metric,threshold", "thresholds");
  while (rows.next()) {
    rows.expect_fields(2);
    const auto name = rows.field(0);
    if (name.starts_with("config.")) continue;
    bool known = false;
    for (const Metric m : kAllMetrics) {
      if (metric_name(m) == name) {
        t[m] = rows.integer<std::int64_t>(1);
        seen[std::string(name)] = known = true;
      }
    }
    if (!known) rows.fail("unknown metric");
  }
  if (seen.size() != kAllMetrics.size()) throw DataError("thresholds: not all eight metrics present");
  return t;
}

RoleTable make_role_table(const TxGraph& graph, std::span<const RoleLabel> labels) {
  RoleTable table;
  for (NodeId v = 0; v < graph.node_count(); ++v) {
    if (graph.is_reserved(v)) continue;
    table.nodes.push_back(graph.external_id(v));
    table.labels.push_back(labels[v]);
  }
  return table;
}

std::vector<RoleLabel> labels_for_graph(const RoleTable& table, const TxGraph& graph) {
  std::vector<RoleLabel> labels(graph.node_count());
  for (std::size_t i = 0; i < table.nodes.size(); ++i) {
    const auto v = graph.find(table.nodes[i]);
    if (!v) throw DataError("roles: node " + std::to_string(table.nodes[i]) + " not in graph");
    labels[*v] = table.labels[i];
  }
  return labels;
}

void write_roles(std::ostream& out, const RoleTable& roles, const ConfigEcho& echo) {
  write_echo(out, "roles", echo);
  const auto overlap = role_overlaps(roles.labels);
  for (std::size_t a = 0; a < kAllRoles.size(); ++a) {
    for (std::size_t b = a; b < kAllRoles.size(); ++b) {
      out << "# count." << role_name(kAllRoles[a]);
      if (b != a) out << '+' << role_name(kAllRoles[b]);
      out << '=' << overlap[a][b] << '\n';
    }
  }
  out << "node,miner,collector,customer,seller\n";
  for (std::size_t i = 0; i < roles.nodes.size(); ++i) {
    const auto& l = roles.labels[i];
    out << roles.nodes[i] << ',' << l.miner << ',' << l.collector << ',' << l.customer << ',' << l.seller
        << '\n';
  }
}

RoleTable read_roles(std::istream& in) {
  RoleTable table;
  CsvRows rows(in, "node,miner,collector,customer,seller", "roles");
  while (rows.next()) {
    rows.expect_fields(5);
    table.nodes.push_back(rows.integer<ExternalId>(0));
    table.labels.push_back({rows.flag(1), rows.flag(2), rows.flag(3), rows.flag(4)});
  }
  return table;
}

PopulationTable population_table(std::span<const NodeMetrics> metrics, std::span<const RoleLabel> labels,
                                 std::span<const Timestamp> grid) {
  PopulationTable t;
  t.miners = active_population(metrics, labels, Role::Miner, grid);
  t.collectors = active_population(metrics, labels, Role::Collector, grid);
  t.customers = active_population(metrics, labels, Role::Customer, grid);
  t.sellers = active_population(metrics, labels, Role::Seller, grid);
  t.ratio = customer_seller_ratio(t.customers, t.sellers);
  return t;
}

void write_population(std::ostream& out, const PopulationTable& table, const ConfigEcho& echo) {
  write_echo(out, "population", echo);
  out << "timestamp,miners,collectors,customers,sellers,ratio\n";
  for (std::size_t i = 0; i < table.ratio.size(); ++i) {
    out << table.ratio.grid[i] << ',' << format_double(table.miners.values[i]) << ','
        << format_double(table.collectors.values[i]) << ',' << format_double(table.customers.values[i]) << ','
        << format_double(table.sellers.values[i]) << ',' << format_double(table.ratio.values[i]) << '\n';
  }
}

PopulationTable read_population(std::istream& in) {
  std::vector<Timestamp> grid;
  std::array<std::vector<double>, 5> cols;
  CsvRows rows(in, "timestamp,miners,collectors,customers,sellers,ratio", "population");
  while (rows.next()) {
    rows.expect_fields(6);
    grid.push_back(rows.integer<Timestamp>(0));
    for (std::size_t c = 0; c < cols.size(); ++c) cols[c].push_back(parse_double(rows.field(c + 1), rows.line()));
  }
  PopulationTable t{column(grid, cols[0]), column(grid, cols[1]), column(grid, cols[2]), column(grid, cols[3]),
                    column(grid, cols[4])};
  t.ratio.validate();
  return t;
}

CentralityTable make_centrality_table(const TxGraph& graph, const CentralityScores& scores,
                                      std::span<const NodeMetrics> metrics) {
  CentralityTable t;
  t.nodes.assign(graph.external_ids().begin(), graph.external_ids().end());
  t.scores = scores;
  for (const auto& m : metrics) t.in_value.push_back(m.in_value);
  return t;
}

void write_centrality(std::ostream& out, const CentralityTable& table, const ConfigEcho& echo) {
  write_echo(out, "centrality", echo);
  out << "node,pagerank,hub,authority,in_value_satoshi\n";
  for (std::size_t i = 0; i < table.nodes.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    out << table.nodes[i] << ',' << format_double(table.scores.pagerank(k)) << ','
        << format_double(table.scores.hubs(k)) << ',' << format_double(table.scores.authorities(k)) << ','
        << table.in_value[i] << '\n';
  }
}

CentralityTable read_centrality(std::istream& in) {
  CentralityTable t;
  std::vector<double> pr, hub, auth;
  CsvRows rows(in, "node,pagerank,hub,authority,in_value_satoshi", "centrality");
  while (rows.next()) {
    rows.expect_fields(5);
    t.nodes.push_back(rows.integer<ExternalId>(0));
    pr.push_back(parse_double(rows.field(1), rows.line()));
    hub.push_back(parse_double(rows.field(2), rows.line()));
    auth.push_back(parse_double(rows.field(3), rows.line()));
    t.in_value.push_back(rows.integer<Satoshi>(4));
  }
  const auto vec = [](const std::vector<double>& v) {
    return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
  };
  t.scores = {vec(pr), vec(hub), vec(auth)};
  return t;
}

void write_correlations(std::ostream& out, std::span<const CorrelationRow> rows, const ConfigEcho& echo) {
  write_echo(out, "correlations", echo);
  out << "measure,space,coefficient,n_used,n_excluded,status\n";
  for (const auto& r : rows) {
    std::string status = r.status;
    std::replace(status.begin(), status.end(), ',', ';');
    out << r.measure << ',' << r.space << ',' << format_double(r.coefficient) << ',' << r.used << ','
        << r.excluded << ',' << status << '\n';
  }
}

}  // namespace chainscope
