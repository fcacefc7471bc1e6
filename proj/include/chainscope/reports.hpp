#pragma once

#include <Eigen/Core>

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "chainscope/analytics.hpp"
#include "chainscope/cluster.hpp"
#include "chainscope/ledger.hpp"
#include "chainscope/nullmodel.hpp"
#include "chainscope/roles.hpp"
#include "chainscope/txgraph.hpp"

namespace chainscope {

/// key=value pairs echoed as leading "# key=value" lines of every report.
using ConfigEcho = std::vector<std::pair<std::string, std::string>>;

void write_echo(std::ostream& out, std::string_view report, const ConfigEcho& echo);

/// Shortest decimal that round-trips; NaN is written as an empty field.
std::string format_double(double value);
/// Inverse of format_double; empty -> NaN. Throws DataError otherwise.
double parse_double(std::string_view field, std::size_t line);

/// Header-only report recording why its content could not be produced.
void write_unavailable(std::ostream& out, std::string_view report, const ConfigEcho& echo,
                       std::string_view header, std::string_view reason);

// Splits a CSV line on commas (no quoting; none of our formats need it).
std::vector<std::string_view> split_csv(std::string_view line);

// parse stage ---------------------------------------------------------------

void write_addresses(std::ostream& out, const AddressBook& book, const ConfigEcho& echo);
AddressBook read_addresses(std::istream& in);

/// One "tx" row per transaction followed by its "in", "unresolved" and
/// "out" rows.
void write_transactions(std::ostream& out, std::span<const ResolvedTransaction> txs,
                        const ConfigEcho& echo);
std::vector<ResolvedTransaction> read_transactions(std::istream& in);

void write_scan_issues(std::ostream& out, std::span<const ScanIssue> issues, const ConfigEcho& echo);

// cluster stage -------------------------------------------------------------

void write_clustering(std::ostream& out, const AddressBook& book, const AddressClustering& clustering,
                      const ConfigEcho& echo);
AddressClustering read_clustering(std::istream& in, const AddressBook& book);

void write_histogram(std::ostream& out, const ReuseHistogram& hist, const ConfigEcho& echo);
ReuseHistogram read_histogram(std::istream& in);

void write_fits(std::ostream& out, std::span<const PowerLawFit> fits, const ConfigEcho& echo);

// graph stage ---------------------------------------------------------------

void write_node_metrics(std::ostream& out, const TxGraph& graph, std::span<const NodeMetrics> metrics,
                        const ConfigEcho& echo);

// nullmodel stage -----------------------------------------------------------

void write_thresholds(std::ostream& out, const SignificanceThresholds& thresholds,
                      const NullModelConfig& config, const ConfigEcho& echo);
SignificanceThresholds read_thresholds(std::istream& in);

// classify stage ------------------------------------------------------------

/// Labels keyed by external node id.
struct RoleTable {
  std::vector<ExternalId> nodes;
  std::vector<RoleLabel> labels;
};

RoleTable make_role_table(const TxGraph& graph, std::span<const RoleLabel> labels);
/// Expands a role table to one label per graph node (unlisted nodes unlabeled).
std::vector<RoleLabel> labels_for_graph(const RoleTable& table, const TxGraph& graph);

void write_roles(std::ostream& out, const RoleTable& roles, const ConfigEcho& echo);
RoleTable read_roles(std::istream& in);

// timeseries stage ----------------------------------------------------------

struct PopulationTable {
  TimeSeries miners;
  TimeSeries collectors;
  TimeSeries customers;
  TimeSeries sellers;
  TimeSeries ratio;
};

PopulationTable population_table(std::span<const NodeMetrics> metrics, std::span<const RoleLabel> labels,
                                 std::span<const Timestamp> grid);

void write_population(std::ostream& out, const PopulationTable& table, const ConfigEcho& echo);
PopulationTable read_population(std::istream& in);

// centrality stage ----------------------------------------------------------

struct CentralityTable {
  std::vector<ExternalId> nodes;
  CentralityScores scores;
  std::vector<Satoshi> in_value;
};

CentralityTable make_centrality_table(const TxGraph& graph, const CentralityScores& scores,
                                      std::span<const NodeMetrics> metrics);
void write_centrality(std::ostream& out, const CentralityTable& table, const ConfigEcho& echo);
CentralityTable read_centrality(std::istream& in);

// report stage --------------------------------------------------------------

struct CorrelationRow {
  std::string measure;
  std::string space;
  double coefficient = 0.0;
  std::size_t used = 0;
  std::size_t excluded = 0;
  std::string status = "ok";
};

void write_correlations(std::ostream& out, std::span<const CorrelationRow> rows, const ConfigEcho& echo);

}  // namespace chainscope
