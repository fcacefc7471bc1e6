#pragma once

#include <exception>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "chainscope/analytics.hpp"
#include "chainscope/reports.hpp"

namespace chainscope {

enum class InputMode { RawBlocks, EdgeList };

struct PipelineConfig {
  std::optional<std::filesystem::path> blocks_dir;
  std::optional<std::filesystem::path> edge_list;
  std::filesystem::path output_dir = "reports";
  double p_value = 0.01;
  std::uint64_t seed = 1;
  Timestamp grid_step = kDefaultGridStep;
  PageRankOptions pagerank;
  HitsOptions hits;
  IngestMode ingest = IngestMode::Strict;
  std::optional<std::filesystem::path> price_series;
  std::optional<std::filesystem::path> difficulty_series;
  std::uint64_t r_min = 1;
  std::size_t time_parts = 3;

  /// Throws UsageError unless exactly one input mode is set and all
  /// numeric settings are in range.
  void validate() const;
  InputMode mode() const;
  /// Every setting, in a fixed order, for report headers.
  ConfigEcho echo() const;
};

/// Applies one `key=value` setting (config file line or command-line
/// override). Throws UsageError for unknown keys or unparseable values.
void set_config_value(PipelineConfig& config, std::string_view key, std::string_view value);

/// Reads `key=value` lines; '#' starts a comment line.
void load_config_file(PipelineConfig& config, const std::filesystem::path& file);

enum class SeriesKind { PriceUsd, Difficulty };

std::string_view series_kind_name(SeriesKind kind);

/// Externally sourced daily series (price, mining difficulty).
struct ExternalSeries {
  SeriesKind kind = SeriesKind::PriceUsd;
  /// Strictly increasing timestamps, values >= 0.
  std::vector<std::pair<Timestamp, double>> points;

  TimeSeries as_time_series() const;
};

struct SeriesIngest {
  ExternalSeries series;
  std::vector<std::string> warnings;
};

/// `YYYY-MM-DD` or `YYYY-MM-DDTHH:MM:SS[Z]`, UTC.
std::optional<Timestamp> parse_iso8601(std::string_view text);
/// Date only when the time is midnight, otherwise full UTC timestamp.
std::string format_iso8601(Timestamp t);

/// Reads `date_iso8601,value` rows (header optional). Rows are sorted by
/// date; for duplicate dates the later row wins and a warning is recorded.
/// Throws DataError naming the line for bad dates or negative values.
SeriesIngest ingest_external_series(std::istream& in, SeriesKind kind);
SeriesIngest ingest_external_series(const std::filesystem::path& file, SeriesKind kind);
void write_external_series(std::ostream& out, const ExternalSeries& series);

/// Grid from the earliest first_ts to the latest last_ts over active user nodes.
std::vector<Timestamp> data_grid(const TxGraph& graph, std::span<const NodeMetrics> metrics, Timestamp step);

/// Centrality-vs-earnings rows (log-log and linear per measure) for the
/// sellers of `roles`, plus ratio-vs-price and population-vs-difficulty rows
/// when those series are given. Statistical failures become status rows.
std::vector<CorrelationRow> correlation_summary(const CentralityTable& centrality, const RoleTable& roles,
                                                const PopulationTable& population,
                                                const std::optional<ExternalSeries>& price,
                                                const std::optional<ExternalSeries>& difficulty);

/// Writes `file` through `body`; throws DataError if it cannot be written.
void write_file(const std::filesystem::path& file, const std::function<void(std::ostream&)>& body);

struct PipelineResult {
  std::vector<std::filesystem::path> reports;
  std::vector<std::string> warnings;
};

/// Runs every stage and writes the report bundle into config.output_dir.
/// Inputs are checked before anything is written. If a later stage fails,
/// `error.json` records the failing stage, exit code and the reports already
/// written, and the exception is rethrown.
PipelineResult run_pipeline(const PipelineConfig& config);

/// 1 usage error, 2 data error, 3 non-convergence.
int exit_code_for(const std::exception& error);

}  // namespace chainscope
