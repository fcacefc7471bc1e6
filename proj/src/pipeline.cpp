#include "chainscope/pipeline.hpp"

#include <json.hpp>

#include <charconv>
#include <chrono>
#include <fstream>
#include <map>
#include <sstream>

#include "chainscope/ledger.hpp"
#include "chainscope/random.hpp"

namespace chainscope {

namespace {

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  T v{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc{} || ptr != value.data() + value.size() || value.empty()) {
    throw UsageError("invalid value for " + std::string(key) + ": '" + std::string(value) + "'");
  }
  return v;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "1" || value == "true") return true;
  if (value == "0" || value == "false") return false;
  throw UsageError("invalid boolean for " + std::string(key) + ": '" + std::string(value) + "'");
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool parse_fixed(std::string_view s, int& out) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size() && !s.empty();
}

// Records which reports were written so a failure can be summarized.
class Bundle {
 public:
  explicit Bundle(std::filesystem::path dir) : dir_(std::move(dir)) {}

  void write(const std::string& name, const std::function<void(std::ostream&)>& body) {
    write_file(dir_ / name, body);
    written_.push_back(dir_ / name);
  }

  void stage(std::string name) { stage_ = std::move(name); }

  void write_error(const std::exception& e) const {
    nlohmann::ordered_json j;
    j["status"] = "failed";
    j["stage"] = stage_;
    j["exit_code"] = exit_code_for(e);
    j["message"] = e.what();
    j["completed_reports"] = nlohmann::json::array();
    for (const auto& p : written_) j["completed_reports"].push_back(p.filename().string());
    write_file(dir_ / "error.json", [&](std::ostream& out) { out << j.dump(2) << '\n'; });
  }

  const std::vector<std::filesystem::path>& written() const { return written_; }

 private:
  std::filesystem::path dir_;
  std::vector<std::filesystem::path> written_;
  std::string stage_ = "setup";
};

void add_score_rows(std::vector<CorrelationRow>& rows, std::string_view measure, std::span<const NodeMetrics> metrics,
                    const Eigen::VectorXd& scores, std::span<const NodeId> sellers) {
  try {
    const auto r = score_earnings_correlation(metrics, scores, sellers);
    rows.push_back({std::string(measure), "log-log", r.log_log, r.used, r.excluded, "ok"});
    rows.push_back({std::string(measure), "linear", r.linear, r.used, r.excluded, "ok"});
  } catch (const DataError& e) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    rows.push_back({std::string(measure), "log-log", nan, 0, 0, e.what()});
    rows.push_back({std::string(measure), "linear", nan, 0, 0, e.what()});
  }
}

void add_series_row(std::vector<CorrelationRow>& rows, std::string_view measure, const TimeSeries& a,
                    const TimeSeries& b) {
  try {
    rows.push_back({std::string(measure), "linear", series_correlation(a, b), 0, 0, "ok"});
  } catch (const DataError& e) {
    rows.push_back({std::string(measure), "linear", std::numeric_limits<double>::quiet_NaN(), 0, 0, e.what()});
  }
}

}  // namespace

void PipelineConfig::validate() const {
  if (blocks_dir.has_value() == edge_list.has_value()) {
    throw UsageError("exactly one input mode (blocks or edge_list) must be set");
  }
  if (!(p_value > 0.0 && p_value < 1.0)) throw UsageError("p_value must lie in (0, 1)");
  if (grid_step <= 0) throw UsageError("grid step must be positive");
  if (!(pagerank.damping > 0.0 && pagerank.damping < 1.0)) throw UsageError("damping must lie in (0, 1)");
  if (!(pagerank.tolerance > 0.0) || !(hits.tolerance > 0.0)) throw UsageError("tolerances must be positive");
  if (pagerank.max_iterations < 1 || hits.max_iterations < 1) throw UsageError("max_iterations must be >= 1");
  if (r_min < 1) throw UsageError("r_min must be >= 1");
  if (time_parts < 1) throw UsageError("time_parts must be >= 1");
  if (output_dir.empty()) throw UsageError("output directory is required");
}

InputMode PipelineConfig::mode() const { return blocks_dir ? InputMode::RawBlocks : InputMode::EdgeList; }

ConfigEcho PipelineConfig::echo() const {
  ConfigEcho e;
  e.emplace_back("input", blocks_dir  ? "blocks:" + blocks_dir->string()
                         : edge_list ? "edge_list:" + edge_list->string()
                                     : std::string());
  e.emplace_back("seed", std::to_string(seed));
  e.emplace_back("rng_name", std::string(kRngName));
  e.emplace_back("p_value", format_double(p_value));
  e.emplace_back("grid_step_seconds", std::to_string(grid_step));
  e.emplace_back("damping", format_double(pagerank.damping));
  e.emplace_back("tolerance", format_double(pagerank.tolerance));
  e.emplace_back("max_iterations", std::to_string(pagerank.max_iterations));
  e.emplace_back("value_weighted_pagerank", pagerank.value_weighted ? "1" : "0");
  e.emplace_back("hits_tolerance", format_double(hits.tolerance));
  e.emplace_back("hits_max_iterations", std::to_string(hits.max_iterations));
  e.emplace_back("ingest", ingest == IngestMode::Strict ? "strict" : "skip");
  e.emplace_back("price", price_series ? price_series->string() : "");
  e.emplace_back("difficulty", difficulty_series ? difficulty_series->string() : "");
  e.emplace_back("r_min", std::to_string(r_min));
  e.emplace_back("time_parts", std::to_string(time_parts));
  return e;
}

void set_config_value(PipelineConfig& c, std::string_view key, std::string_view value) {
  if (key == "blocks") {
    c.blocks_dir = std::filesystem::path(value);
  } else if (key == "edge_list") {
    c.edge_list = std::filesystem::path(value);
  } else if (key == "out") {
    c.output_dir = std::filesystem::path(value);
  } else if (key == "p_value") {
    c.p_value = parse_number<double>(key, value);
  } else if (key == "seed") {
    c.seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "grid_step_days") {
    c.grid_step = parse_number<Timestamp>(key, value) * 86400;
  } else if (key == "grid_step_seconds") {
    c.grid_step = parse_number<Timestamp>(key, value);
  } else if (key == "damping") {
    c.pagerank.damping = parse_number<double>(key, value);
  } else if (key == "tolerance") {
    c.pagerank.tolerance = parse_number<double>(key, value);
  } else if (key == "max_iterations") {
    c.pagerank.max_iterations = parse_number<int>(key, value);
  } else if (key == "value_weighted_pagerank") {
    c.pagerank.value_weighted = parse_bool(key, value);
  } else if (key == "hits_tolerance") {
    c.hits.tolerance = parse_number<double>(key, value);
  } else if (key == "hits_max_iterations") {
    c.hits.max_iterations = parse_number<int>(key, value);
  } else if (key == "ingest") {
    if (value == "strict") {
      c.ingest = IngestMode::Strict;
    } else if (value == "skip") {
      c.ingest = IngestMode::Skip;
    } else {
      throw UsageError("ingest must be 'strict' or 'skip'");
    }
  } else if (key == "price") {
    c.price_series = std::filesystem::path(value);
  } else if (key == "difficulty") {
    c.difficulty_series = std::filesystem::path(value);
  } else if (key == "r_min") {
    c.r_min = parse_number<std::uint64_t>(key, value);
  } else if (key == "time_parts") {
    c.time_parts = parse_number<std::size_t>(key, value);
  } else {
    throw UsageError("unknown config key '" + std::string(key) + "'");
  }
}

void load_config_file(PipelineConfig& config, const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw UsageError("cannot open config file " + file.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) {
      throw UsageError("config line " + std::to_string(line_no) + ": expected key=value");
    }
    set_config_value(config, trim(text.substr(0, eq)), trim(text.substr(eq + 1)));
  }
}

std::string_view series_kind_name(SeriesKind kind) {
  return kind == SeriesKind::PriceUsd ? "price-usd" : "difficulty";
}

TimeSeries ExternalSeries::as_time_series() const {
  TimeSeries s;
  for (const auto& [t, v] : points) {
    s.grid.push_back(t);
    s.values.push_back(v);
  }
  return s;
}

std::optional<Timestamp> parse_iso8601(std::string_view text) {
  using namespace std::chrono;
  if (text.size() < 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  int y = 0, m = 0, d = 0;
  if (!parse_fixed(text.substr(0, 4), y) || !parse_fixed(text.substr(5, 2), m) ||
      !parse_fixed(text.substr(8, 2), d)) {
    return std::nullopt;
  }
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(m)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  Timestamp t = sys_days{ymd}.time_since_epoch().count() * Timestamp{86400};

  auto rest = text.substr(10);
  if (rest.empty()) return t;
  if (rest.back() == 'Z') rest.remove_suffix(1);
  if (rest.size() != 9 || rest[0] != 'T' || rest[3] != ':' || rest[6] != ':') return std::nullopt;
  int hh = 0, mm = 0, ss = 0;
  if (!parse_fixed(rest.substr(1, 2), hh) || !parse_fixed(rest.substr(4, 2), mm) ||
      !parse_fixed(rest.substr(7, 2), ss) || hh > 23 || mm > 59 || ss > 59) {
    return std::nullopt;
  }
  return t + hh * 3600 + mm * 60 + ss;
}

std::string format_iso8601(Timestamp t) {
  using namespace std::chrono;
  Timestamp days = t / 86400;
  Timestamp secs = t % 86400;
  if (secs < 0) {
    secs += 86400;
    --days;
  }
  const year_month_day ymd{sys_days{std::chrono::days{days}}};
  char buf[32];
  if (secs == 0) {
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  } else {
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(secs / 3600), static_cast<int>(secs / 60 % 60), static_cast<int>(secs % 60));
  }
  return buf;
}

SeriesIngest ingest_external_series(std::istream& in, SeriesKind kind) {
  SeriesIngest result;
  result.series.kind = kind;
  std::map<Timestamp, std::pair<double, std::size_t>> by_date;
  std::string line;
  std::size_t line_no = 0;
  bool first_data = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const bool header = first_data && line == "date_iso8601,value";
    first_data = false;
    if (header) continue;

    const auto fields = split_csv(line);
    if (fields.size() != 2) throw DataError("series: expected 2 fields", line_no);
    const auto t = parse_iso8601(fields[0]);
    if (!t) throw DataError("series: unparseable date '" + std::string(fields[0]) + "'", line_no);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(fields[1].data(), fields[1].data() + fields[1].size(), v);
    if (ec != std::errc{} || ptr != fields[1].data() + fields[1].size() || fields[1].empty() || std::isnan(v)) {
      throw DataError("series: bad value", line_no);
    }
    if (v < 0.0) throw DataError("series: negative value", line_no);

    const auto [it, inserted] = by_date.try_emplace(*t, v, line_no);
    if (!inserted) {
      result.warnings.push_back("line " + std::to_string(line_no) + ": duplicate date " +
                                std::string(fields[0]) + " overrides line " + std::to_string(it->second.second));
      it->second = {v, line_no};
    }
  }
  for (const auto& [t, entry] : by_date) result.series.points.emplace_back(t, entry.first);
  return result;
}

SeriesIngest ingest_external_series(const std::filesystem::path& file, SeriesKind kind) {
  std::ifstream in(file);
  if (!in) throw DataError("cannot open series file " + file.string());
  return ingest_external_series(in, kind);
}

void write_external_series(std::ostream& out, const ExternalSeries& series) {
  out << "date_iso8601,value\n";
  for (const auto& [t, v] : series.points) out << format_iso8601(t) << ',' << format_double(v) << '\n';
}

std::vector<Timestamp> data_grid(const TxGraph& graph, std::span<const NodeMetrics> metrics, Timestamp step) {
  std::optional<Timestamp> lo, hi;
  for (NodeId v = 0; v < metrics.size(); ++v) {
    if (graph.is_reserved(v) || !metrics[v].active()) continue;
    lo = lo ? std::min(*lo, metrics[v].first_ts) : metrics[v].first_ts;
    hi = hi ? std::max(*hi, metrics[v].last_ts) : metrics[v].last_ts;
  }
  if (!lo) return {};
  return make_grid(*lo, *hi, step);
}

std::vector<CorrelationRow> correlation_summary(const CentralityTable& centrality, const RoleTable& roles,
                                                const PopulationTable& population,
                                                const std::optional<ExternalSeries>& price,
                                                const std::optional<ExternalSeries>& difficulty) {
  std::map<ExternalId, NodeId> index;
  for (NodeId i = 0; i < centrality.nodes.size(); ++i) index.emplace(centrality.nodes[i], i);
  std::vector<NodeId> sellers;
  for (std::size_t i = 0; i < roles.nodes.size(); ++i) {
    if (!roles.labels[i].seller) continue;
    const auto it = index.find(roles.nodes[i]);
    if (it == index.end()) throw DataError("roles and centrality tables disagree on node set");
    sellers.push_back(it->second);
  }
  std::vector<NodeMetrics> earnings(centrality.nodes.size());
  for (std::size_t i = 0; i < earnings.size(); ++i) earnings[i].in_value = centrality.in_value[i];

  std::vector<CorrelationRow> rows;
  add_score_rows(rows, "pagerank_vs_earnings", earnings, centrality.scores.pagerank, sellers);
  add_score_rows(rows, "hubs_vs_earnings", earnings, centrality.scores.hubs, sellers);
  add_score_rows(rows, "authorities_vs_earnings", earnings, centrality.scores.authorities, sellers);
  if (price) add_series_row(rows, "ratio_vs_price", population.ratio, price->as_time_series());
  if (difficulty) {
    add_series_row(rows, "miners_vs_difficulty", population.miners, difficulty->as_time_series());
    add_series_row(rows, "collectors_vs_difficulty", population.collectors, difficulty->as_time_series());
  }
  return rows;
}

void write_file(const std::filesystem::path& file, const std::function<void(std::ostream&)>& body) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + file.string());
  body(out);
  out.flush();
  if (!out) throw DataError("failed writing " + file.string());
}

PipelineResult run_pipeline(const PipelineConfig& config) {
  config.validate();
  const auto require = [](const std::optional<std::filesystem::path>& p, bool directory) {
    if (!p) return;
    const bool ok = directory ? std::filesystem::is_directory(*p) : std::filesystem::is_regular_file(*p);
    if (!ok) throw DataError("input not found: " + p->string());
  };
  require(config.blocks_dir, true);
  require(config.edge_list, false);
  require(config.price_series, false);
  require(config.difficulty_series, false);

  std::filesystem::create_directories(config.output_dir);
  std::filesystem::remove(config.output_dir / "error.json");

  PipelineResult result;
  Bundle bundle(config.output_dir);
  const ConfigEcho echo = config.echo();
  try {
    std::optional<ExternalSeries> price, difficulty;
    bundle.stage("series");
    if (config.price_series) {
      auto s = ingest_external_series(*config.price_series, SeriesKind::PriceUsd);
      result.warnings.insert(result.warnings.end(), s.warnings.begin(), s.warnings.end());
      price = std::move(s.series);
    }
    if (config.difficulty_series) {
      auto s = ingest_external_series(*config.difficulty_series, SeriesKind::Difficulty);
      result.warnings.insert(result.warnings.end(), s.warnings.begin(), s.warnings.end());
      difficulty = std::move(s.series);
    }

    TxGraph graph;
    if (config.mode() == InputMode::RawBlocks) {
      bundle.stage("parse");
      const TransactionSet set = load_block_directory(*config.blocks_dir);
      for (const auto& issue : set.issues) {
        result.warnings.push_back(issue.file.filename().string() + "@" + std::to_string(issue.offset) + ": " +
                                  issue.message);
      }

      bundle.stage("cluster");
      const auto clustering = cluster_transactions(set.transactions, set.addresses.size());
      ConfigEcho cluster_echo = echo;
      cluster_echo.emplace_back("unresolved_inputs", std::to_string(set.unresolved_inputs));
      bundle.write("clustering.csv", [&](std::ostream& out) {
        write_clustering(out, set.addresses, clustering, cluster_echo);
      });

      const auto hist = reuse_histogram(set.transactions);
      bundle.write("reuse_histogram.csv", [&](std::ostream& out) { write_histogram(out, hist, echo); });
      if (set.transactions.size() >= config.time_parts) {
        const auto parts = time_partition<ResolvedTransaction>(set.transactions, config.time_parts);
        for (std::size_t p = 0; p < parts.size(); ++p) {
          const auto part_hist = reuse_histogram(parts[p]);
          bundle.write("reuse_histogram_part" + std::to_string(p + 1) + ".csv",
                       [&](std::ostream& out) { write_histogram(out, part_hist, echo); });
        }
      }
      try {
        const std::vector<PowerLawFit> fits{fit_power_law(hist, config.r_min), fit_power_law_mle(hist, config.r_min)};
        bundle.write("power_law_fit.csv", [&](std::ostream& out) { write_fits(out, fits, echo); });
      } catch (const DataError& e) {
        bundle.write("power_law_fit.csv", [&](std::ostream& out) {
          write_unavailable(out, "power_law_fit", echo, "exponent,amplitude,r_min,residual,method", e.what());
        });
      }

      bundle.stage("graph");
      graph = build_user_graph(set.transactions, clustering).graph;
    } else {
      bundle.stage("graph");
      auto ingest = ingest_edge_list(*config.edge_list, config.ingest);
      for (const auto& row : ingest.rejected) {
        result.warnings.push_back("edge list line " + std::to_string(row.line) + ": " + row.reason);
      }
      graph = std::move(ingest.graph);
      constexpr std::string_view reason = "edge-list input carries no addresses";
      bundle.write("clustering.csv", [&](std::ostream& out) {
        write_unavailable(out, "clustering", echo, "address,user_id", reason);
      });
      bundle.write("reuse_histogram.csv", [&](std::ostream& out) {
        write_unavailable(out, "reuse_histogram", echo, "r,count", reason);
      });
      bundle.write("power_law_fit.csv", [&](std::ostream& out) {
        write_unavailable(out, "power_law_fit", echo, "exponent,amplitude,r_min,residual,method", reason);
      });
    }
    const auto metrics = node_metrics(graph);

    bundle.stage("nullmodel");
    const auto null_model = null_model_for(graph, config.p_value, config.seed);
    bundle.write("thresholds.csv", [&](std::ostream& out) {
      write_thresholds(out, null_model.thresholds, null_model.config, echo);
    });

    bundle.stage("classify");
    const auto labels = classify_all(graph, metrics, null_model.thresholds);
    const RoleTable roles = make_role_table(graph, labels);
    bundle.write("roles.csv", [&](std::ostream& out) { write_roles(out, roles, echo); });

    bundle.stage("timeseries");
    const auto grid = data_grid(graph, metrics, config.grid_step);
    const PopulationTable population = population_table(metrics, labels, grid);
    bundle.write("population.csv", [&](std::ostream& out) {
      ConfigEcho e = echo;
      if (!grid.empty()) {
        e.emplace_back("censoring", "lifetimes are truncated at the data span " + std::to_string(grid.front()) +
                                        ".." + std::to_string(grid.back()));
      }
      write_population(out, population, e);
    });

    bundle.stage("centrality");
    const auto scores = compute_centrality(graph, config.pagerank, config.hits);
    const CentralityTable centrality = make_centrality_table(graph, scores, metrics);
    bundle.write("centrality.csv", [&](std::ostream& out) { write_centrality(out, centrality, echo); });

    bundle.stage("report");
    const auto rows = correlation_summary(centrality, roles, population, price, difficulty);
    bundle.write("correlations.csv", [&](std::ostream& out) { write_correlations(out, rows, echo); });
  } catch (const std::exception& e) {
    bundle.write_error(e);
    throw;
  }
  result.reports = bundle.written();
  return result;
}

int exit_code_for(const std::exception& error) {
  if (dynamic_cast<const UsageError*>(&error) != nullptr) return 1;
  if (dynamic_cast<const ConvergenceError*>(&error) != nullptr) return 3;
  return 2;
}

}  // namespace chainscope
