// chainscope: transaction-graph analytics from raw block files or a
// pre-clustered edge list. Each subcommand is one resumable stage; `pipeline`
// runs them all.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>

#include "chainscope/pipeline.hpp"

namespace fs = std::filesystem;
using namespace chainscope;

namespace {

// Options that map onto PipelineConfig keys. Values given on the command
// line override the config file.
struct ConfigFlags {
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;
  std::string config_file;
  bool value_weighted = false;
  CLI::Option* value_weighted_opt = nullptr;

  void add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    options[key] = app->add_option(flag, values[key], help);
  }

  PipelineConfig resolve() {
    PipelineConfig config;
    if (!config_file.empty()) load_config_file(config, config_file);
    for (const auto& [key, opt] : options) {
      if (opt->count() > 0) set_config_value(config, key, values[key]);
    }
    if (value_weighted_opt != nullptr && value_weighted_opt->count() > 0) config.pagerank.value_weighted = true;
    return config;
  }
};

void add_config_file(CLI::App* app, ConfigFlags& flags) {
  app->add_option("--config", flags.config_file, "key=value config file");
}

void add_nullmodel_flags(CLI::App* app, ConfigFlags& flags) {
  flags.add(app, "--p-value", "p_value", "significance level (default 0.01)");
  flags.add(app, "--seed", "seed", "root random seed (default 1)");
}

void add_centrality_flags(CLI::App* app, ConfigFlags& flags) {
  flags.add(app, "--damping", "damping", "PageRank damping (default 0.85)");
  flags.add(app, "--tolerance", "tolerance", "PageRank L1 tolerance (default 1e-10)");
  flags.add(app, "--max-iterations", "max_iterations", "PageRank iteration cap (default 200)");
  flags.add(app, "--hits-tolerance", "hits_tolerance", "HITS tolerance (default 1e-10)");
  flags.add(app, "--hits-max-iterations", "hits_max_iterations", "HITS iteration cap (default 1000)");
  flags.value_weighted_opt = app->add_flag("--value-weighted", flags.value_weighted,
                                           "weight PageRank transitions by edge value");
}

ConfigEcho stage_echo(const PipelineConfig& config, ConfigEcho extra) {
  ConfigEcho echo = config.echo();
  echo.erase(echo.begin());  // input: stages name their own inputs
  echo.insert(echo.begin(), extra.begin(), extra.end());
  return echo;
}

TxGraph load_graph(const fs::path& edges, IngestMode mode) {
  auto ingest = ingest_edge_list(edges, mode);
  for (const auto& row : ingest.rejected) {
    std::cerr << "warning: " << edges.string() << " line " << row.line << ": " << row.reason << '\n';
  }
  return std::move(ingest.graph);
}

template <typename Reader>
auto read_with(const fs::path& file, Reader reader) {
  std::ifstream in(file);
  if (!in) throw DataError("cannot open " + file.string());
  return reader(in);
}

void ensure_dir(const fs::path& dir) { fs::create_directories(dir); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"chainscope - blockchain transaction-graph analytics"};
  app.require_subcommand(1);

  fs::path in_dir, out_dir = "reports", blocks, edge_list, edges_file, thresholds_file, roles_file;

  // parse ---------------------------------------------------------------
  auto* parse = app.add_subcommand("parse", "decode raw block files into address and transaction tables");
  parse->add_option("--blocks", blocks, "directory of raw block files")->required();
  parse->add_option("--out", out_dir, "output directory");

  // cluster -------------------------------------------------------------
  ConfigFlags cluster_flags;
  auto* cluster = app.add_subcommand("cluster", "common-input clustering, reuse histograms and power-law fit");
  cluster->add_option("--in", in_dir, "directory with addresses.csv and transactions.csv")->required();
  cluster->add_option("--out", out_dir, "output directory");
  add_config_file(cluster, cluster_flags);
  cluster_flags.add(cluster, "--r-min", "r_min", "smallest usage count in the fit (default 1)");
  cluster_flags.add(cluster, "--time-parts", "time_parts", "number of equal-count time ranges (default 3)");

  // graph ---------------------------------------------------------------
  ConfigFlags graph_flags;
  auto* graph_cmd = app.add_subcommand("graph", "build the user graph and per-node metrics");
  auto* graph_in = graph_cmd->add_option("--in", in_dir, "directory with parse and cluster outputs");
  auto* graph_edges = graph_cmd->add_option("--edge-list", edge_list, "pre-clustered edge list CSV");
  graph_in->excludes(graph_edges);
  graph_cmd->add_option("--out", out_dir, "output directory");
  add_config_file(graph_cmd, graph_flags);
  graph_flags.add(graph_cmd, "--ingest", "ingest", "strict|skip handling of malformed rows");

  // nullmodel -----------------------------------------------------------
  ConfigFlags null_flags;
  auto* nullmodel = app.add_subcommand("nullmodel", "significance thresholds from a matched random graph");
  nullmodel->add_option("--edges", edges_file, "edge list CSV")->required();
  nullmodel->add_option("--out", out_dir, "output directory");
  add_config_file(nullmodel, null_flags);
  add_nullmodel_flags(nullmodel, null_flags);

  // classify ------------------------------------------------------------
  auto* classify_cmd = app.add_subcommand("classify", "label miners, collectors, customers and sellers");
  classify_cmd->add_option("--edges", edges_file, "edge list CSV")->required();
  classify_cmd->add_option("--thresholds", thresholds_file, "thresholds.csv")->required();
  classify_cmd->add_option("--out", out_dir, "output directory");

  // timeseries ----------------------------------------------------------
  ConfigFlags ts_flags;
  auto* timeseries = app.add_subcommand("timeseries", "active role populations over time");
  timeseries->add_option("--edges", edges_file, "edge list CSV")->required();
  timeseries->add_option("--roles", roles_file, "roles.csv")->required();
  timeseries->add_option("--out", out_dir, "output directory");
  add_config_file(timeseries, ts_flags);
  ts_flags.add(timeseries, "--grid-step-days", "grid_step_days", "grid spacing in days (default 14)");

  // centrality ----------------------------------------------------------
  ConfigFlags centrality_flags;
  auto* centrality_cmd = app.add_subcommand("centrality", "PageRank, hubs and authorities");
  centrality_cmd->add_option("--edges", edges_file, "edge list CSV")->required();
  centrality_cmd->add_option("--out", out_dir, "output directory");
  add_config_file(centrality_cmd, centrality_flags);
  add_centrality_flags(centrality_cmd, centrality_flags);

  // report --------------------------------------------------------------
  ConfigFlags report_flags;
  auto* report = app.add_subcommand("report", "correlation summary from centrality, roles and populations");
  report->add_option("--in", in_dir, "directory with centrality.csv, roles.csv, population.csv")->required();
  report->add_option("--out", out_dir, "output directory");
  add_config_file(report, report_flags);
  report_flags.add(report, "--price", "price", "price series CSV (date_iso8601,value)");
  report_flags.add(report, "--difficulty", "difficulty", "difficulty series CSV (date_iso8601,value)");

  // pipeline ------------------------------------------------------------
  ConfigFlags pipeline_flags;
  auto* pipeline = app.add_subcommand("pipeline", "run every stage and write the full report bundle");
  add_config_file(pipeline, pipeline_flags);
  pipeline_flags.add(pipeline, "--blocks", "blocks", "directory of raw block files");
  pipeline_flags.add(pipeline, "--edge-list", "edge_list", "pre-clustered edge list CSV");
  pipeline_flags.add(pipeline, "--out", "out", "output directory");
  pipeline_flags.add(pipeline, "--ingest", "ingest", "strict|skip handling of malformed rows");
  pipeline_flags.add(pipeline, "--grid-step-days", "grid_step_days", "grid spacing in days (default 14)");
  pipeline_flags.add(pipeline, "--price", "price", "price series CSV");
  pipeline_flags.add(pipeline, "--difficulty", "difficulty", "difficulty series CSV");
  pipeline_flags.add(pipeline, "--r-min", "r_min", "smallest usage count in the fit");
  pipeline_flags.add(pipeline, "--time-parts", "time_parts", "number of equal-count time ranges");
  add_nullmodel_flags(pipeline, pipeline_flags);
  add_centrality_flags(pipeline, pipeline_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*parse) {
      ensure_dir(out_dir);
      const TransactionSet set = load_block_directory(blocks);
      const ConfigEcho echo{{"blocks", blocks.string()},
                            {"block_count", std::to_string(set.block_count)},
                            {"unresolved_inputs", std::to_string(set.unresolved_inputs)}};
      write_file(out_dir / "addresses.csv", [&](std::ostream& o) { write_addresses(o, set.addresses, echo); });
      write_file(out_dir / "transactions.csv",
                 [&](std::ostream& o) { write_transactions(o, set.transactions, echo); });
      write_file(out_dir / "parse_issues.csv", [&](std::ostream& o) { write_scan_issues(o, set.issues, echo); });
      std::cerr << set.block_count << " blocks, " << set.transactions.size() << " transactions, "
                << set.addresses.size() << " addresses, " << set.issues.size() << " issues\n";
    } else if (*cluster) {
      const auto config = cluster_flags.resolve();
      ensure_dir(out_dir);
      const auto book = read_with(in_dir / "addresses.csv", read_addresses);
      const auto txs = read_with(in_dir / "transactions.csv", read_transactions);
      const auto clustering = cluster_transactions(txs, book.size());
      const auto echo = stage_echo(config, {{"input", in_dir.string()}});
      write_file(out_dir / "clustering.csv", [&](std::ostream& o) { write_clustering(o, book, clustering, echo); });
      const auto hist = reuse_histogram(txs);
      write_file(out_dir / "reuse_histogram.csv", [&](std::ostream& o) { write_histogram(o, hist, echo); });
      if (txs.size() >= config.time_parts) {
        const auto parts = time_partition<ResolvedTransaction>(txs, config.time_parts);
        for (std::size_t p = 0; p < parts.size(); ++p) {
          const auto part = reuse_histogram(parts[p]);
          write_file(out_dir / ("reuse_histogram_part" + std::to_string(p + 1) + ".csv"),
                     [&](std::ostream& o) { write_histogram(o, part, echo); });
        }
      }
      try {
        const std::vector<PowerLawFit> fits{fit_power_law(hist, config.r_min), fit_power_law_mle(hist, config.r_min)};
        write_file(out_dir / "power_law_fit.csv", [&](std::ostream& o) { write_fits(o, fits, echo); });
      } catch (const DataError& e) {
        std::cerr << "warning: " << e.what() << '\n';
        write_file(out_dir / "power_law_fit.csv", [&](std::ostream& o) {
          write_unavailable(o, "power_law_fit", echo, "exponent,amplitude,r_min,residual,method", e.what());
        });
      }
      std::cerr << clustering.user_count() << " users from " << clustering.address_count() << " addresses\n";
    } else if (*graph_cmd) {
      const auto config = graph_flags.resolve();
      ensure_dir(out_dir);
      TxGraph graph;
      ConfigEcho echo;
      if (!edge_list.empty()) {
        graph = load_graph(edge_list, config.ingest);
        echo = {{"input", "edge_list:" + edge_list.string()}};
      } else if (!in_dir.empty()) {
        const auto book = read_with(in_dir / "addresses.csv", read_addresses);
        const auto txs = read_with(in_dir / "transactions.csv", read_transactions);
        const auto clustering =
            read_with(in_dir / "clustering.csv", [&](std::istream& in) { return read_clustering(in, book); });
        const auto built = build_user_graph(txs, clustering);
        graph = built.graph;
        echo = {{"input", in_dir.string()}, {"self_edges_dropped", std::to_string(built.self_edges_dropped)}};
      } else {
        throw UsageError("graph needs --in or --edge-list");
      }
      const auto metrics = node_metrics(graph);
      write_file(out_dir / "edges.csv", [&](std::ostream& o) {
        write_echo(o, "edges", echo);
        write_edge_list(o, graph);
      });
      write_file(out_dir / "node_metrics.csv", [&](std::ostream& o) { write_node_metrics(o, graph, metrics, echo); });
      std::cerr << graph.node_count() << " nodes, " << graph.edge_count() << " edges\n";
    } else if (*nullmodel) {
      const auto config = null_flags.resolve();
      ensure_dir(out_dir);
      const auto graph = load_graph(edges_file, IngestMode::Strict);
      const auto result = null_model_for(graph, config.p_value, config.seed);
      const auto echo = stage_echo(config, {{"input", edges_file.string()}});
      write_file(out_dir / "thresholds.csv",
                 [&](std::ostream& o) { write_thresholds(o, result.thresholds, result.config, echo); });
    } else if (*classify_cmd) {
      ensure_dir(out_dir);
      const auto graph = load_graph(edges_file, IngestMode::Strict);
      const auto thresholds = read_with(thresholds_file, read_thresholds);
      const auto labels = classify_all(graph, node_metrics(graph), thresholds);
      const ConfigEcho echo{{"input", edges_file.string()}, {"thresholds", thresholds_file.string()}};
      write_file(out_dir / "roles.csv", [&](std::ostream& o) { write_roles(o, make_role_table(graph, labels), echo); });
    } else if (*timeseries) {
      const auto config = ts_flags.resolve();
      ensure_dir(out_dir);
      const auto graph = load_graph(edges_file, IngestMode::Strict);
      const auto metrics = node_metrics(graph);
      const auto labels = labels_for_graph(read_with(roles_file, read_roles), graph);
      const auto grid = data_grid(graph, metrics, config.grid_step);
      const auto table = population_table(metrics, labels, grid);
      const ConfigEcho echo{{"input", edges_file.string()},
                            {"roles", roles_file.string()},
                            {"grid_step_seconds", std::to_string(config.grid_step)}};
      write_file(out_dir / "population.csv", [&](std::ostream& o) { write_population(o, table, echo); });
    } else if (*centrality_cmd) {
      const auto config = centrality_flags.resolve();
      ensure_dir(out_dir);
      const auto graph = load_graph(edges_file, IngestMode::Strict);
      const auto scores = compute_centrality(graph, config.pagerank, config.hits);
      const auto table = make_centrality_table(graph, scores, node_metrics(graph));
      const auto echo = stage_echo(config, {{"input", edges_file.string()}});
      write_file(out_dir / "centrality.csv", [&](std::ostream& o) { write_centrality(o, table, echo); });
    } else if (*report) {
      const auto config = report_flags.resolve();
      ensure_dir(out_dir);
      const auto centrality = read_with(in_dir / "centrality.csv", read_centrality);
      const auto roles = read_with(in_dir / "roles.csv", read_roles);
      const auto population = read_with(in_dir / "population.csv", read_population);
      std::optional<ExternalSeries> price, difficulty;
      if (config.price_series) price = ingest_external_series(*config.price_series, SeriesKind::PriceUsd).series;
      if (config.difficulty_series) {
        difficulty = ingest_external_series(*config.difficulty_series, SeriesKind::Difficulty).series;
      }
      const auto rows = correlation_summary(centrality, roles, population, price, difficulty);
      const auto echo = stage_echo(config, {{"input", in_dir.string()}});
      write_file(out_dir / "correlations.csv", [&](std::ostream& o) { write_correlations(o, rows, echo); });
    } else if (*pipeline) {
      const auto config = pipeline_flags.resolve();
      const auto result = run_pipeline(config);
      for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
      std::cerr << result.reports.size() << " reports written to " << config.output_dir.string() << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
  return 0;
}
