// schemamap command-line front end: load, synthesize, explain, bench, serve.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "schemamap/engine.hpp"
#include "schemamap/explain.hpp"
#include "schemamap/service.hpp"
#include "schemamap/wire.hpp"
#include "schemamap/workload.hpp"

using namespace schemamap;

namespace {

enum Exit { kOk = 0, kBadInput = 1, kUnknownCatalog = 2, kTimeout = 3 };

struct SynthOptions {
  std::string catalog;
  std::string catalog_dir;
  std::string task;
  std::string policy = "bayes";
  long long budget_ms = 60'000;
  std::size_t max_edges = 4;
  std::uint64_t seed = 0;
  std::string match_mode = "cell";
  bool case_sensitive = false;
  std::size_t workers = 1;
};

void add_synth_options(CLI::App *cmd, SynthOptions &o) {
  cmd->add_option("--catalog", o.catalog, "Catalog name (under the catalog dir) or path to a schema.json");
  cmd->add_option("--catalog-dir", o.catalog_dir, "Catalog directory (default $SCHEMAMAP_CATALOG_DIR or data/catalogs)");
  cmd->add_option("--task", o.task, "Task document")->required();
  cmd->add_option("--policy", o.policy, "Filter scheduling policy: bayes, baseline or random");
  cmd->add_option("--budget", o.budget_ms, "Time budget in milliseconds");
  cmd->add_option("--max-edges", o.max_edges, "Largest join tree considered, in edges");
  cmd->add_option("--seed", o.seed, "Seed for the random policy");
  cmd->add_option("--match-mode", o.match_mode, "Value matching: cell or token");
  cmd->add_flag("--case-sensitive", o.case_sensitive, "Compare text case-sensitively");
  cmd->add_option("--workers", o.workers, "Validation threads");
}

struct Prepared {
  std::shared_ptr<const LoadedCatalog> catalog;
  TaskDocument doc;
  std::optional<SynthesisTask> task;
  EngineConfig config;
};

std::string read_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw WireError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Returns an exit code on failure.
std::optional<int> prepare(const SynthOptions &o, Prepared &out) {
  try {
    out.doc = parse_task_text(read_file(o.task));
    out.task.emplace(out.doc.to_task());
    auto policy = parse_policy(o.policy);
    if (!policy) throw WireError("unknown policy '" + o.policy + "'");
    out.config.policy = *policy;
    out.config.budget = std::chrono::milliseconds(o.budget_ms);
    out.config.limits.max_edges = o.max_edges;
    out.config.seed = o.seed;
    out.config.match.mode = parse_match_mode(o.match_mode);
    out.config.match.case_sensitive = o.case_sensitive;
    out.config.workers = o.workers;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kBadInput;
  }
  const std::string name = o.catalog.empty() ? out.doc.catalog : o.catalog;
  if (name.empty()) {
    std::cerr << "error: no catalog given (use --catalog or set config.catalog in the task)\n";
    return kBadInput;
  }
  CatalogRegistry registry(o.catalog_dir.empty() ? default_catalog_dir() : std::filesystem::path(o.catalog_dir));
  try {
    out.catalog = resolve_catalog(registry, name);
  } catch (const UnknownCatalog &e) {
    std::cerr << "error: " << e.what() << " (looked in " << registry.dir() << ")\n";
    return kUnknownCatalog;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kBadInput;
  }
  return std::nullopt;
}

std::vector<std::size_t> parse_selection(const std::string &text, std::size_t available) {
  std::vector<std::size_t> out;
  if (text == "all") {
    for (std::size_t k = 0; k < available; ++k) out.push_back(k);
    return out;
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(std::stoul(item));
  return out;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Sample-driven schema mapping: synthesize project-join queries from constraints"};
  app.require_subcommand(1);

  // load
  std::string load_catalog_name, load_dir;
  auto *load = app.add_subcommand("load", "Validate a catalog and print its description");
  load->add_option("catalog", load_catalog_name, "Catalog name or schema.json path")->required();
  load->add_option("--catalog-dir", load_dir, "Catalog directory");

  // synthesize
  SynthOptions synth;
  std::string persist;
  bool trace = false;
  auto *synth_cmd = app.add_subcommand("synthesize", "Run synthesis on a task document and print the report");
  add_synth_options(synth_cmd, synth);
  synth_cmd->add_option("--persist", persist, "Also write the report to this file");
  synth_cmd->add_flag("--trace", trace, "Include the filter validation trace");

  // explain
  SynthOptions explain_opts;
  std::size_t query_id = 0;
  std::string constraints = "all", format = "dot";
  auto *explain_cmd = app.add_subcommand("explain", "Synthesize, then render one query's graph");
  add_synth_options(explain_cmd, explain_opts);
  explain_cmd->add_option("--query", query_id, "Query id from the report");
  explain_cmd->add_option("--constraints", constraints, "Constraint indices to show, e.g. 0,2 (default all)");
  explain_cmd->add_option("--format", format, "dot or structured")->check(CLI::IsMember({"dot", "structured"}));

  // bench
  BenchOptions bench;
  long long bench_budget = 60'000;
  auto *bench_cmd = app.add_subcommand("bench", "Compare scheduling policies on generated workloads");
  bench_cmd->add_option("--seeds", bench.seeds, "Number of workloads");
  bench_cmd->add_option("--first-seed", bench.first_seed, "Seed of the first workload");
  bench_cmd->add_option("--budget", bench_budget, "Per-run budget in milliseconds");

  // serve
  std::string config_file, serve_dir, host;
  int port = -1;
  auto *serve_cmd = app.add_subcommand("serve", "Run the HTTP service");
  serve_cmd->add_option("--config", config_file, "Service config file");
  serve_cmd->add_option("--port", port, "Listen port (overrides config)");
  serve_cmd->add_option("--host", host, "Listen address (overrides config)");
  serve_cmd->add_option("--catalog-dir", serve_dir, "Catalog directory (overrides config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kBadInput;
  }

  if (*load) {
    CatalogRegistry registry(load_dir.empty() ? default_catalog_dir() : std::filesystem::path(load_dir));
    try {
      auto loaded = resolve_catalog(registry, load_catalog_name);
      std::cout << catalog_to_json(loaded->catalog).dump(2) << "\n";
      return kOk;
    } catch (const UnknownCatalog &e) {
      std::cerr << "error: " << e.what() << "\n";
      return kUnknownCatalog;
    } catch (const std::exception &e) {
      std::cerr << "error: " << e.what() << "\n";
      return kBadInput;
    }
  }

  if (*synth_cmd) {
    Prepared p;
    if (auto rc = prepare(synth, p)) return *rc;
    p.config.record_trace = trace;
    const auto report = synthesize(*p.task, p.catalog->catalog, p.catalog->models, p.config);
    const auto body = report_to_json(report, p.catalog->catalog).dump(2) + "\n";
    std::cout << body;
    if (!persist.empty()) std::ofstream(persist) << body;
    if (report.timed_out) {
      std::cerr << "error: budget of " << synth.budget_ms << " ms exhausted\n";
      return kTimeout;
    }
    return kOk;
  }

  if (*explain_cmd) {
    Prepared p;
    if (auto rc = prepare(explain_opts, p)) return *rc;
    const auto report = synthesize(*p.task, p.catalog->catalog, p.catalog->models, p.config);
    if (query_id >= report.queries.size()) {
      std::cerr << "error: no query " << query_id << " (report has " << report.queries.size() << ")\n";
      return report.timed_out ? kTimeout : kBadInput;
    }
    try {
      const auto selected = parse_selection(constraints, list_constraints(*p.task).size());
      const auto graph = to_graph(report.queries[query_id], *p.task, p.catalog->catalog, selected);
      std::cout << render_text(graph, format == "dot" ? GraphFormat::Dot : GraphFormat::Structured);
    } catch (const std::exception &e) {
      std::cerr << "error: " << e.what() << "\n";
      return kBadInput;
    }
    return kOk;
  }

  if (*bench_cmd) {
    bench.engine.budget = std::chrono::milliseconds(bench_budget);
    const auto summary = run_bench(bench);
    std::cout << summary.table();
    return summary.mismatched.empty() ? kOk : kBadInput;
  }

  if (*serve_cmd) {
    ServiceConfig cfg;
    try {
      if (!config_file.empty()) cfg = load_service_config(config_file);
    } catch (const std::exception &e) {
      std::cerr << "error: " << e.what() << "\n";
      return kBadInput;
    }
    if (port >= 0) cfg.port = port;
    if (!host.empty()) cfg.host = host;
    if (!serve_dir.empty()) cfg.catalog_dir = serve_dir;
    try {
      return serve_until_signal(cfg);
    } catch (const std::exception &e) {
      std::cerr << "error: " << e.what() << "\n";
      return kBadInput;
    }
  }
  return kOk;
}
