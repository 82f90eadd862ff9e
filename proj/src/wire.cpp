#include "schemamap/wire.hpp"

namespace schemamap {

SynthesisTask TaskDocument::to_task() const { return SynthesisTask::parse(arity, rows, metadata); }

TaskDocument parse_task_document(const nlohmann::json &doc) {
  try {
    if (!doc.is_object()) throw WireError("task document must be an object");
    if (doc.contains("version") && doc.at("version").get<int>() != kWireVersion)
      throw WireError("unsupported task document version " + doc.at("version").dump());
    const auto &cfg = doc.contains("config") ? doc.at("config") : doc;
    TaskDocument t;
    t.catalog = cfg.value("catalog", std::string());
    if (!cfg.contains("arity")) throw WireError("task document lacks arity");
    const auto arity = cfg.at("arity").get<long long>();
    if (arity < 1) throw WireError("arity must be at least 1");
    t.arity = static_cast<std::size_t>(arity);
    if (doc.contains("rows")) t.rows = doc.at("rows").get<std::vector<std::vector<std::string>>>();
    if (cfg.contains("samples") && cfg.at("samples").get<std::size_t>() != t.rows.size())
      throw WireError("config declares " + cfg.at("samples").dump() + " sample rows but " +
                      std::to_string(t.rows.size()) + " are given");
    const bool with_metadata = cfg.value("metadata", true);
    if (with_metadata && doc.contains("metadata")) t.metadata = doc.at("metadata").get<std::vector<std::string>>();
    if (t.metadata.empty()) t.metadata.assign(t.arity, "");
    return t;
  } catch (const nlohmann::json::exception &e) {
    throw WireError(std::string("malformed task document: ") + e.what());
  }
}

TaskDocument parse_task_text(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception &e) {
    throw WireError(std::string("task document is not valid JSON: ") + e.what());
  }
  return parse_task_document(doc);
}

nlohmann::ordered_json to_json(const TaskDocument &doc) {
  nlohmann::ordered_json out;
  out["version"] = kWireVersion;
  out["config"] = {{"catalog", doc.catalog}, {"arity", doc.arity}, {"samples", doc.rows.size()}, {"metadata", true}};
  out["rows"] = doc.rows;
  out["metadata"] = doc.metadata;
  return out;
}

MatchMode parse_match_mode(std::string_view name) {
  if (name == "cell") return MatchMode::Cell;
  if (name == "token") return MatchMode::Token;
  throw WireError("unknown match mode '" + std::string(name) + "' (expected cell or token)");
}

void apply_options(EngineConfig &config, const nlohmann::json &options) {
  if (options.is_null()) return;
  try {
    if (options.contains("policy")) {
      auto p = parse_policy(options.at("policy").get<std::string>());
      if (!p) throw WireError("unknown policy " + options.at("policy").dump());
      config.policy = *p;
    }
    if (options.contains("budget_ms")) config.budget = std::chrono::milliseconds(options.at("budget_ms").get<long long>());
    if (options.contains("max_edges")) config.limits.max_edges = options.at("max_edges").get<std::size_t>();
    if (options.contains("seed")) config.seed = options.at("seed").get<std::uint64_t>();
    if (options.contains("match_mode")) config.match.mode = parse_match_mode(options.at("match_mode").get<std::string>());
    if (options.contains("case_sensitive")) config.match.case_sensitive = options.at("case_sensitive").get<bool>();
    if (options.contains("workers")) config.workers = options.at("workers").get<std::size_t>();
    if (options.contains("batch_size")) config.batch_size = options.at("batch_size").get<std::size_t>();
  } catch (const nlohmann::json::exception &e) {
    throw WireError(std::string("malformed options: ") + e.what());
  }
}

nlohmann::ordered_json query_to_json(const CandidateQuery &q, std::size_t id, const Catalog &catalog) {
  nlohmann::ordered_json out;
  out["id"] = id;
  out["sql"] = to_sql(q, catalog);
  auto relations = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < q.tree.nodes.size(); ++i)
    relations.push_back({{"instance", instance_name(q.tree, i, catalog)},
                         {"relation", catalog.relation(q.tree.nodes[i].relation).name}});
  out["relations"] = std::move(relations);
  auto projection = nlohmann::ordered_json::array();
  for (const auto &p : q.projection)
    projection.push_back(instance_name(q.tree, p.instance, catalog) + "." +
                         catalog.column_name({q.tree.nodes[p.instance].relation, p.column}));
  out["projection"] = std::move(projection);
  auto joins = nlohmann::ordered_json::array();
  for (const auto &e : q.tree.edges) {
    const auto &je = catalog.join_edges()[e.join_edge];
    joins.push_back({{"left", instance_name(q.tree, e.left, catalog) + "." + catalog.column_name(je.left)},
                     {"right", instance_name(q.tree, e.right, catalog) + "." + catalog.column_name(je.right)}});
  }
  out["joins"] = std::move(joins);
  return out;
}

nlohmann::ordered_json report_to_json(const SynthesisReport &report, const Catalog &catalog, bool with_timing) {
  nlohmann::ordered_json out;
  out["version"] = kWireVersion;
  out["catalog"] = catalog.name();
  out["timed_out"] = report.timed_out;
  out["candidates"] = report.candidates;
  out["filters_generated"] = report.filters_generated;
  out["filters_validated"] = report.filters_validated;
  out["filters_pruned"] = report.filters_pruned;
  out["filters_inferred"] = report.filters_inferred;
  out["candidates_pruned"] = report.pruned.size();
  if (with_timing) out["elapsed_ms"] = report.elapsed.count();
  auto queries = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < report.queries.size(); ++k) queries.push_back(query_to_json(report.queries[k], k, catalog));
  out["queries"] = std::move(queries);
  if (!report.trace.empty()) {
    auto trace = nlohmann::ordered_json::array();
    for (const auto &t : report.trace)
      trace.push_back({{"filter", t.filter_key},
                       {"edges", t.edges},
                       {"fail_prob", t.score.fail_prob},
                       {"cost", t.score.cost},
                       {"pruned_count", t.score.pruned_count},
                       {"priority", t.score.priority},
                       {"passed", t.passed}});
    out["trace"] = std::move(trace);
  }
  return out;
}

} // namespace schemamap
