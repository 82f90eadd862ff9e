#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "schemamap/catalog.hpp"
#include "schemamap/engine.hpp"

namespace schemamap {

inline constexpr int kWireVersion = 1;

/// Task document, mirroring the three UI sections:
///   {"version": 1,
///    "config": {"catalog": "mondial-mini", "arity": 3, "samples": 1, "metadata": true},
///    "rows": [["California || Nevada", "Lake Tahoe", ""]],
///    "metadata": ["", "", "DataType=='decimal' AND MinValue>='0'"]}
/// "samples" must equal the number of rows; "metadata" may be omitted (or
/// config.metadata false), meaning no metadata constraints.
struct TaskDocument {
  std::string catalog;
  std::size_t arity = 0;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> metadata;

  SynthesisTask to_task() const;
};

class WireError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

TaskDocument parse_task_document(const nlohmann::json &doc);
TaskDocument parse_task_text(std::string_view text);
nlohmann::ordered_json to_json(const TaskDocument &doc);

/// Applies {"policy", "budget_ms", "max_edges", "seed", "match_mode",
/// "case_sensitive", "workers", "batch_size"} overrides.
void apply_options(EngineConfig &config, const nlohmann::json &options);
MatchMode parse_match_mode(std::string_view name);

nlohmann::ordered_json query_to_json(const CandidateQuery &q, std::size_t id, const Catalog &catalog);
/// Report body. Timing is included only when with_timing is set so that the
/// rest of the body is reproducible across runs.
nlohmann::ordered_json report_to_json(const SynthesisReport &report, const Catalog &catalog, bool with_timing = true);

} // namespace schemamap
