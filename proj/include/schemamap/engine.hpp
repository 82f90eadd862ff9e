#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <vector>

#include "schemamap/catalog.hpp"
#include "schemamap/estimator.hpp"
#include "schemamap/filters.hpp"
#include "schemamap/schema_graph.hpp"

namespace schemamap {

struct EngineConfig {
  MatchOptions match;
  EnumerationLimits limits;
  std::chrono::milliseconds budget{60'000};
  SchedulePolicy policy = SchedulePolicy::Bayes;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  std::size_t batch_size = 256;
  bool record_trace = false;
  /// Scales every filter cost the scheduler sees.
  double cost_scale = 1.0;
};

/// Per target column, the source columns whose stats satisfy the column's
/// metadata constraint and which may hold a matching cell for every sample
/// row. Equality leaves go through the inverted index, ordering leaves
/// through numeric range overlap; the result may over-approximate but never
/// misses a column. An empty entry means the target column cannot be fed.
RelatedColumns related_columns(const Catalog &catalog, const SynthesisTask &task, const MatchOptions &opts = {});

/// Projected rows; each cell points into the catalog.
struct ResultTable {
  std::size_t width = 0;
  std::vector<std::vector<const Cell *>> rows;
};

/// Hash-joins the tree's relations along its edges (breadth-first from node
/// 0) and projects. Duplicates are kept; row order is deterministic.
ResultTable execute_pj(const JoinTree &tree, const std::vector<ProjectedColumn> &projection, const Catalog &catalog);

/// True iff, for every sample row, some result tuple satisfies that row's
/// value constraints on the filter's induced columns.
bool validate_filter(const Filter &f, const Catalog &catalog, const SynthesisTask &task, const MatchOptions &opts = {});

/// Full end-to-end check of a query: every sample row has a matching result
/// tuple and every projected column satisfies its metadata constraint.
bool verify_query(const CandidateQuery &q, const SynthesisTask &task, const Catalog &catalog,
                  const MatchOptions &opts = {});

struct TraceEntry {
  std::string filter_key;
  std::size_t edges = 0;
  FilterScore score;
  bool passed = false;
};

struct SynthesisReport {
  std::vector<CandidateQuery> queries;
  /// Candidates eliminated by a failed filter.
  std::vector<CandidateQuery> pruned;
  std::size_t candidates = 0;
  std::size_t filters_generated = 0;
  std::size_t filters_validated = 0;
  /// Filters resolved as failed without being validated.
  std::size_t filters_pruned = 0;
  /// Filters resolved as passed because a containing filter passed.
  std::size_t filters_inferred = 0;
  /// Accepted candidates rejected by end-to-end re-verification. Non-zero
  /// indicates a bug in the filter machinery.
  std::size_t verification_failures = 0;
  std::chrono::milliseconds elapsed{0};
  bool timed_out = false;
  std::vector<TraceEntry> trace;
};

/// related_columns -> enumerate_candidates -> decompose_filters -> scheduled
/// validation with pruning -> re-verification, under config.budget.
SynthesisReport synthesize(const SynthesisTask &task, const Catalog &catalog, const Models &models,
                           const EngineConfig &config = {});
SynthesisReport synthesize(const SynthesisTask &task, const Catalog &catalog, const EngineConfig &config = {});

} // namespace schemamap
