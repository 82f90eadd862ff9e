#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "schemamap/catalog.hpp"
#include "schemamap/engine.hpp"
#include "schemamap/wire.hpp"

namespace schemamap {

/// Small random catalog: 2..max_relations relations of 2-3 columns and 4-8
/// rows over small value domains, with random join edges (occasionally a
/// self-join) on the integer key columns.
Catalog make_micro_catalog(std::uint64_t seed, std::size_t max_relations = 4);

/// Wide catalog with thousands of rows per relation and a dense join graph;
/// synthesis over it cannot finish in a sub-second budget.
Catalog make_oversized_catalog(std::uint64_t seed);

struct Workload {
  TaskDocument task;
  /// The query the sample rows were drawn from; always satisfies the task.
  CandidateQuery truth;
};

/// Draws a random PJ query over the catalog, samples 1-2 of its result rows
/// and blurs each cell into an exact value, a disjunction with a decoy, a
/// numeric range or nothing; adds occasional metadata constraints.
std::optional<Workload> make_workload(const Catalog &catalog, std::uint64_t seed, std::size_t max_edges = 2);

struct BenchRun {
  std::uint64_t seed = 0;
  SchedulePolicy policy = SchedulePolicy::Bayes;
  std::size_t validations = 0;
  std::size_t queries = 0;
  std::chrono::microseconds elapsed{0};
};

struct BenchSummary {
  std::vector<BenchRun> runs;
  /// Seeds whose final query sets differed across policies.
  std::vector<std::uint64_t> mismatched;

  std::vector<std::size_t> validations(SchedulePolicy policy) const;
  double median_validations(SchedulePolicy policy) const;
  std::chrono::microseconds total_time(SchedulePolicy policy) const;
  /// Fraction of workloads where `a` needed strictly fewer validations than `b`.
  double strictly_better_fraction(SchedulePolicy a, SchedulePolicy b) const;
  std::string table() const;
};

struct BenchOptions {
  std::uint64_t first_seed = 1;
  std::size_t seeds = 50;
  EngineConfig engine;
};

/// Runs every policy on `seeds` generated workloads (one micro catalog per
/// seed) and records filter validations per run.
BenchSummary run_bench(const BenchOptions &options);

double median(std::vector<std::size_t> values);

} // namespace schemamap
