#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string_view>
#include <tuple>
#include <vector>

#include "schemamap/catalog.hpp"
#include "schemamap/filters.hpp"

namespace schemamap {

/// Value distribution of one column, taken from its top-K frequencies.
struct ColumnModel {
  std::vector<std::pair<Cell, std::size_t>> values;
  std::size_t row_count = 0;
  std::size_t distinct_count = 0;
  std::size_t untracked_count = 0;
  std::size_t untracked_distinct = 0;

  /// Probability that a random cell satisfies expr. Tracked values count
  /// exactly; untracked mass is assumed to match at the tracked rate; zero
  /// estimated matches fall back to the Laplace (alpha = 1) unseen-value mass
  /// 1 / (N + D + 1).
  double match_probability(const ValueExpr &expr, const MatchOptions &opts = {}) const;
  /// match_probability scaled to rows: row_count * match_probability, but
  /// exact when only tracked values match.
  double expected_count(const ValueExpr &expr, const MatchOptions &opts = {}) const;
  /// Exact number of tracked rows satisfying expr.
  std::size_t tracked_matches(const ValueExpr &expr, const MatchOptions &opts = {}) const;
};

struct RelationModel {
  std::size_t row_count = 0;
  std::vector<ColumnModel> columns;
};

/// Fraction of (left row, right row) pairs satisfying a join edge.
struct JoinIndicator {
  std::size_t edge = 0;
  std::uint64_t matching_pairs = 0;
  double match_rate = 0;
};

struct Models {
  std::vector<RelationModel> relations;
  std::vector<JoinIndicator> joins;
};

Models train_models(const Catalog &catalog);

/// Key used by equi-joins: empty for empty cells (which never join),
/// canonical number for numeric cells, trimmed text otherwise.
std::string join_key(const Cell &cell);

inline constexpr double kMinProbability = 1e-6;
inline constexpr double kMaxProbability = 1 - 1e-6;

enum class SchedulePolicy { Baseline, Bayes, Random };

std::string_view to_string(SchedulePolicy policy);
std::optional<SchedulePolicy> parse_policy(std::string_view name);

struct FilterScore {
  double fail_prob = 0;
  double cost = 1;
  std::size_t pruned_count = 0;
  double priority = 0;
};

/// Scores filters for one synthesis task. Per-column match probabilities are
/// cached, so one instance serves a whole run.
class Estimator {
public:
  Estimator(const Models &models, const SynthesisTask &task, MatchOptions opts = {});

  /// Expected number of result tuples of f matching sample row `row`:
  /// (product of per-column match probabilities) x (product of edge match
  /// rates) x (product of relation sizes).
  double expected_matches(const Filter &f, std::size_t row) const;
  /// 1 - prod_rows (1 - exp(-N_exp)), clamped to [1e-6, 1 - 1e-6]; 0 when
  /// the filter carries no value constraint at all.
  double fail_prob(const Filter &f) const;
  /// Sum of relation sizes plus estimated output size of every edge.
  double cost(const Filter &f) const;

  const Models &models() const { return models_; }

private:
  double column_probability(ColumnRef col, std::size_t row, std::size_t target) const;
  double column_count(ColumnRef col, std::size_t row, std::size_t target) const;

  const Models &models_;
  const SynthesisTask &task_;
  MatchOptions opts_;
  mutable std::map<std::tuple<std::size_t, std::size_t, std::size_t, std::size_t>, double> cache_;
  mutable std::map<std::tuple<std::size_t, std::size_t, std::size_t, std::size_t>, double> count_cache_;
};

double estimate_fail_prob(const Filter &f, const SynthesisTask &task, const Models &models,
                          const MatchOptions &opts = {});
double estimate_cost(const Filter &f, const Models &models);

/// Baseline failure probability: proportional to the filter's edge count.
double baseline_fail_prob(const Filter &f, std::size_t max_edges);

inline double priority(double fail_prob, std::size_t pruned_count, double cost) {
  return fail_prob * static_cast<double>(pruned_count) / cost;
}

/// Picks the next filter to validate. Static scores are computed once per
/// DAG; pruned counts are re-read from the DagState on every call.
class Scheduler {
public:
  Scheduler(SchedulePolicy policy, std::uint64_t seed, std::size_t max_edges);

  /// Computes static scores for a fresh DAG. cost_scale multiplies every
  /// cost (used to check that the bayes order is scale-invariant).
  void prepare(const FilterDAG &dag, const Estimator &estimator, double cost_scale = 1.0);
  std::optional<std::size_t> next_filter(const FilterDAG &dag, const DagState &state);
  FilterScore score(std::size_t filter, const DagState &state) const;

  SchedulePolicy policy() const { return policy_; }

private:
  SchedulePolicy policy_;
  std::mt19937_64 rng_;
  std::size_t max_edges_;
  std::vector<double> fail_;
  std::vector<double> cost_;
  const FilterDAG *dag_ = nullptr;
};

} // namespace schemamap
