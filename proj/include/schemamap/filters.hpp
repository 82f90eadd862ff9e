#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "schemamap/schema_graph.hpp"

namespace schemamap {

/// A connected subtree of one or more candidates' join trees together with
/// the target columns whose source columns lie inside it. Validating a
/// filter is a cheap partial check of every candidate containing it.
struct Filter {
  std::size_t id = 0;
  JoinTree subtree;
  /// Non-empty; instances refer to subtree nodes.
  std::vector<TargetProjection> induced;
  std::string key;
  /// Candidates (indices into the decomposed batch) containing this filter.
  std::vector<std::size_t> parent_candidates;
  /// Candidates for which this filter is the full tree.
  std::vector<std::size_t> maximal_for;
  /// Filters one node larger that contain this one (child -> parent edges).
  std::vector<std::size_t> parents;
  std::vector<std::size_t> children;

  std::size_t edge_count() const { return subtree.edges.size(); }
};

struct FilterDAG {
  std::vector<Filter> filters;
  /// Full-tree filter id per candidate.
  std::vector<std::size_t> maximal;
  std::size_t candidate_count() const { return maximal.size(); }
};

/// Every connected subtree with at least one projected column, for every
/// candidate, merged by canonical key. Ids are assigned in first-seen order.
FilterDAG decompose_filters(const std::vector<CandidateQuery> &candidates);

enum class FilterStatus { Unknown, InFlight, Passed, Failed };
enum class CandidateStatus { Open, Pruned, Accepted };

/// Mutable validation bookkeeping over an immutable DAG.
class DagState {
public:
  explicit DagState(const FilterDAG &dag);

  FilterStatus status(std::size_t filter) const { return filters_[filter]; }
  CandidateStatus candidate(std::size_t c) const { return candidates_[c]; }
  void set_in_flight(std::size_t filter) { filters_[filter] = FilterStatus::InFlight; }

  /// Not yet resolved and still relevant to an open candidate.
  bool live(std::size_t filter) const;
  std::vector<std::size_t> live_filters() const;
  /// Open candidates eliminated if this filter fails.
  std::size_t pruned_count(std::size_t filter) const;

  /// Marks the filter and every transitive parent failed; prunes every
  /// candidate containing it.
  void apply_fail(std::size_t filter);
  /// Marks the filter and every transitive child passed; accepts candidates
  /// whose full-tree filter passed.
  void apply_pass(std::size_t filter);

  bool all_resolved() const;
  std::size_t open_candidates() const;

private:
  const FilterDAG &dag_;
  std::vector<FilterStatus> filters_;
  std::vector<CandidateStatus> candidates_;
};

} // namespace schemamap
