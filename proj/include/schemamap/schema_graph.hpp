#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "schemamap/catalog.hpp"

namespace schemamap {

/// One occurrence of a relation in a join tree. alias distinguishes repeated
/// occurrences of the same relation (0 for the first).
struct RelationInstance {
  std::size_t relation = 0;
  std::size_t alias = 0;
  friend bool operator==(const RelationInstance &, const RelationInstance &) = default;
};

/// Tree edge realising catalog join edge `join_edge`; `left` is the instance
/// holding the edge's left column, `right` the one holding its right column.
struct TreeEdge {
  std::size_t join_edge = 0;
  std::size_t left = 0;
  std::size_t right = 0;
  friend bool operator==(const TreeEdge &, const TreeEdge &) = default;
};

struct JoinTree {
  std::vector<RelationInstance> nodes;
  std::vector<TreeEdge> edges;

  std::size_t degree(std::size_t node) const;
  /// Connected, |edges| = |nodes| - 1, endpoints in range and matching the
  /// join edge's relations.
  bool is_valid(const std::vector<JoinEdge> &join_edges) const;
  friend bool operator==(const JoinTree &, const JoinTree &) = default;
};

struct ProjectedColumn {
  std::size_t instance = 0;
  std::size_t column = 0;
  friend bool operator==(const ProjectedColumn &, const ProjectedColumn &) = default;
};

/// A PJ query: join tree plus one projected column per target column.
struct CandidateQuery {
  JoinTree tree;
  std::vector<ProjectedColumn> projection;
  /// Canonical form; equal iff the queries are identical up to alias renaming.
  std::string key;
};

/// Projection entry tagged with the target column it feeds.
struct TargetProjection {
  std::size_t target = 0;
  std::size_t instance = 0;
  std::size_t column = 0;
};

struct CanonicalForm {
  JoinTree tree; // nodes renumbered in canonical order, aliases reassigned
  std::vector<TargetProjection> projection;
  std::string key;
};

/// Canonicalizes a (tree, projection) pair under alias renaming.
CanonicalForm canonicalize(const JoinTree &tree, const std::vector<TargetProjection> &projection);
CandidateQuery make_candidate(const JoinTree &tree, const std::vector<ProjectedColumn> &projection);

class SchemaGraph {
public:
  /// One endpoint of a join edge touching a relation; `left_side` tells
  /// which end of the edge the relation sits on. Self-join edges appear
  /// twice per relation, once per side.
  struct Incidence {
    std::size_t join_edge;
    bool left_side;
  };

  explicit SchemaGraph(const Catalog &catalog);

  std::size_t node_count() const { return incidence_.size(); }
  const std::vector<JoinEdge> &edges() const { return edges_; }
  const std::vector<Incidence> &incident(std::size_t relation) const { return incidence_.at(relation); }

private:
  std::vector<JoinEdge> edges_;
  std::vector<std::vector<Incidence>> incidence_;
};

SchemaGraph build_schema_graph(const Catalog &catalog);

struct EnumerationLimits {
  std::size_t max_edges = 4;
  std::size_t max_instances_per_relation = 2;
};

/// Per target column, the source columns that may feed it.
using RelatedColumns = std::vector<std::vector<ColumnRef>>;

/// Lazily yields every candidate whose projection takes one related column
/// per target column, whose tree has at most max_edges edges, and whose
/// leaves all host a projected column. Trees are produced in order of edge
/// count; output order is deterministic and free of duplicates.
class CandidateEnumerator {
public:
  CandidateEnumerator(const SchemaGraph &graph, RelatedColumns related, EnumerationLimits limits = {});

  std::optional<CandidateQuery> next();
  std::size_t trees_visited() const { return trees_visited_; }

private:
  bool advance_tree();
  void grow_level();
  bool start_tree(const JoinTree &tree);
  bool step_odometer();

  const SchemaGraph &graph_;
  RelatedColumns related_;
  EnumerationLimits limits_;
  std::vector<bool> relation_hosts_;

  std::vector<JoinTree> level_;
  std::size_t level_edges_ = 0;
  std::size_t level_pos_ = 0;
  bool exhausted_ = false;

  // Assignment odometer over the current tree.
  std::optional<JoinTree> tree_;
  std::vector<std::vector<ProjectedColumn>> options_;
  std::vector<std::size_t> digits_;
  bool odometer_live_ = false;
  std::set<std::string> emitted_;
  std::size_t trees_visited_ = 0;
};

std::vector<CandidateQuery> enumerate_candidates(const SchemaGraph &graph, const RelatedColumns &related,
                                                 EnumerationLimits limits = {});

/// Plain-text SQL for a candidate, aliasing repeated relations as name_N.
std::string to_sql(const CandidateQuery &q, const Catalog &catalog);
std::string instance_name(const JoinTree &tree, std::size_t instance, const Catalog &catalog);

} // namespace schemamap
