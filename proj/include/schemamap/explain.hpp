#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "schemamap/catalog.hpp"
#include "schemamap/schema_graph.hpp"

namespace schemamap {

enum class NodeKind { Relation, Attribute, Constraint };

/// Default visual role of a node kind; the renderer owns final styling.
struct NodeStyle {
  std::string_view shape;
  std::string_view color;
};

NodeStyle default_style(NodeKind kind);
std::string_view to_string(NodeKind kind);

struct RelationNode {
  std::string id;
  std::string label;
  friend bool operator==(const RelationNode &, const RelationNode &) = default;
};

struct AttributeNode {
  std::string id;
  std::string label;
  std::string owner; // relation node id
  std::size_t target = 0;
  friend bool operator==(const AttributeNode &, const AttributeNode &) = default;
};

struct JoinEdgeView {
  std::string source;
  std::string target;
  std::string label;
  friend bool operator==(const JoinEdgeView &, const JoinEdgeView &) = default;
};

enum class ConstraintKind { Value, Metadata };

struct ConstraintBox {
  std::string id;
  std::string label;
  std::size_t constraint = 0; // index into list_constraints()
  ConstraintKind kind = ConstraintKind::Value;
  std::string attached_to; // attribute node id
  friend bool operator==(const ConstraintBox &, const ConstraintBox &) = default;
};

struct ExplanationGraph {
  std::string sql;
  std::vector<RelationNode> relations;
  std::vector<AttributeNode> attributes;
  std::vector<JoinEdgeView> joins;
  std::vector<ConstraintBox> boxes;
  friend bool operator==(const ExplanationGraph &, const ExplanationGraph &) = default;
};

/// A selectable constraint of a task: every non-Empty sample cell (row-major)
/// followed by every non-Empty metadata constraint.
struct ConstraintRef {
  ConstraintKind kind = ConstraintKind::Value;
  std::size_t row = 0; // sample row; unused for metadata
  std::size_t column = 0;
  std::string text;
};

std::vector<ConstraintRef> list_constraints(const SynthesisTask &task);

/// Builds the explanation graph of q. Only the selected constraints (indices
/// into list_constraints) produce boxes; each box attaches to the attribute
/// node of the source column the query projects for that target column.
/// Throws std::out_of_range for an unknown constraint index.
ExplanationGraph to_graph(const CandidateQuery &q, const SynthesisTask &task, const Catalog &catalog,
                          const std::vector<std::size_t> &selected);

enum class GraphFormat { Dot, Structured };

std::string render_text(const ExplanationGraph &g, GraphFormat format);
/// Inverse of render_text(g, GraphFormat::Structured).
ExplanationGraph parse_structured(std::string_view text);

inline constexpr int kGraphFormatVersion = 1;

} // namespace schemamap
