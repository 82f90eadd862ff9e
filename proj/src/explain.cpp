#include "schemamap/explain.hpp"

#include <stdexcept>

#include <json.hpp>

namespace schemamap {

NodeStyle default_style(NodeKind kind) {
  switch (kind) {
  case NodeKind::Relation: return {"rectangle", "orange"};
  case NodeKind::Attribute: return {"ellipse", "green"};
  case NodeKind::Constraint: return {"box", "blue"};
  }
  return {"box", "black"};
}

std::string_view to_string(NodeKind kind) {
  switch (kind) {
  case NodeKind::Relation: return "relation";
  case NodeKind::Attribute: return "attribute";
  case NodeKind::Constraint: return "constraint";
  }
  return "?";
}

std::vector<ConstraintRef> list_constraints(const SynthesisTask &task) {
  std::vector<ConstraintRef> out;
  for (std::size_t i = 0; i < task.samples().size(); ++i)
    for (std::size_t j = 0; j < task.arity(); ++j) {
      const auto &c = task.samples()[i].cells[j];
      if (!c.empty()) out.push_back({ConstraintKind::Value, i, j, c.source.empty() ? to_string(c) : c.source});
    }
  for (std::size_t j = 0; j < task.arity(); ++j) {
    const auto &m = task.metadata()[j];
    if (!m.empty()) out.push_back({ConstraintKind::Metadata, 0, j, m.source.empty() ? to_string(m) : m.source});
  }
  return out;
}

ExplanationGraph to_graph(const CandidateQuery &q, const SynthesisTask &task, const Catalog &catalog,
                          const std::vector<std::size_t> &selected) {
  const auto constraints = list_constraints(task);
  for (auto k : selected)
    if (k >= constraints.size())
      throw std::out_of_range("constraint index " + std::to_string(k) + " out of range (task has " +
                              std::to_string(constraints.size()) + ")");

  ExplanationGraph g;
  g.sql = to_sql(q, catalog);
  for (std::size_t i = 0; i < q.tree.nodes.size(); ++i)
    g.relations.push_back({"r" + std::to_string(i), instance_name(q.tree, i, catalog)});
  for (std::size_t j = 0; j < q.projection.size(); ++j) {
    const auto &p = q.projection[j];
    g.attributes.push_back({"a" + std::to_string(j), catalog.column_name({q.tree.nodes[p.instance].relation, p.column}),
                            "r" + std::to_string(p.instance), j});
  }
  for (const auto &e : q.tree.edges) {
    const auto &je = catalog.join_edges()[e.join_edge];
    g.joins.push_back({"r" + std::to_string(e.left), "r" + std::to_string(e.right),
                       instance_name(q.tree, e.left, catalog) + "." + catalog.column_name(je.left) + " = " +
                           instance_name(q.tree, e.right, catalog) + "." + catalog.column_name(je.right)});
  }
  for (auto k : selected) {
    const auto &c = constraints[k];
    g.boxes.push_back({"c" + std::to_string(k), c.text, k, c.kind, "a" + std::to_string(c.column)});
  }
  return g;
}

namespace {

std::string dot_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out.push_back(c);
  }
  return out;
}

std::string render_dot(const ExplanationGraph &g) {
  std::string out = "graph query {\n";
  out += "  node [fontname=\"Helvetica\"];\n";
  auto node = [&](const std::string &id, const std::string &label, NodeKind kind) {
    const auto style = default_style(kind);
    out += "  " + id + " [label=\"" + dot_escape(label) + "\", shape=" + std::string(style.shape) +
           ", style=filled, fillcolor=" + std::string(style.color) + "];\n";
  };
  for (const auto &r : g.relations) node(r.id, r.label, NodeKind::Relation);
  for (const auto &a : g.attributes) node(a.id, a.label, NodeKind::Attribute);
  for (const auto &a : g.attributes) out += "  " + a.owner + " -- " + a.id + ";\n";
  for (const auto &e : g.joins) out += "  " + e.source + " -- " + e.target + " [label=\"" + dot_escape(e.label) + "\"];\n";
  for (const auto &b : g.boxes) node(b.id, b.label, NodeKind::Constraint);
  for (const auto &b : g.boxes) out += "  " + b.id + " -- " + b.attached_to + " [style=dashed];\n";
  out += "}\n";
  return out;
}

nlohmann::ordered_json styled(NodeKind kind) {
  const auto s = default_style(kind);
  return {{"kind", to_string(kind)}, {"shape", s.shape}, {"color", s.color}};
}

std::string render_structured(const ExplanationGraph &g) {
  nlohmann::ordered_json doc;
  doc["format"] = "schemamap-graph";
  doc["version"] = kGraphFormatVersion;
  doc["sql"] = g.sql;
  auto nodes = nlohmann::ordered_json::array();
  for (const auto &r : g.relations) {
    nlohmann::ordered_json n{{"id", r.id}, {"label", r.label}};
    n.update(styled(NodeKind::Relation));
    nodes.push_back(std::move(n));
  }
  for (const auto &a : g.attributes) {
    nlohmann::ordered_json n{{"id", a.id}, {"label", a.label}, {"owner", a.owner}, {"target", a.target}};
    n.update(styled(NodeKind::Attribute));
    nodes.push_back(std::move(n));
  }
  doc["nodes"] = std::move(nodes);
  auto edges = nlohmann::ordered_json::array();
  for (const auto &e : g.joins)
    edges.push_back({{"kind", "join"}, {"source", e.source}, {"target", e.target}, {"label", e.label}});
  doc["edges"] = std::move(edges);
  if (!g.boxes.empty()) {
    auto boxes = nlohmann::ordered_json::array();
    for (const auto &b : g.boxes) {
      nlohmann::ordered_json n{{"id", b.id},
                               {"label", b.label},
                               {"constraint", b.constraint},
                               {"constraint_kind", b.kind == ConstraintKind::Value ? "value" : "metadata"},
                               {"attached_to", b.attached_to}};
      n.update(styled(NodeKind::Constraint));
      boxes.push_back(std::move(n));
    }
    doc["boxes"] = std::move(boxes);
  }
  return doc.dump(2) + "\n";
}

} // namespace

std::string render_text(const ExplanationGraph &g, GraphFormat format) {
  return format == GraphFormat::Dot ? render_dot(g) : render_structured(g);
}

ExplanationGraph parse_structured(std::string_view text) {
  const auto doc = nlohmann::json::parse(text);
  if (doc.at("format") != "schemamap-graph") throw std::invalid_argument("not a schemamap graph document");
  if (doc.at("version").get<int>() != kGraphFormatVersion)
    throw std::invalid_argument("unsupported graph format version " + doc.at("version").dump());
  ExplanationGraph g;
  g.sql = doc.value("sql", "");
  for (const auto &n : doc.at("nodes")) {
    const auto kind = n.at("kind").get<std::string>();
    if (kind == "relation")
      g.relations.push_back({n.at("id"), n.at("label")});
    else if (kind == "attribute")
      g.attributes.push_back({n.at("id"), n.at("label"), n.at("owner"), n.at("target").get<std::size_t>()});
    else
      throw std::invalid_argument("unknown node kind '" + kind + "'");
  }
  for (const auto &e : doc.at("edges")) g.joins.push_back({e.at("source"), e.at("target"), e.at("label")});
  if (doc.contains("boxes"))
    for (const auto &b : doc.at("boxes"))
      g.boxes.push_back({b.at("id"), b.at("label"), b.at("constraint").get<std::size_t>(),
                         b.at("constraint_kind") == "value" ? ConstraintKind::Value : ConstraintKind::Metadata,
                         b.at("attached_to")});
  return g;
}

} // namespace schemamap
