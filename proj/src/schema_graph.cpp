#include "schemamap/schema_graph.hpp"

#include <algorithm>
#include <functional>
#include <map>

namespace schemamap {

std::size_t JoinTree::degree(std::size_t node) const {
  return static_cast<std::size_t>(
      std::count_if(edges.begin(), edges.end(), [&](const TreeEdge &e) { return e.left == node || e.right == node; }));
}

bool JoinTree::is_valid(const std::vector<JoinEdge> &join_edges) const {
  if (nodes.empty() || edges.size() + 1 != nodes.size()) return false;
  std::vector<std::size_t> parent(nodes.size());
  for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = i;
  std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
    return parent[x] == x ? x : parent[x] = find(parent[x]);
  };
  for (const auto &e : edges) {
    if (e.left >= nodes.size() || e.right >= nodes.size() || e.left == e.right) return false;
    if (e.join_edge >= join_edges.size()) return false;
    const auto &je = join_edges[e.join_edge];
    if (nodes[e.left].relation != je.left.relation || nodes[e.right].relation != je.right.relation) return false;
    const auto a = find(e.left), b = find(e.right);
    if (a == b) return false; // cycle
    parent[a] = b;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Canonical form

namespace {

struct Adjacent {
  std::size_t edge; // index into tree.edges
  std::size_t neighbor;
  bool self_is_left;
};

class Canonicalizer {
public:
  Canonicalizer(const JoinTree &tree, const std::vector<TargetProjection> &projection)
      : tree_(tree), adj_(tree.nodes.size()), labels_(tree.nodes.size()) {
    for (std::size_t i = 0; i < tree.edges.size(); ++i) {
      const auto &e = tree.edges[i];
      adj_[e.left].push_back({i, e.right, true});
      adj_[e.right].push_back({i, e.left, false});
    }
    std::vector<std::vector<std::string>> tags(tree.nodes.size());
    for (const auto &p : projection)
      tags.at(p.instance).push_back(std::to_string(p.target) + ":" + std::to_string(p.column));
    for (std::size_t v = 0; v < tree.nodes.size(); ++v) {
      std::sort(tags[v].begin(), tags[v].end());
      std::string label = "R" + std::to_string(tree.nodes[v].relation) + "{";
      for (const auto &t : tags[v]) label += t + ";";
      labels_[v] = label + "}";
    }
  }

  std::string encode(std::size_t v, std::size_t from_edge) const {
    auto children = child_codes(v, from_edge);
    std::string out = labels_[v] + "(";
    for (std::size_t i = 0; i < children.size(); ++i) {
      if (i) out += ",";
      out += children[i].first;
    }
    return out + ")";
  }

  /// Sorted (code, adjacency) pairs of v's children when entered via from_edge.
  std::vector<std::pair<std::string, Adjacent>> child_codes(std::size_t v, std::size_t from_edge) const {
    std::vector<std::pair<std::string, Adjacent>> out;
    for (const auto &a : adj_[v]) {
      if (a.edge == from_edge) continue;
      const auto &e = tree_.edges[a.edge];
      std::string code = "e" + std::to_string(e.join_edge) + (a.self_is_left ? ">" : "<") + encode(a.neighbor, a.edge);
      out.emplace_back(std::move(code), a);
    }
    std::sort(out.begin(), out.end(), [](const auto &x, const auto &y) { return x.first < y.first; });
    return out;
  }

  void order_from(std::size_t v, std::size_t from_edge, std::vector<std::size_t> &order) const {
    order.push_back(v);
    for (const auto &[code, a] : child_codes(v, from_edge)) order_from(a.neighbor, a.edge, order);
  }

private:
  const JoinTree &tree_;
  std::vector<std::vector<Adjacent>> adj_;
  std::vector<std::string> labels_;
};

constexpr std::size_t kNone = static_cast<std::size_t>(-1);

} // namespace

CanonicalForm canonicalize(const JoinTree &tree, const std::vector<TargetProjection> &projection) {
  Canonicalizer canon(tree, projection);
  CanonicalForm out;
  std::size_t best_root = 0;
  for (std::size_t r = 0; r < tree.nodes.size(); ++r) {
    auto code = canon.encode(r, kNone);
    if (r == 0 || code < out.key) {
      out.key = std::move(code);
      best_root = r;
    }
  }
  std::vector<std::size_t> order;
  canon.order_from(best_root, kNone, order);
  std::vector<std::size_t> remap(tree.nodes.size());
  for (std::size_t i = 0; i < order.size(); ++i) remap[order[i]] = i;

  std::map<std::size_t, std::size_t> alias_count;
  for (std::size_t old : order) {
    const auto rel = tree.nodes[old].relation;
    out.tree.nodes.push_back({rel, alias_count[rel]++});
  }
  for (const auto &e : tree.edges) out.tree.edges.push_back({e.join_edge, remap[e.left], remap[e.right]});
  std::sort(out.tree.edges.begin(), out.tree.edges.end(), [](const TreeEdge &a, const TreeEdge &b) {
    return std::max(a.left, a.right) < std::max(b.left, b.right);
  });
  for (const auto &p : projection) out.projection.push_back({p.target, remap[p.instance], p.column});
  std::sort(out.projection.begin(), out.projection.end(),
            [](const auto &a, const auto &b) { return a.target < b.target; });
  return out;
}

CandidateQuery make_candidate(const JoinTree &tree, const std::vector<ProjectedColumn> &projection) {
  std::vector<TargetProjection> tagged;
  for (std::size_t j = 0; j < projection.size(); ++j)
    tagged.push_back({j, projection[j].instance, projection[j].column});
  auto canon = canonicalize(tree, tagged);
  CandidateQuery q;
  q.tree = std::move(canon.tree);
  for (const auto &p : canon.projection) q.projection.push_back({p.instance, p.column});
  q.key = std::move(canon.key);
  return q;
}

// ---------------------------------------------------------------------------

SchemaGraph::SchemaGraph(const Catalog &catalog)
    : edges_(catalog.join_edges()), incidence_(catalog.relations().size()) {
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    incidence_[edges_[i].left.relation].push_back({i, true});
    incidence_[edges_[i].right.relation].push_back({i, false});
  }
}

SchemaGraph build_schema_graph(const Catalog &catalog) { return SchemaGraph(catalog); }

// ---------------------------------------------------------------------------

namespace {

std::size_t leaf_count(const JoinTree &t) {
  if (t.nodes.size() == 1) return 1;
  std::size_t n = 0;
  for (std::size_t v = 0; v < t.nodes.size(); ++v) n += t.degree(v) == 1;
  return n;
}

} // namespace

CandidateEnumerator::CandidateEnumerator(const SchemaGraph &graph, RelatedColumns related, EnumerationLimits limits)
    : graph_(graph), related_(std::move(related)), limits_(limits), relation_hosts_(graph.node_count(), false) {
  for (auto &cols : related_) {
    std::sort(cols.begin(), cols.end());
    cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
    for (const auto &c : cols) relation_hosts_.at(c.relation) = true;
  }
  const bool any_empty = std::any_of(related_.begin(), related_.end(), [](const auto &c) { return c.empty(); });
  if (related_.empty() || any_empty) {
    exhausted_ = true;
    return;
  }
  for (std::size_t r = 0; r < graph.node_count(); ++r) level_.push_back(JoinTree{{{r, 0}}, {}});
}

void CandidateEnumerator::grow_level() {
  std::vector<JoinTree> next;
  std::set<std::string> seen;
  const auto &edges = graph_.edges();
  for (const auto &t : level_) {
    for (std::size_t v = 0; v < t.nodes.size(); ++v) {
      for (const auto &inc : graph_.incident(t.nodes[v].relation)) {
        const auto &je = edges[inc.join_edge];
        const std::size_t other = inc.left_side ? je.right.relation : je.left.relation;
        const auto copies = static_cast<std::size_t>(std::count_if(
            t.nodes.begin(), t.nodes.end(), [&](const RelationInstance &n) { return n.relation == other; }));
        if (copies >= limits_.max_instances_per_relation) continue;
        JoinTree grown = t;
        const std::size_t n = grown.nodes.size();
        grown.nodes.push_back({other, copies});
        grown.edges.push_back(inc.left_side ? TreeEdge{inc.join_edge, v, n} : TreeEdge{inc.join_edge, n, v});
        // Leaf count never shrinks as a tree grows, and each leaf needs its
        // own projected column.
        if (leaf_count(grown) > related_.size()) continue;
        auto canon = canonicalize(grown, {});
        if (seen.insert(canon.key).second) next.push_back(std::move(canon.tree));
      }
    }
  }
  level_ = std::move(next);
  level_pos_ = 0;
  ++level_edges_;
}

bool CandidateEnumerator::start_tree(const JoinTree &tree) {
  ++trees_visited_;
  const bool single = tree.nodes.size() == 1;
  for (std::size_t v = 0; v < tree.nodes.size(); ++v)
    if ((single || tree.degree(v) == 1) && !relation_hosts_[tree.nodes[v].relation]) return false;

  options_.assign(related_.size(), {});
  for (std::size_t j = 0; j < related_.size(); ++j) {
    for (std::size_t i = 0; i < tree.nodes.size(); ++i)
      for (const auto &c : related_[j])
        if (c.relation == tree.nodes[i].relation) options_[j].push_back({i, c.column});
    if (options_[j].empty()) return false;
  }
  tree_ = tree;
  digits_.assign(related_.size(), 0);
  emitted_.clear();
  return true;
}

bool CandidateEnumerator::step_odometer() {
  for (std::size_t j = digits_.size(); j-- > 0;) {
    if (++digits_[j] < options_[j].size()) return true;
    digits_[j] = 0;
  }
  return false;
}

bool CandidateEnumerator::advance_tree() {
  while (!exhausted_) {
    if (level_pos_ < level_.size()) {
      const JoinTree &t = level_[level_pos_++];
      if (start_tree(t)) return true;
      continue;
    }
    if (level_edges_ >= limits_.max_edges) {
      exhausted_ = true;
      break;
    }
    grow_level();
    if (level_.empty()) exhausted_ = true;
  }
  return false;
}

std::optional<CandidateQuery> CandidateEnumerator::next() {
  while (true) {
    if (!odometer_live_) {
      if (!advance_tree()) return std::nullopt;
      odometer_live_ = true;
    }
    std::vector<ProjectedColumn> projection;
    for (std::size_t j = 0; j < digits_.size(); ++j) projection.push_back(options_[j][digits_[j]]);
    odometer_live_ = step_odometer();

    const auto &t = *tree_;
    if (t.nodes.size() > 1) {
      bool covered = true;
      for (std::size_t v = 0; v < t.nodes.size() && covered; ++v)
        if (t.degree(v) == 1)
          covered = std::any_of(projection.begin(), projection.end(), [&](const auto &p) { return p.instance == v; });
      if (!covered) continue;
    }
    auto q = make_candidate(t, projection);
    if (emitted_.insert(q.key).second) return q;
  }
}

std::vector<CandidateQuery> enumerate_candidates(const SchemaGraph &graph, const RelatedColumns &related,
                                                 EnumerationLimits limits) {
  CandidateEnumerator it(graph, related, limits);
  std::vector<CandidateQuery> out;
  while (auto q = it.next()) out.push_back(std::move(*q));
  return out;
}

// ---------------------------------------------------------------------------

std::string instance_name(const JoinTree &tree, std::size_t instance, const Catalog &catalog) {
  const auto &n = tree.nodes.at(instance);
  std::string name = catalog.relation(n.relation).name;
  return n.alias == 0 ? name : name + "_" + std::to_string(n.alias);
}

std::string to_sql(const CandidateQuery &q, const Catalog &catalog) {
  std::string sql = "SELECT ";
  for (std::size_t j = 0; j < q.projection.size(); ++j) {
    const auto &p = q.projection[j];
    if (j) sql += ", ";
    sql += instance_name(q.tree, p.instance, catalog) + "." +
           catalog.column_name({q.tree.nodes[p.instance].relation, p.column});
  }
  sql += " FROM ";
  for (std::size_t i = 0; i < q.tree.nodes.size(); ++i) {
    if (i) sql += ", ";
    const auto &n = q.tree.nodes[i];
    sql += catalog.relation(n.relation).name;
    if (n.alias) sql += " AS " + instance_name(q.tree, i, catalog);
  }
  for (std::size_t k = 0; k < q.tree.edges.size(); ++k) {
    const auto &e = q.tree.edges[k];
    const auto &je = catalog.join_edges()[e.join_edge];
    sql += k ? " AND " : " WHERE ";
    sql += instance_name(q.tree, e.left, catalog) + "." + catalog.column_name(je.left) + " = " +
           instance_name(q.tree, e.right, catalog) + "." + catalog.column_name(je.right);
  }
  return sql;
}

} // namespace schemamap
