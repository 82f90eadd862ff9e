#include "schemamap/filters.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>

namespace schemamap {

namespace {

using Mask = std::uint64_t;

bool in_mask(Mask m, std::size_t v) { return (m >> v) & 1U; }

} // namespace

FilterDAG decompose_filters(const std::vector<CandidateQuery> &candidates) {
  FilterDAG dag;
  std::unordered_map<std::string, std::size_t> by_key;
  std::set<std::pair<std::size_t, std::size_t>> edges;

  for (std::size_t ci = 0; ci < candidates.size(); ++ci) {
    const auto &q = candidates[ci];
    const auto &tree = q.tree;
    const std::size_t n = tree.nodes.size();
    if (n > 63) throw std::length_error("join tree too large to decompose");
    std::vector<Mask> adjacency(n, 0);
    for (const auto &e : tree.edges) {
      adjacency[e.left] |= Mask{1} << e.right;
      adjacency[e.right] |= Mask{1} << e.left;
    }

    // Connected node subsets, grown one neighbour at a time.
    std::map<Mask, std::size_t> filter_of;
    std::vector<Mask> frontier;
    std::set<Mask> seen;
    for (std::size_t v = 0; v < n; ++v) {
      Mask m = Mask{1} << v;
      if (seen.insert(m).second) frontier.push_back(m);
    }
    std::vector<Mask> subsets;
    while (!frontier.empty()) {
      std::vector<Mask> next;
      for (Mask m : frontier) {
        subsets.push_back(m);
        Mask reach = 0;
        for (std::size_t v = 0; v < n; ++v)
          if (in_mask(m, v)) reach |= adjacency[v];
        reach &= ~m;
        for (std::size_t v = 0; v < n; ++v)
          if (in_mask(reach, v) && seen.insert(m | (Mask{1} << v)).second) next.push_back(m | (Mask{1} << v));
      }
      frontier = std::move(next);
    }

    for (Mask m : subsets) {
      std::vector<std::size_t> local(n, 0);
      JoinTree sub;
      for (std::size_t v = 0; v < n; ++v)
        if (in_mask(m, v)) {
          local[v] = sub.nodes.size();
          sub.nodes.push_back(tree.nodes[v]);
        }
      for (const auto &e : tree.edges)
        if (in_mask(m, e.left) && in_mask(m, e.right)) sub.edges.push_back({e.join_edge, local[e.left], local[e.right]});
      std::vector<TargetProjection> induced;
      for (std::size_t j = 0; j < q.projection.size(); ++j)
        if (in_mask(m, q.projection[j].instance)) induced.push_back({j, local[q.projection[j].instance], q.projection[j].column});
      if (induced.empty()) continue;

      auto canon = canonicalize(sub, induced);
      auto [it, inserted] = by_key.try_emplace(canon.key, dag.filters.size());
      if (inserted) {
        Filter f;
        f.id = it->second;
        f.subtree = std::move(canon.tree);
        f.induced = std::move(canon.projection);
        f.key = std::move(canon.key);
        dag.filters.push_back(std::move(f));
      }
      auto &f = dag.filters[it->second];
      if (f.parent_candidates.empty() || f.parent_candidates.back() != ci) f.parent_candidates.push_back(ci);
      filter_of[m] = it->second;
    }

    const Mask full = n == 64 ? ~Mask{0} : (Mask{1} << n) - 1;
    dag.maximal.push_back(filter_of.at(full));
    dag.filters[filter_of.at(full)].maximal_for.push_back(ci);

    for (const auto &[m, child] : filter_of) {
      for (std::size_t v = 0; v < n; ++v) {
        if (in_mask(m, v)) continue;
        auto it = filter_of.find(m | (Mask{1} << v));
        if (it != filter_of.end() && edges.emplace(child, it->second).second) {
          dag.filters[child].parents.push_back(it->second);
          dag.filters[it->second].children.push_back(child);
        }
      }
    }
  }
  for (auto &f : dag.filters) {
    std::sort(f.parents.begin(), f.parents.end());
    std::sort(f.children.begin(), f.children.end());
  }
  return dag;
}

DagState::DagState(const FilterDAG &dag)
    : dag_(dag), filters_(dag.filters.size(), FilterStatus::Unknown),
      candidates_(dag.candidate_count(), CandidateStatus::Open) {}

bool DagState::live(std::size_t filter) const {
  if (filters_[filter] != FilterStatus::Unknown) return false;
  const auto &pc = dag_.filters[filter].parent_candidates;
  return std::any_of(pc.begin(), pc.end(), [&](std::size_t c) { return candidates_[c] == CandidateStatus::Open; });
}

std::vector<std::size_t> DagState::live_filters() const {
  std::vector<std::size_t> out;
  for (std::size_t f = 0; f < filters_.size(); ++f)
    if (live(f)) out.push_back(f);
  return out;
}

std::size_t DagState::pruned_count(std::size_t filter) const {
  const auto &pc = dag_.filters[filter].parent_candidates;
  return static_cast<std::size_t>(
      std::count_if(pc.begin(), pc.end(), [&](std::size_t c) { return candidates_[c] == CandidateStatus::Open; }));
}

void DagState::apply_fail(std::size_t filter) {
  std::vector<std::size_t> stack{filter};
  while (!stack.empty()) {
    const auto f = stack.back();
    stack.pop_back();
    if (filters_[f] == FilterStatus::Failed) continue;
    filters_[f] = FilterStatus::Failed;
    for (auto c : dag_.filters[f].parent_candidates)
      if (candidates_[c] == CandidateStatus::Open) candidates_[c] = CandidateStatus::Pruned;
    for (auto p : dag_.filters[f].parents) stack.push_back(p);
  }
}

void DagState::apply_pass(std::size_t filter) {
  std::vector<std::size_t> stack{filter};
  while (!stack.empty()) {
    const auto f = stack.back();
    stack.pop_back();
    if (filters_[f] == FilterStatus::Passed) continue;
    filters_[f] = FilterStatus::Passed;
    for (auto c : dag_.filters[f].maximal_for)
      if (candidates_[c] == CandidateStatus::Open) candidates_[c] = CandidateStatus::Accepted;
    for (auto ch : dag_.filters[f].children) stack.push_back(ch);
  }
}

bool DagState::all_resolved() const { return open_candidates() == 0; }

std::size_t DagState::open_candidates() const {
  return static_cast<std::size_t>(
      std::count(candidates_.begin(), candidates_.end(), CandidateStatus::Open));
}

} // namespace schemamap
