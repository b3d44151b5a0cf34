#include "deplearn/explore.hpp"

#include <limits>
#include <vector>

namespace deplearn {

namespace {

template <class Seq>
const ItemId& pick(const Seq& items, Rng& rng) {
  std::uniform_int_distribution<std::size_t> d(0, items.size() - 1);
  return items[d(rng)];
}

// Items with minimal count, then minimal difficulty.
std::vector<ItemId> easiest(const DependencyGraph& graph, const std::vector<ItemId>& pool,
                            const ExplorationCounts& counts) {
  int best_c = std::numeric_limits<int>::max();
  for (const auto& v : pool) best_c = std::min(best_c, counts.get(v));
  int best_d = std::numeric_limits<int>::max();
  std::vector<ItemId> out;
  for (const auto& v : pool) {
    if (counts.get(v) != best_c) continue;
    const int d = difficulty(graph, v);
    if (d < best_d) {
      best_d = d;
      out.clear();
    }
    if (d == best_d) out.push_back(v);
  }
  return out;
}

}  // namespace

std::set<ItemId> frontier(const DependencyGraph& graph, const ExperiencedSet& experienced) {
  std::set<ItemId> out;
  for (const auto& v : graph.nodes()) {
    if (experienced.count(v)) continue;
    bool ready = true;
    for (const auto& [u, q] : graph.requirements(v)) {
      if (!experienced.count(u)) {
        ready = false;
        break;
      }
    }
    if (ready) out.insert(v);
  }
  return out;
}

int difficulty(const DependencyGraph& graph, const ItemId& item) {
  if (!graph.contains(item)) throw UnknownItemError(item);
  const auto agg = aggregate_requirements(graph, item, Inventory{});
  std::set<ItemId> distinct;
  for (const auto& [q, u] : agg.steps) distinct.insert(u);
  return static_cast<int>(distinct.size());
}

std::optional<GoalChoice> select_goal_dex(const DependencyGraph& graph,
                                          const ExperiencedSet& experienced,
                                          const ExplorationCounts& counts, Rng& rng) {
  const auto f = frontier(graph, experienced);
  std::vector<ItemId> pool(f.begin(), f.end());
  bool fallback = false;
  if (pool.empty()) {
    fallback = true;
    for (const auto& v : graph.nodes()) {
      if (!experienced.count(v)) pool.push_back(v);
    }
    if (pool.empty()) return std::nullopt;
  }
  return GoalChoice{pick(easiest(graph, pool, counts), rng), f.size(), fallback};
}

std::optional<GoalChoice> select_goal_deckard(const DependencyGraph& graph,
                                              const ExperiencedSet& experienced,
                                              const ExplorationCounts& counts, int c0, Rng& rng) {
  const auto f = frontier(graph, experienced);
  std::vector<ItemId> pool;
  for (const auto& v : f) {
    if (counts.get(v) <= c0) pool.push_back(v);
  }
  bool fallback = false;
  if (pool.empty()) {
    fallback = true;
    std::set<ItemId> all(f.begin(), f.end());
    all.insert(experienced.begin(), experienced.end());
    pool.assign(all.begin(), all.end());
    if (pool.empty()) return std::nullopt;
  }
  return GoalChoice{pick(pool, rng), f.size(), fallback};
}

std::optional<GoalChoice> select_goal_random(const DependencyGraph& graph,
                                             const ExperiencedSet& experienced, Rng& rng) {
  std::vector<ItemId> pool;
  for (const auto& v : graph.nodes()) {
    if (!experienced.count(v)) pool.push_back(v);
  }
  if (pool.empty()) return std::nullopt;
  return GoalChoice{pick(pool, rng), 0, false};
}

}  // namespace deplearn
