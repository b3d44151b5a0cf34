#pragma once

#include <optional>
#include <set>

#include "deplearn/adl.hpp"
#include "deplearn/depgraph.hpp"
#include "deplearn/rng.hpp"

namespace deplearn {

/// Unexperienced nodes whose learned prerequisites are all experienced.
std::set<ItemId> frontier(const DependencyGraph& graph, const ExperiencedSet& experienced);

/// Number of distinct items in the aggregated requirements of `item` with an
/// empty inventory, the item itself included.
int difficulty(const DependencyGraph& graph, const ItemId& item);

struct GoalChoice {
  ItemId item;
  std::size_t frontier_size = 0;
  bool fallback = false;  // frontier was empty, chose among all unexperienced nodes
};

/// Least-explored frontier items, then least difficult, ties uniformly at random.
std::optional<GoalChoice> select_goal_dex(const DependencyGraph& graph,
                                          const ExperiencedSet& experienced,
                                          const ExplorationCounts& counts, Rng& rng);

/// Uniform over frontier items explored at most c0 times, else uniform over
/// frontier and experienced items together.
std::optional<GoalChoice> select_goal_deckard(const DependencyGraph& graph,
                                              const ExperiencedSet& experienced,
                                              const ExplorationCounts& counts, int c0, Rng& rng);

/// Uniform over unexperienced nodes.
std::optional<GoalChoice> select_goal_random(const DependencyGraph& graph,
                                             const ExperiencedSet& experienced, Rng& rng);

}  // namespace deplearn
