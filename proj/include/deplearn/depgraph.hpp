#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "deplearn/item.hpp"

namespace deplearn {

struct Edge {
  ItemId source;
  int quantity;
  ItemId target;

  bool operator==(const Edge&) const = default;
};

class UnknownItemError : public std::invalid_argument {
 public:
  explicit UnknownItemError(const ItemId& item)
      : std::invalid_argument("unknown item: " + item.str()), item_(item) {}
  const ItemId& item() const noexcept { return item_; }

 private:
  ItemId item_;
};

/// Items plus quantified requirement edges (u, q, v). Incoming edges of a node
/// are stored together so R(v) is a single lookup.
class DependencyGraph {
 public:
  bool contains(const ItemId& item) const noexcept { return nodes_.count(item) > 0; }
  const std::set<ItemId>& nodes() const noexcept { return nodes_; }
  std::size_t size() const noexcept { return nodes_.size(); }

  void add_node(const ItemId& item);

  /// R(v); empty when v is absent or basic.
  const RequirementSet& requirements(const ItemId& item) const noexcept;

  /// Replaces every incoming edge of `item`. Sources become nodes too.
  /// Throws std::invalid_argument on a self edge.
  void set_requirements(const ItemId& item, const RequirementSet& reqs);

  /// Whether a requirement set (possibly empty) has been assigned to `item`,
  /// as opposed to the item only having been mentioned by another node.
  bool has_requirement_set(const ItemId& item) const noexcept {
    return assigned_.count(item) > 0;
  }

  /// Items that list `item` as a requirement.
  const std::set<ItemId>& dependents(const ItemId& item) const noexcept;

  std::vector<Edge> edges() const;
  std::size_t edge_count() const noexcept;

  bool operator==(const DependencyGraph&) const = default;

 private:
  std::set<ItemId> nodes_;
  std::set<ItemId> assigned_;
  std::map<ItemId, RequirementSet> incoming_;
  std::map<ItemId, std::set<ItemId>> outgoing_;
};

using ExperiencedSet = std::set<ItemId>;

/// Appendix-C style update: the first observed requirement set of an item is
/// kept. Returns true when the graph changed.
bool update_from_experience(DependencyGraph& graph, ExperiencedSet& experienced,
                            const ItemId& item, const RequirementSet& observed);

/// Tier of a pickaxe (wooden=1, stone=2, iron=3), 0 for anything else.
int pickaxe_tier(const ItemId& item) noexcept;

/// Requirement set implied by a successful action.
/// mine: the highest-tier pickaxe held afterwards, or empty.
/// craft/smelt: the positive consumption of one action plus the non-consumed
/// tools the action relied on. Throws std::logic_error if nothing of `item`
/// was produced.
RequirementSet determine_experienced_requirements(OperationKind op, const ItemId& item,
                                                  const Inventory& pre, const Inventory& post,
                                                  const std::set<ItemId>& tools_used = {});

struct AggregatedRequirements {
  std::vector<std::pair<int, ItemId>> steps;  // (quantity, item); last is (1, goal)
  bool cycle_detected = false;
};

/// Backward traversal from `goal` with multiplicative demand propagation.
/// Items in `tool_items` are capped at demand 1, inventory is netted per item,
/// and order is topological with lexicographic tie-breaks.
AggregatedRequirements aggregate_requirements(const DependencyGraph& graph, const ItemId& goal,
                                              const Inventory& inventory,
                                              const std::set<ItemId>& tool_items = {});

/// All nodes reachable by forward edges from `item`, excluding `item`.
std::set<ItemId> descendants(const DependencyGraph& graph, const ItemId& item);

/// Fraction of goal items whose learned requirement set equals the true one.
double ega(const DependencyGraph& learned, const DependencyGraph& truth,
           const std::vector<ItemId>& goal_items);

nlohmann::json graph_to_json(const DependencyGraph& graph, const std::set<ItemId>& tool_items = {});
DependencyGraph graph_from_json(const nlohmann::json& doc);

}  // namespace deplearn
