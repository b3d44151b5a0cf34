#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "deplearn/depgraph.hpp"
#include "deplearn/knowledge.hpp"
#include "deplearn/similarity.hpp"
#include "deplearn/textworld.hpp"

namespace deplearn {

/// A human-written plan in the Optimus-1 text format: a <goal> line, a
/// <requirements> list and a <plan> JSON object of numbered steps.
struct SeedPlan {
  std::string name;
  std::string goal_text;
  ItemId goal;
  std::map<ItemId, int> requirements;  // the header counts
  std::vector<Subgoal> steps;          // quantities taken from the header
  std::string raw;
};

/// Plan text uses "logs"; everything else is already an item id.
ItemId canonical_plan_item(std::string_view name);

SeedPlan parse_seed_plan(const std::string& raw, const std::string& name);
/// Loads iron_sword, golden_sword and diamond first (in that order), then any
/// other *.txt plan in name order.
std::vector<SeedPlan> load_seed_plans(const std::filesystem::path& dir);

/// C[v]; reads as 1 for items never touched.
class ExplorationCounts {
 public:
  int get(const ItemId& item) const noexcept;
  void increment(const ItemId& item) { counts_[item] = get(item) + 1; }
  /// For checkpoints and fixtures.
  void set(const ItemId& item, int value) {
    if (value < 0) throw std::invalid_argument("negative exploration count");
    counts_[item] = value;
  }
  const std::map<ItemId, int>& values() const noexcept { return counts_; }

 private:
  std::map<ItemId, int> counts_;
};

/// Items seen consumed by a successful craft or smelt.
using ResourceSet = std::set<ItemId>;

/// Adds the consumed inputs of a successful craft/smelt action.
void note_consumption(ResourceSet& resources, OperationKind op, const ActionResult& result);
/// Adds items a successful action needed but did not consume: the held
/// pickaxe for mining, reported tools otherwise.
void note_tools(std::set<ItemId>& tools, OperationKind op, const ItemId& item,
                const ActionResult& result);

struct InitResult {
  DependencyGraph graph;
  ExperiencedSet experienced;
  ResourceSet resources;
  std::set<ItemId> tools;
  int provider_calls = 0;
  int seed_steps = 0;
  std::vector<std::string> seed_failures;  // "plan: subgoal"
  bool node_cap_hit = false;
};

struct InitOptions {
  std::size_t k = 3;
  std::size_t node_cap = 1000;
  int subgoal_retries = 1;
};

/// Runs every seed plan in a fresh episode and keeps the observed requirement
/// sets, then asks `provider` for each node that still has no requirement set,
/// adding newly mentioned items as it goes. A null provider skips prediction.
InitResult initialize_graph(const std::vector<ItemId>& goal_items,
                            const std::vector<SeedPlan>& seed_plans, World& world,
                            KnowledgeProvider* provider, const SimilarityProvider& similarity,
                            const InitOptions& options = {});

struct RevisionParams {
  int c0 = 3;
  int alpha_s = 2;
  int alpha_i = 8;
  std::size_t k = 3;
};

struct RevisionStats {
  int invocations = 0;
  int fuel = 0;
  std::vector<ItemId> revised;       // in invocation order
  std::vector<ItemId> inadmissible;  // revised through the resource branch
  std::vector<ItemId> left_empty;    // neither resources nor exemplars available
};

/// Requirement-set repair by analogy to similar experienced items, or by the
/// all-resources rule once an item has been explored more than c0 times; the
/// latter also revises every descendant. Each node is revised at most once
/// per call. Throws UnknownItemError if `item` is not a node.
RevisionStats revision_by_analogy(DependencyGraph& graph, ExperiencedSet& experienced,
                                  const ItemId& item, ExplorationCounts& counts,
                                  const ResourceSet& resources,
                                  const SimilarityProvider& similarity,
                                  const RevisionParams& params);

/// Top-k experienced items most similar to `item` with their current
/// requirement sets.
std::vector<Exemplar> experienced_exemplars(const DependencyGraph& graph,
                                            const ExperiencedSet& experienced, const ItemId& item,
                                            const SimilarityProvider& similarity, std::size_t k);

}  // namespace deplearn
