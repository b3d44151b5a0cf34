#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "deplearn/depgraph.hpp"
#include "deplearn/item.hpp"

namespace deplearn {

struct RequirementRecord {
  ItemId item;
  int quantity;
  bool consumed;
};

struct ItemRecord {
  ItemId name;
  OperationKind true_operation;
  std::vector<RequirementRecord> requirements;
  int yield = 1;
  bool tool_class = false;
};

struct GoalGroup {
  std::string name;
  std::vector<ItemId> items;
};

enum class VariantKind { kVanilla, kModifiedTrueDependency, kModifiedTrueOperation };

std::string_view to_string(VariantKind v) noexcept;
VariantKind parse_variant(std::string_view text);

class SpecError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct WorldSpec {
  std::vector<ItemRecord> items;  // sorted by name
  std::vector<GoalGroup> goal_groups;
  int horizon = 2000;

  const ItemRecord* find(const ItemId& item) const noexcept;
  std::vector<ItemId> goal_items() const;
  /// Group name of a goal item, empty if not a goal.
  std::string group_of(const ItemId& item) const;
  std::set<ItemId> item_names() const;
  std::set<ItemId> tool_items() const;

  /// The dependencies the simulator actually checks: mined items keep only
  /// their pickaxe requirement, craft/smelt items keep everything.
  DependencyGraph truth_graph() const;

  /// Throws SpecError naming the offending item on dangling requirements,
  /// cycles, unreachable goals or bad quantities.
  void validate() const;
};

WorldSpec parse_world_spec(const nlohmann::json& doc);
WorldSpec load_world_spec(const std::filesystem::path& path);
nlohmann::json world_spec_to_json(const WorldSpec& spec);

WorldSpec apply_variant(const WorldSpec& spec, VariantKind variant);

struct ActionResult {
  bool success = false;
  std::optional<std::pair<ItemId, int>> obtained;
  Inventory pre;
  Inventory post;
  /// Non-consumed requirements the action relied on (empty on failure).
  std::set<ItemId> tools_used;
};

struct SubgoalResult {
  bool success = false;
  int steps_used = 0;
  int obtained = 0;
  /// Requirement set observed on the first successful action of this subgoal.
  std::optional<std::pair<ItemId, RequirementSet>> experienced;
};

class HorizonError : public std::runtime_error {
 public:
  HorizonError() : std::runtime_error("episode horizon exhausted") {}
};

class World {
 public:
  explicit World(WorldSpec spec, std::uint64_t seed = 0);

  const WorldSpec& spec() const noexcept { return spec_; }
  const Inventory& inventory() const noexcept { return inventory_; }
  int step() const noexcept { return step_; }
  int horizon() const noexcept { return spec_.horizon; }
  int remaining() const noexcept { return spec_.horizon - step_; }
  bool exhausted() const noexcept { return step_ >= spec_.horizon; }
  std::uint64_t seed() const noexcept { return seed_; }

  /// Empty inventory, step 0.
  void reset(std::uint64_t seed);

  /// One atomic action. Throws HorizonError when no steps remain.
  ActionResult step_action(OperationKind op, const ItemId& item);

  /// Repeats (op, item) until `quantity` units are obtained, an action fails
  /// `retries` times in a row, or the horizon is hit.
  SubgoalResult execute_subgoal(const Subgoal& subgoal, int retries = 1,
                                const std::function<void(const ActionResult&)>& on_step = {});

  /// Per-step JSONL trace; `debug` adds a failure reason field.
  void set_trace(std::ostream* out, bool debug = false) {
    trace_ = out;
    trace_debug_ = debug;
  }

  /// For tests and scripted setups.
  void give(const ItemId& item, int n) { inventory_.add(item, n); }

 private:
  void write_trace(OperationKind op, const ItemId& item, const ActionResult& r,
                   const char* reason) const;

  WorldSpec spec_;
  std::map<ItemId, std::size_t> index_;
  Inventory inventory_;
  int step_ = 0;
  std::uint64_t seed_ = 0;
  std::ostream* trace_ = nullptr;
  bool trace_debug_ = false;
};

}  // namespace deplearn
