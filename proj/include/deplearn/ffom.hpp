#pragma once

#include <map>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "deplearn/depgraph.hpp"
#include "deplearn/knowledge.hpp"
#include "deplearn/similarity.hpp"

namespace deplearn {

enum class OpClassification { kUnknown, kValid, kInvalid };

enum class MemoryMode {
  kFull,
  kSuccessOnly,  // failures are dropped, so nothing is ever Invalid
  kNone,         // nothing is stored
};

struct OpCounts {
  int succ = 0;
  int fail = 0;
  bool operator==(const OpCounts&) const = default;
};

class OperationMemory {
 public:
  explicit OperationMemory(MemoryMode mode = MemoryMode::kFull) : mode_(mode) {}

  MemoryMode mode() const noexcept { return mode_; }
  void record(const ItemId& item, OperationKind op, bool success);
  OpCounts counts(const ItemId& item, OperationKind op) const;
  void reset_item(const ItemId& item) { table_.erase(item); }
  /// Items with at least one non-zero cell.
  std::vector<ItemId> items() const;

  nlohmann::json to_json() const;
  static OperationMemory from_json(const nlohmann::json& doc, MemoryMode mode = MemoryMode::kFull);

  bool operator==(const OperationMemory&) const = default;

 private:
  MemoryMode mode_;
  std::map<ItemId, std::map<OperationKind, OpCounts>> table_;
};

OpClassification classify(const OperationMemory& memory, const ItemId& item, OperationKind op,
                          int margin);

struct OperationChoice {
  OperationKind op;
  bool queried = false;   // the provider was asked
  bool fallback = false;  // every operation was Invalid, so the full set was offered
};

OperationChoice plan_operation(const ItemId& item, const OperationMemory& memory,
                               KnowledgeProvider& provider, const SimilarityProvider& similarity,
                               std::size_t k, int margin);

struct Plan {
  std::vector<Subgoal> subgoals;
  int provider_calls = 0;
  int fallbacks = 0;
};

/// One subgoal per aggregated step, same order. Throws std::invalid_argument
/// on an empty aggregation.
Plan make_plan(const AggregatedRequirements& agg, const OperationMemory& memory,
               KnowledgeProvider& provider, const SimilarityProvider& similarity, std::size_t k,
               int margin);

/// Sum over operations of (fail - succ).
int total_failure_score(const OperationMemory& memory, const ItemId& item);
bool should_revise(const OperationMemory& memory, const ItemId& item, int d0);

}  // namespace deplearn
