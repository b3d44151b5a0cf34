#include "deplearn/ffom.hpp"

#include <nlohmann/json.hpp>

namespace deplearn {

void OperationMemory::record(const ItemId& item, OperationKind op, bool success) {
  if (mode_ == MemoryMode::kNone) return;
  if (!success && mode_ == MemoryMode::kSuccessOnly) return;
  auto& c = table_[item][op];
  ++(success ? c.succ : c.fail);
}

OpCounts OperationMemory::counts(const ItemId& item, OperationKind op) const {
  auto it = table_.find(item);
  if (it == table_.end()) return {};
  auto jt = it->second.find(op);
  return jt == it->second.end() ? OpCounts{} : jt->second;
}

std::vector<ItemId> OperationMemory::items() const {
  std::vector<ItemId> out;
  for (const auto& [item, ops] : table_) out.push_back(item);
  return out;
}

nlohmann::json OperationMemory::to_json() const {
  auto out = nlohmann::json::array();
  for (const auto& [item, ops] : table_) {
    for (const auto& [op, c] : ops) {
      out.push_back({{"item", item.str()}, {"op", to_string(op)}, {"succ", c.succ}, {"fail", c.fail}});
    }
  }
  return out;
}

OperationMemory OperationMemory::from_json(const nlohmann::json& doc, MemoryMode mode) {
  OperationMemory m(mode);
  for (const auto& row : doc) {
    auto op = parse_operation(row.at("op").get<std::string>());
    if (!op) throw std::invalid_argument("bad operation in memory: " + row.at("op").dump());
    const int s = row.at("succ").get<int>(), f = row.at("fail").get<int>();
    if (s < 0 || f < 0) throw std::invalid_argument("negative memory count");
    if (s == 0 && f == 0) continue;
    m.table_[ItemId(row.at("item").get<std::string>())][*op] = {s, f};
  }
  return m;
}

OpClassification classify(const OperationMemory& memory, const ItemId& item, OperationKind op,
                          int margin) {
  const auto c = memory.counts(item, op);
  const int score = c.succ - c.fail;
  if (score <= -margin) return OpClassification::kInvalid;
  if (c.succ > 0) return OpClassification::kValid;
  return OpClassification::kUnknown;
}

OperationChoice plan_operation(const ItemId& item, const OperationMemory& memory,
                               KnowledgeProvider& provider, const SimilarityProvider& similarity,
                               std::size_t k, int margin) {
  for (auto op : kAllOperations) {
    if (classify(memory, item, op, margin) == OpClassification::kValid) return {op};
  }

  std::map<ItemId, std::vector<OperationKind>> valid;
  for (const auto& u : memory.items()) {
    if (u == item) continue;
    for (auto op : kAllOperations) {
      if (classify(memory, u, op, margin) == OpClassification::kValid) valid[u].push_back(op);
    }
  }
  std::vector<ItemId> pool;
  for (const auto& [u, ops] : valid) pool.push_back(u);
  std::vector<OperationExemplar> pairs;
  for (const auto& u : similarity.top_k(item, pool, k)) {
    for (auto op : valid[u]) pairs.push_back({u, op});
  }

  std::vector<OperationKind> candidates;
  for (auto op : kAllOperations) {
    if (classify(memory, item, op, margin) != OpClassification::kInvalid) candidates.push_back(op);
  }
  OperationChoice choice{OperationKind::kMine, true, candidates.empty()};
  if (choice.fallback) candidates.assign(kAllOperations.begin(), kAllOperations.end());
  choice.op = provider.select_operation(item, pairs, candidates);
  return choice;
}

Plan make_plan(const AggregatedRequirements& agg, const OperationMemory& memory,
               KnowledgeProvider& provider, const SimilarityProvider& similarity, std::size_t k,
               int margin) {
  if (agg.steps.empty()) throw std::invalid_argument("make_plan: empty aggregation");
  Plan plan;
  for (const auto& [q, u] : agg.steps) {
    auto choice = plan_operation(u, memory, provider, similarity, k, margin);
    plan.provider_calls += choice.queried;
    plan.fallbacks += choice.fallback;
    plan.subgoals.push_back({choice.op, q, u});
  }
  return plan;
}

int total_failure_score(const OperationMemory& memory, const ItemId& item) {
  int total = 0;
  for (auto op : kAllOperations) {
    const auto c = memory.counts(item, op);
    total += c.fail - c.succ;
  }
  return total;
}

bool should_revise(const OperationMemory& memory, const ItemId& item, int d0) {
  return total_failure_score(memory, item) >= d0;
}

}  // namespace deplearn
