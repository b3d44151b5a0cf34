#include <random>

#include <nlohmann/json.hpp>

#include "doctest.h"

#include "deplearn/ffom.hpp"

using namespace deplearn;

namespace {

// Answers with a fixed operation when allowed, else the first candidate, and
// keeps what it was asked.
class Scripted final : public KnowledgeProvider {
 public:
  explicit Scripted(OperationKind answer = OperationKind::kCraft) : answer_(answer) {}
  RequirementSet predict_requirements(const ItemId&, std::span<const Exemplar>) override { return {}; }
  OperationKind select_operation(const ItemId& item, std::span<const OperationExemplar> ex,
                                 std::span<const OperationKind> c) override {
    ++calls;
    asked.push_back(item);
    last_exemplars.assign(ex.begin(), ex.end());
    last_candidates.assign(c.begin(), c.end());
    return std::find(c.begin(), c.end(), answer_) != c.end() ? answer_ : c.front();
  }
  RequirementSet revise_requirements(const ItemId&, const FailedTransition&,
                                     std::span<const Exemplar>) override {
    return {};
  }
  int calls = 0;
  std::vector<ItemId> asked;
  std::vector<OperationExemplar> last_exemplars;
  std::vector<OperationKind> last_candidates;

 private:
  OperationKind answer_;
};

constexpr auto kMine = OperationKind::kMine;
constexpr auto kCraft = OperationKind::kCraft;
constexpr auto kSmelt = OperationKind::kSmelt;

}  // namespace

TEST_CASE("record") {
  OperationMemory m;
  m.record("log", kMine, true);
  CHECK(m.counts("log", kMine) == OpCounts{1, 0});
  m.record("stick", kCraft, false);
  CHECK(m.counts("stick", kCraft) == OpCounts{0, 1});
  m.record("coal", kMine, false);
  m.record("coal", kMine, false);
  m.record("coal", kMine, true);
  CHECK(m.counts("coal", kMine) == OpCounts{1, 2});
  CHECK(m.counts("coal", kSmelt) == OpCounts{});
}

TEST_CASE("memory modes") {
  OperationMemory succ_only(MemoryMode::kSuccessOnly), none(MemoryMode::kNone);
  for (auto* m : {&succ_only, &none}) {
    m->record("log", kMine, false);
    m->record("log", kMine, true);
  }
  CHECK(succ_only.counts("log", kMine) == OpCounts{1, 0});
  CHECK(none.counts("log", kMine) == OpCounts{});
  CHECK(none.items().empty());
}

TEST_CASE("classify") {
  OperationMemory m;
  m.record("a", kCraft, true);
  m.record("b", kCraft, false);
  m.record("b", kCraft, false);
  m.record("c", kCraft, false);
  CHECK(classify(m, "a", kCraft, 2) == OpClassification::kValid);
  CHECK(classify(m, "b", kCraft, 2) == OpClassification::kInvalid);
  CHECK(classify(m, "c", kCraft, 2) == OpClassification::kUnknown);
  CHECK(classify(m, "z", kCraft, 2) == OpClassification::kUnknown);
  m.record("a", kCraft, false);
  m.record("a", kCraft, false);
  m.record("a", kCraft, false);
  CHECK(classify(m, "a", kCraft, 2) == OpClassification::kInvalid);
}

TEST_CASE("classification is monotone in failures") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 2000; ++trial) {
    OperationMemory m;
    const int s = rng() % 5, f = rng() % 5, margin = 1 + rng() % 3;
    for (int i = 0; i < s; ++i) m.record("x", kSmelt, true);
    for (int i = 0; i < f; ++i) m.record("x", kSmelt, false);
    const auto before = classify(m, "x", kSmelt, margin);
    m.record("x", kSmelt, false);
    const auto after = classify(m, "x", kSmelt, margin);
    if (before == OpClassification::kInvalid) CHECK(after == OpClassification::kInvalid);
    if (before != OpClassification::kValid) CHECK(after != OpClassification::kValid);
    CHECK_FALSE((after == OpClassification::kValid && s == 0));
  }
}

TEST_CASE("failure score and trigger") {
  OperationMemory m;
  CHECK(total_failure_score(m, "x") == 0);
  for (int i = 0; i < 3; ++i) m.record("x", kMine, false);
  m.record("x", kCraft, true);
  m.record("x", kCraft, false);
  m.record("x", kCraft, false);
  CHECK(total_failure_score(m, "x") == 4);
  CHECK_FALSE(should_revise(m, "x", 6));
  m.record("x", kSmelt, false);
  CHECK_FALSE(should_revise(m, "x", 6));  // 5
  m.record("x", kSmelt, false);
  CHECK(should_revise(m, "x", 6));
  m.record("y", kMine, true);
  CHECK(total_failure_score(m, "y") < 0);
}

TEST_CASE("reset_item") {
  OperationMemory m;
  for (int i = 0; i < 7; ++i) m.record("x", kCraft, false);
  m.record("y", kMine, true);
  REQUIRE(should_revise(m, "x", 6));
  m.reset_item("x");
  CHECK_FALSE(should_revise(m, "x", 6));
  for (auto op : kAllOperations) CHECK(m.counts("x", op) == OpCounts{});
  CHECK(m.counts("y", kMine) == OpCounts{1, 0});
  auto copy = m;
  m.reset_item("x");
  CHECK(m == copy);
}

TEST_CASE("json round trip") {
  OperationMemory m;
  m.record("log", kMine, true);
  m.record("iron_ingot", kSmelt, false);
  m.record("iron_ingot", kCraft, false);
  const auto j = m.to_json();
  CHECK(j.size() == 3);
  CHECK(j[0].contains("item"));
  CHECK(OperationMemory::from_json(j) == m);
  CHECK_THROWS(OperationMemory::from_json(nlohmann::json::parse(
      R"([{"item":"log","op":"dig","succ":1,"fail":0}])")));
  CHECK_THROWS(OperationMemory::from_json(nlohmann::json::parse(
      R"([{"item":"log","op":"mine","succ":-1,"fail":0}])")));
}

TEST_CASE("a valid operation is reused without asking") {
  OperationMemory m;
  m.record("stick", kCraft, true);
  Scripted p(kMine);
  LexicalSimilarity sim;
  const auto c = plan_operation("stick", m, p, sim, 3, 2);
  CHECK(c.op == kCraft);
  CHECK_FALSE(c.queried);
  CHECK(p.calls == 0);
}

TEST_CASE("invalid operations are withheld, all invalid falls back to every operation") {
  OperationMemory m;
  LexicalSimilarity sim;
  Scripted p(kMine);
  for (int i = 0; i < 2; ++i) m.record("stick", kMine, false);
  auto c = plan_operation("stick", m, p, sim, 3, 2);
  CHECK(c.queried);
  CHECK_FALSE(c.fallback);
  CHECK(p.last_candidates == std::vector<OperationKind>{kCraft, kSmelt});
  CHECK(c.op != kMine);

  for (auto op : {kCraft, kSmelt})
    for (int i = 0; i < 2; ++i) m.record("stick", op, false);
  c = plan_operation("stick", m, p, sim, 3, 2);
  CHECK(c.fallback);
  CHECK(p.last_candidates.size() == 3);
  CHECK(c.op == kMine);
}

TEST_CASE("exemplar pairs come from similar items with valid operations") {
  OperationMemory m;
  m.record("iron_ingot", kSmelt, true);
  m.record("gold_ingot", kSmelt, true);
  m.record("log", kMine, true);
  m.record("iron_sword", kCraft, false);  // not valid
  m.record("copper_ingot", kSmelt, true);
  m.record("copper_ingot", kCraft, false);
  LexicalSimilarity sim;
  Scripted p;
  plan_operation("copper_ingot", m, p, sim, 2, 2);
  REQUIRE(p.last_exemplars.empty());  // copper_ingot smelt is valid, so reused
  CHECK(p.calls == 0);

  plan_operation("tin_ingot", m, p, sim, 2, 2);
  REQUIRE(p.last_exemplars.size() == 2);
  for (const auto& ex : p.last_exemplars) {
    CHECK(ex.op == kSmelt);
    CHECK(ex.item != ItemId("log"));
    CHECK(ex.item != ItemId("tin_ingot"));
  }
}

TEST_CASE("the target never appears among its own exemplars") {
  OperationMemory m;
  m.record("stick", kCraft, false);
  m.record("planks", kCraft, true);
  LexicalSimilarity sim;
  Scripted p;
  plan_operation("stick", m, p, sim, 5, 2);
  for (const auto& ex : p.last_exemplars) CHECK(ex.item != ItemId("stick"));
}

TEST_CASE("make_plan mirrors the aggregation") {
  AggregatedRequirements agg;
  agg.steps = {{2, ItemId("log")}, {8, ItemId("planks")}, {1, ItemId("stick")}};
  OperationMemory m;
  LexicalSimilarity sim;
  Scripted p(kCraft);
  auto plan = make_plan(agg, m, p, sim, 3, 2);
  REQUIRE(plan.subgoals.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(plan.subgoals[i].item == agg.steps[i].second);
    CHECK(plan.subgoals[i].quantity == agg.steps[i].first);
  }
  CHECK(plan.provider_calls == 3);
  CHECK(p.asked == std::vector<ItemId>{"log", "planks", "stick"});

  m.record("log", kMine, true);
  m.record("planks", kCraft, true);
  m.record("stick", kCraft, true);
  Scripted quiet;
  plan = make_plan(agg, m, quiet, sim, 3, 2);
  CHECK(quiet.calls == 0);
  CHECK(plan.provider_calls == 0);
  CHECK(plan.subgoals[0].op == kMine);

  AggregatedRequirements one;
  one.steps = {{1, ItemId("log")}};
  CHECK(make_plan(one, m, quiet, sim, 3, 2).subgoals.size() == 1);
  CHECK_THROWS_AS(make_plan(AggregatedRequirements{}, m, quiet, sim, 3, 2), std::invalid_argument);
}

TEST_CASE("zero-noise oracle picks the true operation from an empty memory") {
  const auto spec = load_world_spec(DEPLEARN_DATA_DIR "/techtree.json");
  LexicalSimilarity sim;
  OracleProvider oracle(spec, NoiseProfile::zero(), 0, sim);
  OperationMemory m;
  for (const auto& r : spec.items) {
    CHECK(plan_operation(r.name, m, oracle, sim, 3, 2).op == r.true_operation);
  }
}
