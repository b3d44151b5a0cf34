#include <random>

#include "doctest.h"
#include "oracles.hpp"

#include "deplearn/adl.hpp"

using namespace deplearn;

namespace {

WorldSpec shipped() { return load_world_spec(DEPLEARN_DATA_DIR "/techtree.json"); }
std::vector<SeedPlan> shipped_plans() { return load_seed_plans(DEPLEARN_DATA_DIR "/seed_plans"); }

// log, planks, stick experienced; oak_planks unexperienced with a bogus
// prerequisite; oak_door depends on oak_planks.
struct Fixture {
  DependencyGraph graph;
  ExperiencedSet experienced{"log", "planks", "stick"};
  ResourceSet resources{"log"};
  ExplorationCounts counts;
  LexicalSimilarity sim;

  Fixture() {
    graph.set_requirements("log", {});
    graph.set_requirements("planks", {{"log", 1}});
    graph.set_requirements("stick", {{"planks", 2}});
    graph.set_requirements("oak_planks", {{"shiny_log", 3}});
    graph.set_requirements("oak_door", {{"oak_planks", 6}});
  }
};

class CountingOracle final : public KnowledgeProvider {
 public:
  RequirementSet predict_requirements(const ItemId&, std::span<const Exemplar>) override {
    ++calls;
    return {};
  }
  OperationKind select_operation(const ItemId&, std::span<const OperationExemplar>,
                                 std::span<const OperationKind> c) override {
    return c.front();
  }
  RequirementSet revise_requirements(const ItemId&, const FailedTransition&,
                                     std::span<const Exemplar>) override {
    return {};
  }
  int calls = 0;
};

}  // namespace

TEST_CASE("seed plans parse") {
  const auto plans = shipped_plans();
  REQUIRE(plans.size() == 3);
  CHECK(plans[0].name == "iron_sword");
  CHECK(plans[1].name == "golden_sword");
  CHECK(plans[2].name == "diamond");
  for (const auto& p : plans) {
    REQUIRE_FALSE(p.steps.empty());
    CHECK(p.steps.back().item == p.goal);
  }
  const auto& iron = plans[0];
  CHECK(iron.goal_text == "craft an iron sword.");
  REQUIRE(iron.steps.size() == 11);
  CHECK(iron.steps[0].op == OperationKind::kMine);
  CHECK(iron.steps[0].item == ItemId("log"));
  CHECK(iron.steps[0].quantity == 7);
  CHECK(iron.steps[9].op == OperationKind::kSmelt);
  CHECK(iron.requirements.at(ItemId("planks")) == 21);
}

TEST_CASE("seed plan header quantity wins and bad plans are rejected") {
  const std::string raw =
      "<goal>: craft a stick.\n<requirements>:\n1. log: need 2\n<plan>\n"
      "{\"step 2\": {\"task\": \"craft stick\", \"goal\": [\"stick\", 4]},\n"
      " \"step 1\": {\"task\": \"mine logs\", \"goal\": [\"logs\", 1]}}\n";
  const auto p = parse_seed_plan(raw, "stick");
  REQUIRE(p.steps.size() == 2);
  CHECK(p.steps[0].item == ItemId("log"));
  CHECK(p.steps[0].quantity == 2);
  CHECK(p.goal == ItemId("stick"));
  CHECK_THROWS_AS(parse_seed_plan("<goal>: nothing\n", "x"), std::invalid_argument);
  CHECK_THROWS_AS(parse_seed_plan("<plan>\n{\"step 1\": {\"prompt\": \"jump log\", \"item\": [\"log\", 1]}}",
                                  "x"),
                  std::invalid_argument);
}

TEST_CASE("exploration counts") {
  ExplorationCounts c;
  CHECK(c.get("log") == 1);
  c.increment("log");
  CHECK(c.get("log") == 2);
  c.set("stick", 0);
  c.increment("stick");
  CHECK(c.get("stick") == 1);
  CHECK_THROWS(c.set("stick", -1));
}

TEST_CASE("seed plans alone give the experienced subgraph without provider calls") {
  const auto spec = shipped();
  World world(spec, 7);
  LexicalSimilarity sim;
  CountingOracle provider;
  const auto plans = shipped_plans();
  std::vector<ItemId> goals{"iron_sword", "diamond"};
  auto res = initialize_graph(goals, plans, world, &provider, sim);
  CHECK(provider.calls == 0);
  CHECK(res.seed_failures.empty());
  const auto truth = spec.truth_graph();
  for (const auto& v : res.graph.nodes()) {
    CHECK(res.experienced.count(v));
    CHECK(res.graph.requirements(v) == truth.requirements(v));
  }
  CHECK(res.resources.count("planks"));
  CHECK(res.resources.count("iron_ingot"));
  CHECK_FALSE(res.resources.count("crafting_table"));
  CHECK(res.tools.count("crafting_table"));
  CHECK(res.tools.count("wooden_pickaxe"));
  CHECK(world.step() == 0);
}

TEST_CASE("zero-noise prediction reproduces the truth for every goal") {
  const auto spec = shipped();
  World world(spec, 1);
  LexicalSimilarity sim;
  OracleProvider provider(spec, NoiseProfile::zero(), 1, sim);
  const auto goals = spec.goal_items();
  auto res = initialize_graph(goals, shipped_plans(), world, &provider, sim);
  CHECK(res.graph.size() >= goals.size());
  CHECK(ega(res.graph, spec.truth_graph(), goals) == doctest::Approx(1.0));
  CHECK_FALSE(res.node_cap_hit);
}

TEST_CASE("default noise expands the node set") {
  const auto spec = shipped();
  const auto goals = spec.goal_items();
  LexicalSimilarity sim;
  int strict = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    World world(spec, seed);
    OracleProvider provider(spec, NoiseProfile{}, seed, sim);
    auto res = initialize_graph(goals, shipped_plans(), world, &provider, sim);
    CHECK(res.graph.size() >= goals.size());
    strict += res.graph.size() > goals.size();
    for (const auto& v : res.graph.nodes()) {
      CHECK((res.experienced.count(v) || res.graph.has_requirement_set(v)));
    }
  }
  CHECK(strict >= 1);
}

TEST_CASE("modified dependency world fails the golden sword plan but continues") {
  const auto spec = apply_variant(shipped(), VariantKind::kModifiedTrueDependency);
  World world(spec, 3);
  LexicalSimilarity sim;
  auto res = initialize_graph({"golden_sword"}, shipped_plans(), world, nullptr, sim);
  REQUIRE(res.seed_failures.size() == 1);
  CHECK(res.seed_failures[0].rfind("golden_sword", 0) == 0);
  CHECK(res.experienced.count("diamond"));
}

TEST_CASE("analogy revision on the five-node fixture") {
  Fixture f;
  f.counts.set("oak_planks", 0);
  RevisionParams p;  // c0 3, alpha_s 2, alpha_i 8
  p.k = 1;
  const auto stats =
      revision_by_analogy(f.graph, f.experienced, "oak_planks", f.counts, f.resources, f.sim, p);
  CHECK(f.graph.requirements("oak_planks") == RequirementSet{{"log", 2}});
  CHECK(f.counts.get("oak_planks") == 1);
  CHECK(stats.revised == std::vector<ItemId>{"oak_planks"});
  CHECK(stats.inadmissible.empty());
  CHECK(f.graph.dependents("shiny_log").empty());
}

TEST_CASE("non-resource analogy entries get quantity one") {
  Fixture f;
  f.counts.set("oak_planks", 1);
  RevisionParams p;
  p.k = 3;
  revision_by_analogy(f.graph, f.experienced, "oak_planks", f.counts, f.resources, f.sim, p);
  // exemplars planks {log}, stick {planks}, log {}: log is a resource at count 2
  CHECK(f.graph.requirements("oak_planks") == RequirementSet{{"log", 4}, {"planks", 1}});
}

TEST_CASE("inadmissible item takes every resource and its descendants are revised") {
  Fixture f;
  f.resources = {"log", "planks"};
  f.counts.set("oak_planks", 3);
  RevisionParams p;
  p.k = 1;
  const auto stats =
      revision_by_analogy(f.graph, f.experienced, "oak_planks", f.counts, f.resources, f.sim, p);
  CHECK(f.counts.get("oak_planks") == 4);
  CHECK(f.graph.requirements("oak_planks") == RequirementSet{{"log", 8}, {"planks", 8}});
  CHECK(stats.inadmissible == std::vector<ItemId>{"oak_planks"});
  CHECK(stats.revised == std::vector<ItemId>{"oak_planks", "oak_door"});
  CHECK(f.counts.get("oak_door") == 2);
  // oak_door stays on the analogy branch; no trigram overlap, so the name
  // tie-break picks log, whose set is empty
  CHECK(f.graph.requirements("oak_door").empty());
  CHECK(stats.left_empty == std::vector<ItemId>{"oak_door"});
}

TEST_CASE("empty resources at an inadmissible count fall back to analogy") {
  Fixture f;
  f.resources.clear();
  f.counts.set("oak_planks", 5);
  RevisionParams p;
  p.k = 1;
  const auto stats =
      revision_by_analogy(f.graph, f.experienced, "oak_planks", f.counts, f.resources, f.sim, p);
  CHECK(stats.inadmissible.empty());
  CHECK(f.graph.requirements("oak_planks") == RequirementSet{{"log", 1}});
}

TEST_CASE("revision removes the item from the experienced set") {
  Fixture f;
  RevisionParams p;
  revision_by_analogy(f.graph, f.experienced, "stick", f.counts, f.resources, f.sim, p);
  CHECK_FALSE(f.experienced.count("stick"));
  CHECK_THROWS_AS(
      revision_by_analogy(f.graph, f.experienced, "nothing", f.counts, f.resources, f.sim, p),
      UnknownItemError);
}

TEST_CASE("nothing to draw from leaves the set empty and says so") {
  DependencyGraph g;
  g.set_requirements("a", {{"b", 1}});
  ExperiencedSet exp;
  ExplorationCounts counts;
  LexicalSimilarity sim;
  const auto stats = revision_by_analogy(g, exp, "a", counts, {}, sim, {});
  CHECK(g.requirements("a").empty());
  CHECK(stats.left_empty == std::vector<ItemId>{"a"});
}

TEST_CASE("revision properties on random graphs") {
  std::mt19937_64 rng(2024);
  LexicalSimilarity sim;
  for (int trial = 0; trial < 1000; ++trial) {
    auto inst = oracle::random_dag(rng, 12);
    ExperiencedSet exp;
    ResourceSet res;
    ExplorationCounts counts;
    std::bernoulli_distribution coin(0.5), rare(0.2);
    for (const auto& v : inst.names) {
      if (coin(rng)) exp.insert(v);
      if (rare(rng)) res.insert(v);
      counts.set(v, std::uniform_int_distribution<int>(0, 5)(rng));
    }
    const auto before = counts.values();
    const ItemId& target = inst.names[rng() % inst.names.size()];
    RevisionParams p;
    p.k = 1 + rng() % 3;
    const auto stats = revision_by_analogy(inst.graph, exp, target, counts, res, sim, p);

    CHECK(stats.invocations <= static_cast<int>(inst.graph.size()) * (p.c0 + 1));
    CHECK(stats.revised.front() == target);
    std::set<ItemId> once(stats.revised.begin(), stats.revised.end());
    CHECK(once.size() == stats.revised.size());
    for (const auto& [v, c] : before) {
      CHECK(counts.get(v) >= c);
      CHECK(counts.get(v) == c + static_cast<int>(once.count(v)));
    }
    for (const auto& v : stats.revised) {
      CHECK_FALSE(exp.count(v));
      // the incoming edges are exactly the new set
      RequirementSet incoming;
      for (const auto& e : inst.graph.edges())
        if (e.target == v) incoming.set(e.source, e.quantity);
      CHECK(incoming == inst.graph.requirements(v));
      if (inst.graph.requirements(v).empty()) {
        CHECK(std::find(stats.left_empty.begin(), stats.left_empty.end(), v) != stats.left_empty.end());
      }
    }
    for (const auto& v : stats.inadmissible) {
      for (const auto& [u, q] : inst.graph.requirements(v)) {
        CHECK(res.count(u));
        CHECK(q == p.alpha_i);
      }
    }
  }
}
