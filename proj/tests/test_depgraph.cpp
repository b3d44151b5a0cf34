#include <random>

#include <nlohmann/json.hpp>

#include "doctest.h"
#include "oracles.hpp"

#include "deplearn/depgraph.hpp"
#include "deplearn/textworld.hpp"

using namespace deplearn;

namespace {
DependencyGraph stick_chain() {
  DependencyGraph g;
  g.set_requirements("log", {});
  g.set_requirements("planks", {{"log", 1}});
  g.set_requirements("stick", {{"planks", 2}});
  return g;
}

WorldSpec shipped() { return load_world_spec(DEPLEARN_DATA_DIR "/techtree.json"); }
}  // namespace

TEST_CASE("item names are validated") {
  CHECK_THROWS_AS(ItemId(""), std::invalid_argument);
  CHECK_THROWS_AS(ItemId("Iron Sword"), std::invalid_argument);
  CHECK(ItemId("iron_sword").str() == "iron_sword");
  CHECK(ItemId::normalize(" Iron Sword ") == "iron_sword");
  CHECK_THROWS_AS(RequirementSet({{"log", 0}}), std::invalid_argument);
}

TEST_CASE("requirement_set") {
  DependencyGraph g;
  g.set_requirements("wooden_pickaxe", {{"stick", 1}, {"planks", 3}});
  CHECK(g.requirements("wooden_pickaxe") == RequirementSet{{"planks", 3}, {"stick", 1}});
  CHECK(g.requirements("diamond").empty());
  CHECK(g.contains("stick"));
  CHECK(g.requirements("stick").empty());
  CHECK_THROWS(g.set_requirements("stick", {{"stick", 1}}));
}

TEST_CASE("replacing requirements drops every old edge") {
  DependencyGraph g;
  g.set_requirements("planks", {{"stick", 2}, {"coal", 1}});
  g.set_requirements("planks", {{"log", 1}});
  CHECK(g.requirements("planks") == RequirementSet{{"log", 1}});
  CHECK(g.dependents("stick").empty());
  CHECK(g.dependents("coal").empty());
  CHECK(g.edge_count() == 1);
}

TEST_CASE("update_from_experience is first-experience-wins") {
  DependencyGraph g;
  ExperiencedSet exp;
  CHECK(update_from_experience(g, exp, "log", {}));
  CHECK(g.contains("log"));
  CHECK(exp.count("log"));
  CHECK(g.requirements("log").empty());

  g.set_requirements("planks", {{"stick", 2}});
  CHECK(update_from_experience(g, exp, "planks", {{"log", 1}}));
  CHECK(g.requirements("planks") == RequirementSet{{"log", 1}});

  const auto before = g;
  CHECK_FALSE(update_from_experience(g, exp, "planks", {{"log", 3}}));
  CHECK(g == before);
}

TEST_CASE("determine_experienced_requirements") {
  SUBCASE("mine records the highest pickaxe held") {
    Inventory post{{"wooden_pickaxe", 1}, {"stone_pickaxe", 1}, {"cobblestone", 1}};
    CHECK(determine_experienced_requirements(OperationKind::kMine, "cobblestone", {}, post) ==
          RequirementSet{{"stone_pickaxe", 1}});
  }
  SUBCASE("mine with empty hands") {
    CHECK(determine_experienced_requirements(OperationKind::kMine, "log", {}, {{"log", 1}}).empty());
  }
  SUBCASE("craft records consumption") {
    Inventory pre{{"log", 3}};
    Inventory post{{"log", 2}, {"planks", 1}};
    CHECK(determine_experienced_requirements(OperationKind::kCraft, "planks", pre, post) ==
          RequirementSet{{"log", 1}});
  }
  SUBCASE("craft adds tools that were relied on") {
    Inventory pre{{"planks", 5}, {"stick", 2}, {"crafting_table", 1}};
    Inventory post{{"planks", 2}, {"crafting_table", 1}, {"wooden_pickaxe", 1}};
    CHECK(determine_experienced_requirements(OperationKind::kCraft, "wooden_pickaxe", pre, post,
                                             {"crafting_table"}) ==
          RequirementSet{{"crafting_table", 1}, {"planks", 3}, {"stick", 2}});
  }
  SUBCASE("nothing produced is a contract violation") {
    Inventory inv{{"log", 1}};
    CHECK_THROWS_AS(determine_experienced_requirements(OperationKind::kCraft, "planks", inv, inv),
                    std::logic_error);
  }
  SUBCASE("never returns an item whose count went up") {
    Inventory pre{{"iron_ore", 2}, {"furnace", 1}};
    Inventory post{{"iron_ore", 1}, {"furnace", 1}, {"iron_ingot", 1}};
    auto r = determine_experienced_requirements(OperationKind::kSmelt, "iron_ingot", pre, post,
                                                {"furnace"});
    CHECK_FALSE(r.contains("iron_ingot"));
    CHECK(r == RequirementSet{{"furnace", 1}, {"iron_ore", 1}});
  }
}

TEST_CASE("aggregate_requirements on the stick chain") {
  auto agg = aggregate_requirements(stick_chain(), "stick", {});
  using P = std::pair<int, ItemId>;
  CHECK(agg.steps == std::vector<P>{{2, "log"}, {2, "planks"}, {1, "stick"}});
  CHECK_FALSE(agg.cycle_detected);

  auto held = aggregate_requirements(stick_chain(), "stick", {{"stick", 1}});
  CHECK(held.steps == std::vector<P>{{1, "stick"}});

  auto partial = aggregate_requirements(stick_chain(), "stick", {{"planks", 1}});
  CHECK(partial.steps == std::vector<P>{{1, "log"}, {1, "planks"}, {1, "stick"}});

  CHECK_THROWS_AS(aggregate_requirements(stick_chain(), "diamond", {}), UnknownItemError);
}

TEST_CASE("tool demand is capped at one") {
  DependencyGraph g;
  g.set_requirements("table", {{"planks", 4}});
  g.set_requirements("a", {{"table", 1}, {"planks", 1}});
  g.set_requirements("b", {{"table", 1}, {"a", 2}});
  auto agg = aggregate_requirements(g, "b", {}, {"table"});
  using P = std::pair<int, ItemId>;
  // table demand 1 + 1*2 = 3 capped to 1; planks = 4*1 + 1*2.
  CHECK(agg.steps == std::vector<P>{{6, "planks"}, {1, "table"}, {2, "a"}, {1, "b"}});
}

TEST_CASE("cycles are broken and flagged") {
  DependencyGraph g;
  g.set_requirements("a", {{"b", 1}});
  g.set_requirements("b", {{"c", 1}});
  g.set_requirements("c", {{"a", 1}});
  auto agg = aggregate_requirements(g, "a", {});
  CHECK(agg.cycle_detected);
  CHECK(agg.steps.back() == std::make_pair(1, ItemId("a")));
  CHECK(agg.steps.size() == 3);
}

TEST_CASE("iron_sword aggregation covers the human plan's items") {
  const auto spec = shipped();
  auto agg = aggregate_requirements(spec.truth_graph(), "iron_sword", {}, spec.tool_items());
  std::set<ItemId> got;
  for (const auto& [q, item] : agg.steps) got.insert(item);
  const std::set<ItemId> plan{"log",         "planks",         "stick",         "crafting_table",
                              "wooden_pickaxe", "cobblestone", "furnace",       "stone_pickaxe",
                              "iron_ore",    "iron_ingot",     "iron_sword"};
  CHECK(got == plan);
}

TEST_CASE("descendants") {
  auto g = stick_chain();
  CHECK(descendants(g, "stick").empty());
  CHECK(descendants(g, "log") == std::set<ItemId>{"planks", "stick"});
  CHECK_THROWS_AS(descendants(g, "nope"), UnknownItemError);

  DependencyGraph cyc;
  cyc.set_requirements("a", {{"b", 1}});
  cyc.set_requirements("b", {{"a", 1}});
  CHECK(descendants(cyc, "a") == std::set<ItemId>{"b"});
}

TEST_CASE("ega") {
  const auto spec = shipped();
  const auto truth = spec.truth_graph();
  const auto goals = spec.goal_items();
  REQUIRE(goals.size() == 67);
  CHECK(ega(truth, truth, goals) == 1.0);

  int basic = 0;
  for (const auto& v : goals)
    if (truth.requirements(v).empty()) ++basic;
  CHECK(ega(DependencyGraph{}, truth, goals) == doctest::Approx(basic / 67.0));

  DependencyGraph learned = truth;
  learned.set_requirements("iron_sword", {{"iron_ingot", 3}});
  const double dropped = ega(learned, truth, goals);
  CHECK(dropped == doctest::Approx(66.0 / 67.0));
  learned.set_requirements("iron_sword", truth.requirements("iron_sword"));
  CHECK(ega(learned, truth, goals) - dropped == doctest::Approx(1.0 / 67.0));

  CHECK_THROWS(ega(truth, truth, {}));
}

TEST_CASE("graph json round trip") {
  auto g = stick_chain();
  g.add_node("mystery");
  auto back = graph_from_json(graph_to_json(g, {"planks"}));
  CHECK(back == g);
  CHECK_FALSE(back.has_requirement_set("mystery"));
}

TEST_CASE("aggregation matches the brute-force oracles on random DAGs") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 400; ++i) {
    auto inst = oracle::random_dag(rng);
    const ItemId& goal = inst.names.back();
    auto got = aggregate_requirements(inst.graph, goal, inst.inventory, inst.tools);
    CHECK_FALSE(got.cycle_detected);
    CHECK(got.steps == oracle::aggregate(inst.graph, goal, inst.inventory, inst.tools));

    auto plain = aggregate_requirements(inst.graph, goal, {});
    auto paths = oracle::demand_by_paths(inst.graph, goal, {}, {});
    std::map<ItemId, long long> as_map;
    for (const auto& [q, v] : plain.steps) as_map[v] = q;
    CHECK(as_map == paths);

    // Nothing later in the list is a prerequisite of something earlier.
    auto reach = oracle::closure(inst.graph);
    for (std::size_t a = 0; a < got.steps.size(); ++a)
      for (std::size_t b = a + 1; b < got.steps.size(); ++b)
        CHECK_FALSE(reach[got.steps[b].second].count(got.steps[a].second));
  }
}

TEST_CASE("descendants and ega match the oracles on random DAGs") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 300; ++i) {
    auto inst = oracle::random_dag(rng);
    for (const auto& v : inst.names) CHECK(descendants(inst.graph, v) == oracle::descendants(inst.graph, v));
    auto other = oracle::random_dag(rng);
    CHECK(ega(other.graph, inst.graph, inst.names) == oracle::ega(other.graph, inst.graph, inst.names));
  }
}

TEST_CASE("random update sequences keep the graph consistent") {
  std::mt19937_64 rng(3);
  std::vector<ItemId> pool;
  for (int i = 0; i < 10; ++i) pool.emplace_back("i" + std::to_string(i));
  for (int run = 0; run < 100; ++run) {
    DependencyGraph g;
    ExperiencedSet exp;
    std::map<ItemId, RequirementSet> first;
    for (int s = 0; s < 30; ++s) {
      const ItemId& v = pool[rng() % pool.size()];
      RequirementSet obs;
      for (int k = 0; k < 3; ++k) {
        const ItemId& u = pool[rng() % pool.size()];
        if (u != v) obs.set(u, 1 + int(rng() % 4));
      }
      if (rng() % 3 == 0) {
        g.set_requirements(v, obs);  // a prediction, not an experience
        if (exp.count(v)) first[v] = obs;
      } else {
        update_from_experience(g, exp, v, obs);
        first.try_emplace(v, obs);
      }
      for (const auto& e : g.edges()) {
        CHECK(g.contains(e.source));
        CHECK(g.contains(e.target));
      }
      for (const auto& x : exp) CHECK(g.contains(x));
    }
    for (const auto& x : exp) CHECK(g.requirements(x) == first[x]);
  }
}
