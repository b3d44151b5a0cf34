#include "deplearn/adl.hpp"

#include <algorithm>
#include <fstream>
#include <regex>
#include <sstream>

#include <nlohmann/json.hpp>

namespace deplearn {

ItemId canonical_plan_item(std::string_view name) {
  std::string n = ItemId::normalize(name);
  if (n == "logs") n = "log";
  return ItemId(n);
}

SeedPlan parse_seed_plan(const std::string& raw, const std::string& name) {
  SeedPlan plan{name, {}, ItemId("unknown"), {}, {}, raw};

  static const std::regex goal_re(R"(<goal>:\s*(.*))");
  static const std::regex req_re(R"(^\s*\d+\.\s*([A-Za-z0-9_ ]+):\s*need\s+(\d+)\s*$)");
  std::istringstream in(raw);
  std::string line;
  std::string json_text;
  bool in_plan = false;
  while (std::getline(in, line)) {
    std::smatch m;
    if (in_plan) {
      json_text += line + "\n";
    } else if (std::regex_search(line, m, goal_re)) {
      plan.goal_text = m[1];
    } else if (line.rfind("<plan>", 0) == 0) {
      in_plan = true;
    } else if (std::regex_match(line, m, req_re)) {
      plan.requirements[canonical_plan_item(m[1].str())] = std::stoi(m[2]);
    }
  }
  if (json_text.empty()) throw std::invalid_argument("seed plan " + name + " has no <plan> block");

  nlohmann::json steps;
  try {
    steps = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("seed plan " + name + ": " + e.what());
  }
  std::vector<std::pair<int, nlohmann::json>> ordered;
  for (const auto& [key, val] : steps.items()) {
    ordered.emplace_back(std::stoi(key.substr(key.find(' ') + 1)), val);
  }
  std::sort(ordered.begin(), ordered.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [n, step] : ordered) {
    const auto text = step.contains("prompt") ? step["prompt"].get<std::string>()
                                              : step.at("task").get<std::string>();
    const auto& target = step.contains("item") ? step["item"] : step.at("goal");
    auto op = parse_operation(text.substr(0, text.find(' ')));
    if (!op) throw std::invalid_argument("seed plan " + name + ": bad step '" + text + "'");
    ItemId item = canonical_plan_item(target.at(0).get<std::string>());
    int q = target.at(1).get<int>();
    if (auto it = plan.requirements.find(item); it != plan.requirements.end()) q = it->second;
    plan.steps.push_back({*op, q, item});
  }
  if (plan.steps.empty()) throw std::invalid_argument("seed plan " + name + " has no steps");
  plan.goal = plan.steps.back().item;
  return plan;
}

std::vector<SeedPlan> load_seed_plans(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.path().extension() == ".txt") files.push_back(e.path());
  }
  const std::vector<std::string> preferred{"iron_sword", "golden_sword", "diamond"};
  auto rank = [&](const std::filesystem::path& p) {
    auto it = std::find(preferred.begin(), preferred.end(), p.stem().string());
    return std::make_pair(static_cast<int>(it - preferred.begin()), p.stem().string());
  };
  std::sort(files.begin(), files.end(), [&](const auto& a, const auto& b) { return rank(a) < rank(b); });
  std::vector<SeedPlan> plans;
  for (const auto& f : files) {
    std::ifstream in(f);
    std::stringstream ss;
    ss << in.rdbuf();
    plans.push_back(parse_seed_plan(ss.str(), f.stem().string()));
  }
  return plans;
}

int ExplorationCounts::get(const ItemId& item) const noexcept {
  auto it = counts_.find(item);
  return it == counts_.end() ? 1 : it->second;
}

void note_consumption(ResourceSet& resources, OperationKind op, const ActionResult& result) {
  if (!result.success || op == OperationKind::kMine) return;
  for (const auto& [item, d] : inventory_delta(result.pre, result.post)) {
    if (d < 0) resources.insert(item);
  }
}

void note_tools(std::set<ItemId>& tools, OperationKind op, const ItemId& item,
                const ActionResult& result) {
  if (!result.success) return;
  tools.insert(result.tools_used.begin(), result.tools_used.end());
  if (op == OperationKind::kMine) {
    for (const auto& [u, q] : determine_experienced_requirements(op, item, result.pre, result.post)) {
      tools.insert(u);
    }
  }
}

std::vector<Exemplar> experienced_exemplars(const DependencyGraph& graph,
                                            const ExperiencedSet& experienced, const ItemId& item,
                                            const SimilarityProvider& similarity, std::size_t k) {
  std::vector<ItemId> pool;
  for (const auto& e : experienced) {
    if (e != item) pool.push_back(e);
  }
  std::vector<Exemplar> out;
  for (const auto& e : similarity.top_k(item, pool, k)) out.push_back({e, graph.requirements(e)});
  return out;
}

InitResult initialize_graph(const std::vector<ItemId>& goal_items,
                            const std::vector<SeedPlan>& seed_plans, World& world,
                            KnowledgeProvider* provider, const SimilarityProvider& similarity,
                            const InitOptions& options) {
  InitResult res;
  for (const auto& g : goal_items) res.graph.add_node(g);

  for (const auto& plan : seed_plans) {
    world.reset(world.seed());
    for (const auto& step : plan.steps) {
      auto r = world.execute_subgoal(step, options.subgoal_retries, [&](const ActionResult& a) {
        note_consumption(res.resources, step.op, a);
        note_tools(res.tools, step.op, step.item, a);
        if (a.success && !res.experienced.count(step.item)) {
          update_from_experience(res.graph, res.experienced, step.item,
                                 determine_experienced_requirements(step.op, step.item, a.pre,
                                                                    a.post, a.tools_used));
        }
      });
      res.seed_steps += r.steps_used;
      if (!r.success) {
        res.seed_failures.push_back(plan.name + ": " + to_string(step));
        break;
      }
    }
  }
  world.reset(world.seed());

  if (!provider) return res;
  while (true) {
    const ItemId* next = nullptr;
    for (const auto& v : res.graph.nodes()) {
      if (!res.experienced.count(v) && !res.graph.has_requirement_set(v)) {
        next = &v;
        break;
      }
    }
    if (!next) break;
    if (res.graph.size() >= options.node_cap) {
      res.node_cap_hit = true;
      break;
    }
    const ItemId v = *next;
    const auto exemplars = experienced_exemplars(res.graph, res.experienced, v, similarity, options.k);
    RequirementSet pred = provider->predict_requirements(v, exemplars);
    ++res.provider_calls;
    pred.erase(v);
    res.graph.set_requirements(v, pred);
  }
  return res;
}

namespace {

RequirementSet analogy_set(const DependencyGraph& graph, const ExperiencedSet& experienced,
                           const ItemId& item, int count, const ResourceSet& resources,
                           const SimilarityProvider& similarity, const RevisionParams& params) {
  RequirementSet out;
  for (const auto& ex : experienced_exemplars(graph, experienced, item, similarity, params.k)) {
    for (const auto& [u, q] : ex.requirements) {
      if (u == item) continue;
      out.set(u, resources.count(u) ? params.alpha_s * count : 1);
    }
  }
  return out;
}

}  // namespace

RevisionStats revision_by_analogy(DependencyGraph& graph, ExperiencedSet& experienced,
                                  const ItemId& item, ExplorationCounts& counts,
                                  const ResourceSet& resources,
                                  const SimilarityProvider& similarity,
                                  const RevisionParams& params) {
  if (!graph.contains(item)) throw UnknownItemError(item);
  RevisionStats stats;
  stats.fuel = static_cast<int>(graph.size()) * (params.c0 + 1);
  std::set<ItemId> done;

  std::function<void(const ItemId&)> revise = [&](const ItemId& v) {
    if (done.count(v)) return;
    if (stats.invocations >= stats.fuel) throw std::logic_error("revision fuel exhausted");
    done.insert(v);
    ++stats.invocations;
    stats.revised.push_back(v);
    counts.increment(v);
    const int c = counts.get(v);

    RequirementSet resource_set;
    for (const auto& r : resources) {
      if (r != v) resource_set.set(r, params.alpha_i);
    }
    if (c > params.c0 && !resource_set.empty()) {
      stats.inadmissible.push_back(v);
      graph.set_requirements(v, resource_set);
      experienced.erase(v);
      for (const auto& w : descendants(graph, v)) revise(w);
      return;
    }
    RequirementSet r = analogy_set(graph, experienced, v, c, resources, similarity, params);
    if (r.empty()) stats.left_empty.push_back(v);
    graph.set_requirements(v, r);
    experienced.erase(v);
  };
  revise(item);
  return stats;
}

}  // namespace deplearn
