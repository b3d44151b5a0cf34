#include "deplearn/textworld.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include <nlohmann/json.hpp>

namespace deplearn {

std::string_view to_string(VariantKind v) noexcept {
  switch (v) {
    case VariantKind::kVanilla: return "vanilla";
    case VariantKind::kModifiedTrueDependency: return "modified_true_dependency";
    case VariantKind::kModifiedTrueOperation: return "modified_true_operation";
  }
  return "?";
}

VariantKind parse_variant(std::string_view text) {
  if (text == "vanilla") return VariantKind::kVanilla;
  if (text == "modified_true_dependency") return VariantKind::kModifiedTrueDependency;
  if (text == "modified_true_operation") return VariantKind::kModifiedTrueOperation;
  throw std::invalid_argument("unknown world variant: " + std::string(text));
}

const ItemRecord* WorldSpec::find(const ItemId& item) const noexcept {
  auto it = std::lower_bound(items.begin(), items.end(), item,
                             [](const ItemRecord& r, const ItemId& id) { return r.name < id; });
  if (it == items.end() || it->name != item) return nullptr;
  return &*it;
}

std::vector<ItemId> WorldSpec::goal_items() const {
  std::vector<ItemId> out;
  for (const auto& g : goal_groups) out.insert(out.end(), g.items.begin(), g.items.end());
  return out;
}

std::string WorldSpec::group_of(const ItemId& item) const {
  for (const auto& g : goal_groups) {
    if (std::find(g.items.begin(), g.items.end(), item) != g.items.end()) return g.name;
  }
  return {};
}

std::set<ItemId> WorldSpec::item_names() const {
  std::set<ItemId> out;
  for (const auto& r : items) out.insert(r.name);
  return out;
}

std::set<ItemId> WorldSpec::tool_items() const {
  std::set<ItemId> out;
  for (const auto& r : items) {
    if (r.tool_class) out.insert(r.name);
  }
  return out;
}

DependencyGraph WorldSpec::truth_graph() const {
  DependencyGraph g;
  for (const auto& r : items) {
    RequirementSet reqs;
    for (const auto& req : r.requirements) {
      if (r.true_operation == OperationKind::kMine && pickaxe_tier(req.item) == 0) continue;
      reqs.set(req.item, req.quantity);
    }
    g.set_requirements(r.name, reqs);
  }
  return g;
}

void WorldSpec::validate() const {
  if (horizon < 1) throw SpecError("horizon must be positive");
  if (items.empty()) throw SpecError("spec has no items");
  for (std::size_t i = 1; i < items.size(); ++i) {
    if (!(items[i - 1].name < items[i].name)) {
      throw SpecError("duplicate or unsorted item: " + items[i].name.str());
    }
  }
  for (const auto& r : items) {
    if (r.yield < 1) throw SpecError("non-positive yield for " + r.name.str());
    for (const auto& req : r.requirements) {
      if (req.quantity < 1) throw SpecError("non-positive quantity in " + r.name.str());
      if (req.item == r.name) throw SpecError("self requirement in " + r.name.str());
      if (!find(req.item)) {
        throw SpecError("item " + r.name.str() + " requires undeclared " + req.item.str());
      }
    }
  }

  // Cycle check over the declared requirements.
  std::map<ItemId, int> state;  // 0 new, 1 on stack, 2 done
  std::function<void(const ItemRecord&)> visit = [&](const ItemRecord& r) {
    state[r.name] = 1;
    for (const auto& req : r.requirements) {
      const int s = state[req.item];
      if (s == 1) throw SpecError("requirement cycle through " + req.item.str());
      if (s == 0) visit(*find(req.item));
    }
    state[r.name] = 2;
  };
  for (const auto& r : items) {
    if (state[r.name] == 0) visit(r);
  }

  // Obtainability fixpoint from an empty inventory.
  const DependencyGraph truth = truth_graph();
  std::set<ItemId> obtainable;
  bool grew = true;
  while (grew) {
    grew = false;
    for (const auto& r : items) {
      if (obtainable.count(r.name)) continue;
      const auto& reqs = truth.requirements(r.name);
      const bool ok = std::all_of(reqs.begin(), reqs.end(),
                                  [&](const auto& kv) { return obtainable.count(kv.first) > 0; });
      if (ok) {
        obtainable.insert(r.name);
        grew = true;
      }
    }
  }
  for (const auto& g : goal_groups) {
    for (const auto& item : g.items) {
      if (!find(item)) throw SpecError("goal item not declared: " + item.str());
      if (!obtainable.count(item)) throw SpecError("goal item unreachable: " + item.str());
    }
  }
}

WorldSpec parse_world_spec(const nlohmann::json& doc) {
  WorldSpec spec;
  try {
    spec.horizon = doc.value("horizon", 2000);
    for (const auto& rec : doc.at("items")) {
      ItemRecord r{ItemId(rec.at("name").get<std::string>()), OperationKind::kCraft, {}, 1, false};
      const auto op_text = rec.at("true_operation").get<std::string>();
      auto op = parse_operation(op_text);
      if (!op) throw SpecError("bad operation '" + op_text + "' for " + r.name.str());
      r.true_operation = *op;
      for (const auto& req : rec.value("requirements", nlohmann::json::array())) {
        r.requirements.push_back({ItemId(req.at("item").get<std::string>()),
                                  req.at("quantity").get<int>(), req.value("consumed", true)});
      }
      r.yield = rec.value("yield", 1);
      r.tool_class = rec.value("tool_class", false);
      spec.items.push_back(std::move(r));
    }
    for (const auto& g : doc.value("goal_groups", nlohmann::json::array())) {
      GoalGroup group{g.at("name").get<std::string>(), {}};
      for (const auto& name : g.at("items")) group.items.emplace_back(name.get<std::string>());
      spec.goal_groups.push_back(std::move(group));
    }
  } catch (const nlohmann::json::exception& e) {
    throw SpecError(std::string("tech tree parse error: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw SpecError(e.what());
  }
  std::sort(spec.items.begin(), spec.items.end(),
            [](const ItemRecord& a, const ItemRecord& b) { return a.name < b.name; });
  spec.validate();
  return spec;
}

WorldSpec load_world_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SpecError("cannot open tech tree: " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw SpecError("tech tree parse error in " + path.string() + ": " + e.what());
  }
  return parse_world_spec(doc);
}

nlohmann::json world_spec_to_json(const WorldSpec& spec) {
  nlohmann::json items = nlohmann::json::array();
  for (const auto& r : spec.items) {
    nlohmann::json reqs = nlohmann::json::array();
    for (const auto& req : r.requirements) {
      reqs.push_back({{"item", req.item.str()}, {"quantity", req.quantity}, {"consumed", req.consumed}});
    }
    items.push_back({{"name", r.name.str()},
                     {"true_operation", std::string(to_string(r.true_operation))},
                     {"requirements", reqs},
                     {"yield", r.yield},
                     {"tool_class", r.tool_class}});
  }
  nlohmann::json groups = nlohmann::json::array();
  for (const auto& g : spec.goal_groups) {
    nlohmann::json names = nlohmann::json::array();
    for (const auto& i : g.items) names.push_back(i.str());
    groups.push_back({{"name", g.name}, {"items", names}});
  }
  return {{"horizon", spec.horizon}, {"goal_groups", groups}, {"items", items}};
}

namespace {
bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}
}  // namespace

WorldSpec apply_variant(const WorldSpec& spec, VariantKind variant) {
  WorldSpec out = spec;
  const ItemId ingot("gold_ingot");
  const ItemId nugget("gold_nugget");
  switch (variant) {
    case VariantKind::kVanilla:
      break;
    case VariantKind::kModifiedTrueDependency:
      // gold_nugget keeps its own recipe, otherwise it would require itself.
      for (auto& r : out.items) {
        if (r.name == nugget) continue;
        for (auto& req : r.requirements) {
          if (req.item == ingot) req.item = nugget;
        }
      }
      break;
    case VariantKind::kModifiedTrueOperation:
      for (auto& r : out.items) {
        const auto& n = r.name.str();
        if (ends_with(n, "_hoe") || ends_with(n, "_axe")) r.true_operation = OperationKind::kSmelt;
        if (ends_with(n, "_shovel")) r.true_operation = OperationKind::kMine;
      }
      break;
  }
  out.validate();
  return out;
}

World::World(WorldSpec spec, std::uint64_t seed) : spec_(std::move(spec)), seed_(seed) {
  for (std::size_t i = 0; i < spec_.items.size(); ++i) index_.emplace(spec_.items[i].name, i);
}

void World::reset(std::uint64_t seed) {
  inventory_ = Inventory{};
  step_ = 0;
  seed_ = seed;
}

ActionResult World::step_action(OperationKind op, const ItemId& item) {
  if (exhausted()) throw HorizonError();
  ++step_;
  ActionResult r;
  r.pre = inventory_;

  const char* reason = nullptr;
  auto it = index_.find(item);
  const ItemRecord* rec = it == index_.end() ? nullptr : &spec_.items[it->second];
  if (!rec) {
    reason = "unknown_item";
  } else if (rec->true_operation != op) {
    reason = "wrong_operation";
  } else if (op == OperationKind::kMine) {
    for (const auto& req : rec->requirements) {
      const int need = pickaxe_tier(req.item);
      if (need == 0) continue;
      bool held = false;
      for (const auto& [have, n] : inventory_) {
        if (pickaxe_tier(have) >= need) held = true;
      }
      if (!held) {
        reason = "missing_tool";
        break;
      }
      r.tools_used.insert(req.item);
    }
  } else {
    for (const auto& req : rec->requirements) {
      if (inventory_.count(req.item) < req.quantity) {
        reason = req.consumed ? "missing_ingredient" : "missing_tool";
        break;
      }
      if (!req.consumed) r.tools_used.insert(req.item);
    }
  }

  if (reason) {
    r.tools_used.clear();
  } else {
    if (op != OperationKind::kMine) {
      for (const auto& req : rec->requirements) {
        if (req.consumed) inventory_.remove(req.item, req.quantity);
      }
    }
    const int produced = op == OperationKind::kMine ? 1 : rec->yield;
    inventory_.add(item, produced);
    r.success = true;
    r.obtained = std::make_pair(item, produced);
  }
  r.post = inventory_;
  if (trace_) write_trace(op, item, r, reason);
  return r;
}

SubgoalResult World::execute_subgoal(const Subgoal& subgoal, int retries,
                                     const std::function<void(const ActionResult&)>& on_step) {
  if (subgoal.quantity < 1) throw std::invalid_argument("subgoal quantity must be >= 1");
  if (retries < 1) retries = 1;
  SubgoalResult res;
  int consecutive_failures = 0;
  while (res.obtained < subgoal.quantity) {
    if (exhausted()) return res;
    ActionResult r = step_action(subgoal.op, subgoal.item);
    ++res.steps_used;
    if (on_step) on_step(r);
    if (!r.success) {
      if (++consecutive_failures >= retries) return res;
      continue;
    }
    consecutive_failures = 0;
    if (!res.experienced) {
      res.experienced.emplace(subgoal.item, determine_experienced_requirements(
                                                subgoal.op, subgoal.item, r.pre, r.post, r.tools_used));
    }
    res.obtained += r.obtained->second;
  }
  res.success = true;
  return res;
}

void World::write_trace(OperationKind op, const ItemId& item, const ActionResult& r,
                        const char* reason) const {
  nlohmann::json delta = nlohmann::json::object();
  for (const auto& [i, d] : inventory_delta(r.pre, r.post)) delta[i.str()] = d;
  nlohmann::json line = {{"step", step_},
                         {"op", std::string(to_string(op))},
                         {"item", item.str()},
                         {"success", r.success},
                         {"inventory_delta", delta}};
  if (trace_debug_ && reason) line["reason"] = reason;
  *trace_ << line.dump() << '\n';
}

}  // namespace deplearn
