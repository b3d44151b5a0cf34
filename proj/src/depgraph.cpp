#include "deplearn/depgraph.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <queue>

#include <nlohmann/json.hpp>

namespace deplearn {

namespace {
const RequirementSet kEmptyRequirements;
const std::set<ItemId> kNoDependents;
}  // namespace

void DependencyGraph::add_node(const ItemId& item) { nodes_.insert(item); }

const RequirementSet& DependencyGraph::requirements(const ItemId& item) const noexcept {
  auto it = incoming_.find(item);
  return it == incoming_.end() ? kEmptyRequirements : it->second;
}

void DependencyGraph::set_requirements(const ItemId& item, const RequirementSet& reqs) {
  if (reqs.contains(item)) {
    throw std::invalid_argument("self edge on " + item.str());
  }
  if (auto it = incoming_.find(item); it != incoming_.end()) {
    for (const auto& [src, q] : it->second) {
      auto out = outgoing_.find(src);
      out->second.erase(item);
      if (out->second.empty()) outgoing_.erase(out);
    }
    incoming_.erase(it);
  }
  nodes_.insert(item);
  assigned_.insert(item);
  if (reqs.empty()) return;
  for (const auto& [src, q] : reqs) {
    nodes_.insert(src);
    outgoing_[src].insert(item);
  }
  incoming_.emplace(item, reqs);
}

const std::set<ItemId>& DependencyGraph::dependents(const ItemId& item) const noexcept {
  auto it = outgoing_.find(item);
  return it == outgoing_.end() ? kNoDependents : it->second;
}

std::vector<Edge> DependencyGraph::edges() const {
  std::vector<Edge> out;
  for (const auto& [target, reqs] : incoming_) {
    for (const auto& [src, q] : reqs) out.push_back({src, q, target});
  }
  return out;
}

std::size_t DependencyGraph::edge_count() const noexcept {
  std::size_t n = 0;
  for (const auto& [target, reqs] : incoming_) n += reqs.size();
  return n;
}

bool update_from_experience(DependencyGraph& graph, ExperiencedSet& experienced,
                            const ItemId& item, const RequirementSet& observed) {
  if (experienced.count(item)) return false;
  graph.set_requirements(item, observed);
  experienced.insert(item);
  return true;
}

int pickaxe_tier(const ItemId& item) noexcept {
  const auto& s = item.str();
  if (s == "wooden_pickaxe") return 1;
  if (s == "stone_pickaxe") return 2;
  if (s == "iron_pickaxe") return 3;
  return 0;
}

RequirementSet determine_experienced_requirements(OperationKind op, const ItemId& item,
                                                  const Inventory& pre, const Inventory& post,
                                                  const std::set<ItemId>& tools_used) {
  RequirementSet out;
  if (op == OperationKind::kMine) {
    const ItemId* best = nullptr;
    int best_tier = 0;
    for (const auto& [held, n] : post) {
      const int t = pickaxe_tier(held);
      if (t > best_tier) {
        best_tier = t;
        best = &held;
      }
    }
    if (best) out.set(*best, 1);
    return out;
  }
  if (post.count(item) <= pre.count(item)) {
    throw std::logic_error("no units of " + item.str() + " produced");
  }
  for (const auto& [held, delta] : inventory_delta(pre, post)) {
    if (delta < 0) out.set(held, -delta);
  }
  for (const auto& tool : tools_used) {
    if (!out.contains(tool) && tool != item) out.set(tool, 1);
  }
  return out;
}

AggregatedRequirements aggregate_requirements(const DependencyGraph& graph, const ItemId& goal,
                                              const Inventory& inventory,
                                              const std::set<ItemId>& tool_items) {
  if (!graph.contains(goal)) throw UnknownItemError(goal);

  AggregatedRequirements result;

  // DFS over prerequisites; an edge into a node still on the stack closes a
  // cycle and is dropped.
  std::map<ItemId, std::vector<std::pair<ItemId, int>>> kept;  // target -> (source, q)
  std::set<ItemId> done;
  std::set<ItemId> on_stack;
  std::function<void(const ItemId&)> visit = [&](const ItemId& v) {
    on_stack.insert(v);
    auto& edges = kept[v];
    for (const auto& [u, q] : graph.requirements(v)) {
      if (on_stack.count(u)) {
        result.cycle_detected = true;
        continue;
      }
      edges.emplace_back(u, q);
      if (!done.count(u)) visit(u);
    }
    on_stack.erase(v);
    done.insert(v);
  };
  visit(goal);

  // Kahn order, prerequisites first, smallest name first.
  std::map<ItemId, int> indegree;
  std::map<ItemId, std::vector<ItemId>> users;  // source -> targets
  for (const auto& [v, edges] : kept) {
    indegree.try_emplace(v, 0);
    for (const auto& [u, q] : edges) {
      indegree[v] += 1;
      users[u].push_back(v);
    }
  }
  std::priority_queue<ItemId, std::vector<ItemId>, std::greater<>> ready;
  for (const auto& [v, d] : indegree) {
    if (d == 0) ready.push(v);
  }
  std::vector<ItemId> order;
  while (!ready.empty()) {
    ItemId v = ready.top();
    ready.pop();
    order.push_back(v);
    for (const auto& w : users[v]) {
      if (--indegree[w] == 0) ready.push(w);
    }
  }

  std::map<ItemId, long long> need;
  need[goal] = 1;
  std::map<ItemId, long long> net;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const ItemId& v = *it;
    long long n = need[v];
    if (tool_items.count(v)) n = std::min<long long>(n, 1);
    n = std::max<long long>(0, n - inventory.count(v));
    net[v] = n;
    if (n == 0) continue;
    for (const auto& [u, q] : kept[v]) need[u] += q * n;
  }

  for (const auto& v : order) {
    if (v == goal) continue;
    if (net[v] > 0) result.steps.emplace_back(static_cast<int>(net[v]), v);
  }
  result.steps.emplace_back(1, goal);
  return result;
}

std::set<ItemId> descendants(const DependencyGraph& graph, const ItemId& item) {
  if (!graph.contains(item)) throw UnknownItemError(item);
  std::set<ItemId> seen;
  std::deque<ItemId> queue{item};
  while (!queue.empty()) {
    ItemId v = queue.front();
    queue.pop_front();
    for (const auto& w : graph.dependents(v)) {
      if (w == item || seen.count(w)) continue;
      seen.insert(w);
      queue.push_back(w);
    }
  }
  return seen;
}

double ega(const DependencyGraph& learned, const DependencyGraph& truth,
           const std::vector<ItemId>& goal_items) {
  if (goal_items.empty()) throw std::invalid_argument("ega needs at least one goal item");
  std::size_t hits = 0;
  for (const auto& v : goal_items) {
    if (learned.requirements(v) == truth.requirements(v)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(goal_items.size());
}

nlohmann::json graph_to_json(const DependencyGraph& graph, const std::set<ItemId>& tool_items) {
  nlohmann::json items = nlohmann::json::array();
  for (const auto& v : graph.nodes()) {
    nlohmann::json reqs = nlohmann::json::array();
    for (const auto& [u, q] : graph.requirements(v)) {
      reqs.push_back({{"item", u.str()}, {"quantity", q}, {"consumed", !tool_items.count(u)}});
    }
    nlohmann::json rec = {{"name", v.str()},
                          {"requirements", reqs},
                          {"tool_class", tool_items.count(v) > 0}};
    if (!graph.has_requirement_set(v)) rec["unassigned"] = true;
    items.push_back(std::move(rec));
  }
  return {{"items", items}};
}

DependencyGraph graph_from_json(const nlohmann::json& doc) {
  DependencyGraph g;
  for (const auto& rec : doc.at("items")) {
    ItemId v(rec.at("name").get<std::string>());
    g.add_node(v);
    if (rec.value("unassigned", false)) continue;
    RequirementSet reqs;
    for (const auto& r : rec.at("requirements")) {
      reqs.set(ItemId(r.at("item").get<std::string>()), r.at("quantity").get<int>());
    }
    g.set_requirements(v, reqs);
  }
  return g;
}

}  // namespace deplearn
