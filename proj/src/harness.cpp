#include "deplearn/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace deplearn {

namespace {

constexpr std::array<std::string_view, 8> kVariantNames{
    "REPOA",           "ADAM",
    "DECKARD",         "RAND",
    "REPOA_minus_FFOM", "REPOA_minus_Analogy",
    "REPOA_minus_Revision", "REPOA_oracle_graph"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

nlohmann::json requirements_to_json(const RequirementSet& set) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [u, q] : set) j[u.str()] = q;
  return j;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
}

void check_keys(const nlohmann::json& obj, std::initializer_list<std::string_view> allowed,
                const std::string& where) {
  for (const auto& [key, val] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw std::invalid_argument("unknown key '" + key + "' in " + where);
    }
  }
}

}  // namespace

std::string_view to_string(AgentVariant v) noexcept {
  return kVariantNames[static_cast<std::size_t>(v)];
}

std::optional<AgentVariant> parse_agent_variant(std::string_view s) {
  for (std::size_t i = 0; i < kVariantNames.size(); ++i) {
    const auto& name = kVariantNames[i];
    if (s.size() == name.size() &&
        std::equal(s.begin(), s.end(), name.begin(),
                   [](char a, char b) { return std::tolower(a) == std::tolower(b); })) {
      return static_cast<AgentVariant>(i);
    }
  }
  return std::nullopt;
}

FeatureMatrix features(AgentVariant v) noexcept {
  using P = PredictionSource;
  using G = GoalSelector;
  using M = MemoryMode;
  using R = RevisionMode;
  using T = RevisionTrigger;
  switch (v) {
    case AgentVariant::kRepoa: return {P::kProvider, G::kDex, M::kFull, R::kAnalogy, T::kFailureScore};
    case AgentVariant::kAdam:
      return {P::kResourceConstant, G::kRandom, M::kSuccessOnly, R::kNone, T::kConsecutive};
    case AgentVariant::kDeckard:
      return {P::kProvider, G::kDeckard, M::kSuccessOnly, R::kNone, T::kConsecutive};
    case AgentVariant::kRand: return {P::kProvider, G::kRandom, M::kNone, R::kNone, T::kConsecutive};
    case AgentVariant::kRepoaMinusFfom:
      return {P::kProvider, G::kDex, M::kNone, R::kAnalogy, T::kConsecutive};
    case AgentVariant::kRepoaMinusAnalogy:
      return {P::kProvider, G::kDex, M::kFull, R::kProvider, T::kFailureScore};
    case AgentVariant::kRepoaMinusRevision:
      return {P::kProvider, G::kDex, M::kFull, R::kNone, T::kFailureScore};
    case AgentVariant::kRepoaOracleGraph:
      return {P::kTruth, G::kDex, M::kFull, R::kNone, T::kFailureScore};
  }
  return {P::kProvider, G::kDex, M::kFull, R::kAnalogy, T::kFailureScore};
}

void ExperimentConfig::validate() const {
  if (seeds.empty()) throw std::invalid_argument("config: no seeds");
  if (episodes < 1) throw std::invalid_argument("config: episodes must be >= 1");
  if (horizon < 1) throw std::invalid_argument("config: horizon must be >= 1");
  if (subgoal_retries < 1) throw std::invalid_argument("config: subgoal_retries must be >= 1");
  if (hp.margin < 1 || hp.d0 < 1 || hp.c0 < 0 || hp.alpha_s < 1 || hp.alpha_i < 1 || hp.k < 1 ||
      hp.adam_constant < 1) {
    throw std::invalid_argument("config: hyperparameter out of range");
  }
  if (provider.kind != "oracle" && provider.kind != "http") {
    throw std::invalid_argument("config: provider kind must be oracle or http");
  }
  provider.noise.validate();
}

ExperimentConfig config_from_json(const nlohmann::json& doc) {
  check_keys(doc,
             {"name", "world_spec", "seed_plans", "agent", "environment", "seeds", "episodes",
              "horizon", "subgoal_retries", "hyperparameters", "provider", "eval_revision",
              "parallel", "log_graph_updates"},
             "config");
  ExperimentConfig c;
  c.name = doc.value("name", c.name);
  if (doc.contains("world_spec")) c.world_spec = doc["world_spec"].get<std::string>();
  if (doc.contains("seed_plans")) c.seed_plans = doc["seed_plans"].get<std::string>();
  if (doc.contains("agent")) {
    auto v = parse_agent_variant(doc["agent"].get<std::string>());
    if (!v) throw std::invalid_argument("config: unknown agent " + doc["agent"].dump());
    c.agent = *v;
  }
  if (doc.contains("environment")) c.environment = parse_variant(doc["environment"].get<std::string>());
  if (doc.contains("seeds")) {
    const auto& s = doc["seeds"];
    c.seeds.clear();
    if (s.is_array()) {
      for (const auto& x : s) c.seeds.push_back(x.get<std::uint64_t>());
    } else {
      check_keys(s, {"start", "count"}, "seeds");
      const auto start = s.value("start", std::uint64_t{0});
      for (std::uint64_t i = 0; i < s.at("count").get<std::uint64_t>(); ++i) c.seeds.push_back(start + i);
    }
  }
  c.episodes = doc.value("episodes", c.episodes);
  c.horizon = doc.value("horizon", c.horizon);
  c.subgoal_retries = doc.value("subgoal_retries", c.subgoal_retries);
  c.eval_revision = doc.value("eval_revision", c.eval_revision);
  c.parallel = doc.value("parallel", c.parallel);
  c.log_graph_updates = doc.value("log_graph_updates", c.log_graph_updates);
  if (doc.contains("hyperparameters")) {
    const auto& h = doc["hyperparameters"];
    check_keys(h, {"margin", "d0", "c0", "alpha_s", "alpha_i", "k", "adam_constant"}, "hyperparameters");
    c.hp.margin = h.value("margin", c.hp.margin);
    c.hp.d0 = h.value("d0", c.hp.d0);
    c.hp.c0 = h.value("c0", c.hp.c0);
    c.hp.alpha_s = h.value("alpha_s", c.hp.alpha_s);
    c.hp.alpha_i = h.value("alpha_i", c.hp.alpha_i);
    c.hp.k = h.value("k", c.hp.k);
    c.hp.adam_constant = h.value("adam_constant", c.hp.adam_constant);
  }
  if (doc.contains("provider")) {
    const auto& p = doc["provider"];
    check_keys(p, {"kind", "noise", "endpoint", "model", "api_key_env", "timeout_s", "retries", "prompts_dir"},
               "provider");
    c.provider.kind = p.value("kind", c.provider.kind);
    if (p.contains("noise")) {
      const auto& n = p["noise"];
      check_keys(n, {"p_hallucinate_item", "p_omit", "p_extra", "quantity_mean", "quantity_sd", "p_wrong_op"},
                 "noise");
      auto& np = c.provider.noise;
      np.p_hallucinate_item = n.value("p_hallucinate_item", np.p_hallucinate_item);
      np.p_omit = n.value("p_omit", np.p_omit);
      np.p_extra = n.value("p_extra", np.p_extra);
      np.quantity_mean = n.value("quantity_mean", np.quantity_mean);
      np.quantity_sd = n.value("quantity_sd", np.quantity_sd);
      np.p_wrong_op = n.value("p_wrong_op", np.p_wrong_op);
    }
    auto& h = c.provider.http;
    h.endpoint = p.value("endpoint", h.endpoint);
    h.model = p.value("model", h.model);
    if (p.contains("api_key_env")) {
      if (const char* key = std::getenv(p["api_key_env"].get<std::string>().c_str())) h.api_key = key;
    }
    h.timeout_s = p.value("timeout_s", h.timeout_s);
    h.retries = p.value("retries", h.retries);
    if (p.contains("prompts_dir")) h.prompts_dir = p["prompts_dir"].get<std::string>();
  }
  c.provider.http.apply_env();
  c.validate();
  return c;
}

nlohmann::json config_to_json(const ExperimentConfig& c) {
  const auto& n = c.provider.noise;
  nlohmann::json provider = {{"kind", c.provider.kind},
                             {"noise",
                              {{"p_hallucinate_item", n.p_hallucinate_item},
                               {"p_omit", n.p_omit},
                               {"p_extra", n.p_extra},
                               {"quantity_mean", n.quantity_mean},
                               {"quantity_sd", n.quantity_sd},
                               {"p_wrong_op", n.p_wrong_op}}}};
  if (c.provider.kind == "http") {
    provider["endpoint"] = c.provider.http.endpoint;
    provider["model"] = c.provider.http.model;
    provider["timeout_s"] = c.provider.http.timeout_s;
    provider["retries"] = c.provider.http.retries;
  }
  return {{"name", c.name},
          {"world_spec", c.world_spec.string()},
          {"seed_plans", c.seed_plans.string()},
          {"agent", to_string(c.agent)},
          {"environment", to_string(c.environment)},
          {"seeds", c.seeds},
          {"episodes", c.episodes},
          {"horizon", c.horizon},
          {"subgoal_retries", c.subgoal_retries},
          {"hyperparameters",
           {{"margin", c.hp.margin},
            {"d0", c.hp.d0},
            {"c0", c.hp.c0},
            {"alpha_s", c.hp.alpha_s},
            {"alpha_i", c.hp.alpha_i},
            {"k", c.hp.k},
            {"adam_constant", c.hp.adam_constant}}},
          {"provider", provider},
          {"eval_revision", c.eval_revision},
          {"parallel", c.parallel},
          {"log_graph_updates", c.log_graph_updates}};
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config " + path.string());
  auto doc = nlohmann::json::parse(in);
  auto c = config_from_json(doc);
  // Relative paths in a config file are relative to the file.
  const auto base = path.parent_path();
  if (doc.contains("world_spec") && c.world_spec.is_relative()) c.world_spec = base / c.world_spec;
  if (doc.contains("seed_plans") && c.seed_plans.is_relative()) c.seed_plans = base / c.seed_plans;
  auto& prompts = c.provider.http.prompts_dir;
  if (doc.contains("provider") && doc["provider"].contains("prompts_dir") && prompts.is_relative()) {
    prompts = base / prompts;
  }
  return c;
}

Worlds load_worlds(const ExperimentConfig& config) {
  Worlds w{load_world_spec(config.world_spec), {}};
  w.environment = apply_variant(w.knowledge, config.environment);
  w.environment.horizon = config.horizon;
  return w;
}

std::unique_ptr<KnowledgeProvider> make_provider(const ExperimentConfig& config,
                                                 const WorldSpec& knowledge, std::uint64_t seed,
                                                 const SimilarityProvider& similarity) {
  if (config.provider.kind == "http") return std::make_unique<HttpProvider>(config.provider.http);
  return std::make_unique<OracleProvider>(knowledge, config.provider.noise,
                                          derive_seed(seed, "oracle"), similarity);
}

// ---------------------------------------------------------------------------

Learner::Learner(const ExperimentConfig& config, const Worlds& worlds, KnowledgeProvider& provider,
                 const SimilarityProvider& similarity, std::uint64_t seed)
    : config_(config),
      worlds_(worlds),
      features_(features(config.agent)),
      provider_(provider),
      similarity_(similarity),
      seed_(seed),
      world_(worlds.environment, derive_seed(seed, "world")),
      truth_(worlds.environment.truth_graph()),
      goals_(worlds.environment.goal_items()) {
  state_.memory = OperationMemory(features_.memory);
  state_.rng.seed(derive_seed(seed, "agent"));
  log_.seed = seed;
}

double Learner::current_ega() const {
  if (ega_dirty_) {
    ega_cache_ = ega(state_.graph, truth_, goals_);
    ega_dirty_ = false;
  }
  return ega_cache_;
}

void Learner::event(const std::string& type, nlohmann::json body) {
  nlohmann::json e = {{"seed", seed_}, {"episode", episode_}, {"step", recorded_ + 1}, {"type", type}};
  e.update(body);
  log_.events.push_back(e.dump());
}

void Learner::apply_update(const ItemId& item, const char* cause) {
  ega_dirty_ = true;
  if (!config_.log_graph_updates) return;
  event("graph", {{"item", item.str()},
                  {"requirements", requirements_to_json(state_.graph.requirements(item))},
                  {"experienced", state_.experienced.count(item) > 0},
                  {"cause", cause}});
}

void Learner::initialize() {
  const auto plans = load_seed_plans(config_.seed_plans);
  World scratch(worlds_.environment, derive_seed(seed_, "init"));
  KnowledgeProvider* predictor = features_.prediction == PredictionSource::kProvider ? &provider_ : nullptr;
  InitOptions opts;
  opts.k = config_.hp.k;
  opts.subgoal_retries = config_.subgoal_retries;
  auto init = initialize_graph(goals_, plans, scratch, predictor, similarity_, opts);
  state_.graph = std::move(init.graph);
  state_.experienced = std::move(init.experienced);
  state_.resources = std::move(init.resources);
  state_.tools = std::move(init.tools);
  log_.provider_calls += init.provider_calls;
  log_.seed_plan_failures = init.seed_failures;

  if (features_.prediction == PredictionSource::kTruth) {
    for (const auto& v : truth_.nodes()) state_.graph.set_requirements(v, truth_.requirements(v));
    const auto t = worlds_.environment.tool_items();
    state_.tools.insert(t.begin(), t.end());
  }
  if (features_.prediction == PredictionSource::kResourceConstant) refresh_resource_constants();
  ega_dirty_ = true;
  log_.initial_ega = current_ega();

  nlohmann::json exp = nlohmann::json::array();
  for (const auto& v : state_.experienced) exp.push_back(v.str());
  event("init", {{"graph", graph_to_json(state_.graph, state_.tools)},
                 {"experienced", exp},
                 {"provider_calls", init.provider_calls},
                 {"seed_steps", init.seed_steps},
                 {"seed_plan_failures", init.seed_failures},
                 {"ega", current_ega()}});
}

void Learner::load_state(DependencyGraph graph, std::set<ItemId> tools, ExperiencedSet experienced) {
  state_.graph = std::move(graph);
  state_.tools = std::move(tools);
  state_.experienced = std::move(experienced);
  ega_dirty_ = true;
}

void Learner::refresh_resource_constants() {
  if (resources_seen_ == state_.resources.size() && resources_seen_ > 0) return;
  resources_seen_ = state_.resources.size();
  for (const auto& v : state_.graph.nodes()) {
    if (state_.experienced.count(v)) continue;
    RequirementSet r;
    for (const auto& u : state_.resources) {
      if (u != v) r.set(u, config_.hp.adam_constant);
    }
    if (state_.graph.has_requirement_set(v) && state_.graph.requirements(v) == r) continue;
    state_.graph.set_requirements(v, r);
    apply_update(v, "resource_constant");
  }
}

void Learner::predict_new_nodes() {
  const std::size_t cap = 1000;
  while (state_.graph.size() < cap) {
    std::optional<ItemId> next;
    for (const auto& v : state_.graph.nodes()) {
      if (!state_.experienced.count(v) && !state_.graph.has_requirement_set(v)) {
        next = v;
        break;
      }
    }
    if (!next) return;
    const auto ex = experienced_exemplars(state_.graph, state_.experienced, *next, similarity_, config_.hp.k);
    auto pred = provider_.predict_requirements(*next, ex);
    ++log_.provider_calls;
    pred.erase(*next);
    state_.graph.set_requirements(*next, pred);
    apply_update(*next, "prediction");
  }
}

void Learner::observe(const Subgoal& sg, const ActionResult& a) {
  note_consumption(state_.resources, sg.op, a);
  note_tools(state_.tools, sg.op, sg.item, a);
  if (!frozen_ && a.success && !state_.experienced.count(sg.item)) {
    const auto r = determine_experienced_requirements(sg.op, sg.item, a.pre, a.post, a.tools_used);
    if (update_from_experience(state_.graph, state_.experienced, sg.item, r)) {
      apply_update(sg.item, "experience");
    }
  }
  if (!frozen_ && features_.prediction == PredictionSource::kResourceConstant) {
    refresh_resource_constants();
  }
}

void Learner::record_step() {
  ++recorded_;
  log_.metrics.push_back({seed_, episode_, recorded_, current_ega()});
}

std::optional<ItemId> Learner::select_goal() {
  std::optional<GoalChoice> c;
  const char* strategy = "dex";
  switch (features_.selector) {
    case GoalSelector::kDex:
      c = select_goal_dex(state_.graph, state_.experienced, state_.counts, state_.rng);
      break;
    case GoalSelector::kDeckard:
      strategy = "deckard";
      c = select_goal_deckard(state_.graph, state_.experienced, state_.counts, config_.hp.c0, state_.rng);
      if (c) state_.counts.increment(c->item);
      break;
    case GoalSelector::kRandom:
      strategy = "random";
      c = select_goal_random(state_.graph, state_.experienced, state_.rng);
      break;
  }
  if (!c) {
    event("goal", {{"strategy", strategy}, {"chosen", nullptr}});
    return std::nullopt;
  }
  event("goal", {{"strategy", strategy},
                 {"chosen", c->item.str()},
                 {"frontier_size", c->frontier_size},
                 {"fallback", c->fallback}});
  return c->item;
}

void Learner::revise(const ItemId& item, const Subgoal& failed) {
  ++log_.revisions;
  switch (features_.revision) {
    case RevisionMode::kAnalogy: {
      RevisionParams p{config_.hp.c0, config_.hp.alpha_s, config_.hp.alpha_i, config_.hp.k};
      auto stats = revision_by_analogy(state_.graph, state_.experienced, item, state_.counts,
                                       state_.resources, similarity_, p);
      nlohmann::json revised = nlohmann::json::array(), inadmissible = nlohmann::json::array();
      for (const auto& v : stats.revised) revised.push_back(v.str());
      for (const auto& v : stats.inadmissible) inadmissible.push_back(v.str());
      event("revision", {{"item", item.str()}, {"mode", "analogy"}, {"revised", revised},
                         {"inadmissible", inadmissible}, {"count", state_.counts.get(item)}});
      for (const auto& v : stats.revised) apply_update(v, "revision");
      break;
    }
    case RevisionMode::kProvider: {
      state_.counts.increment(item);
      const auto ex = experienced_exemplars(state_.graph, state_.experienced, item, similarity_, config_.hp.k);
      FailedTransition ft{state_.graph.requirements(item), world_.inventory(), failed};
      auto r = provider_.revise_requirements(item, ft, ex);
      ++log_.provider_calls;
      r.erase(item);
      state_.graph.set_requirements(item, r);
      state_.experienced.erase(item);
      event("revision", {{"item", item.str()}, {"mode", "provider"}, {"count", state_.counts.get(item)}});
      apply_update(item, "revision");
      predict_new_nodes();
      break;
    }
    case RevisionMode::kNone:
      if (features_.selector != GoalSelector::kDeckard) state_.counts.increment(item);
      event("revision", {{"item", item.str()}, {"mode", "none"}, {"count", state_.counts.get(item)}});
      break;
  }
}

bool Learner::triggered(const ItemId& item) const {
  if (features_.trigger == RevisionTrigger::kConsecutive) {
    auto it = state_.consecutive_failures.find(item);
    return it != state_.consecutive_failures.end() && it->second >= config_.hp.d0;
  }
  return should_revise(state_.memory, item, config_.hp.d0);
}

void Learner::check_single_valid(const ItemId& item) const {
  int valid = 0;
  for (auto op : kAllOperations) {
    valid += classify(state_.memory, item, op, config_.hp.margin) == OpClassification::kValid;
  }
  if (valid > 1) throw std::logic_error("more than one valid operation for " + item.str());
}

bool Learner::pursue(std::optional<ItemId> goal, bool fixed) {
  while (goal && !world_.exhausted()) {
    const auto agg = aggregate_requirements(state_.graph, *goal, world_.inventory(), state_.tools);
    if (agg.cycle_detected) event("cycle", {{"goal", goal->str()}});
    const Plan plan = make_plan(agg, state_.memory, provider_, similarity_, config_.hp.k, config_.hp.margin);
    log_.provider_calls += plan.provider_calls;
    if (plan.fallbacks) event("fallback", {{"goal", goal->str()}, {"count", plan.fallbacks}});
    nlohmann::json steps = nlohmann::json::array();
    for (const auto& sg : plan.subgoals) steps.push_back(to_string(sg));
    event("plan", {{"goal", goal->str()}, {"subgoals", steps}});

    bool completed = true;
    for (const auto& sg : plan.subgoals) {
      if (world_.exhausted()) {
        completed = false;
        break;
      }
      const auto r = world_.execute_subgoal(sg, config_.subgoal_retries, [&](const ActionResult& a) {
        observe(sg, a);
        record_step();
      });
      if (r.success) {
        state_.memory.record(sg.item, sg.op, true);
        state_.consecutive_failures[sg.item] = 0;
        check_single_valid(sg.item);
        continue;
      }
      completed = false;
      if (world_.exhausted() && r.obtained > 0) break;  // cut off, not a failure
      state_.memory.record(sg.item, sg.op, false);
      ++state_.consecutive_failures[sg.item];
      event("failure", {{"subgoal", to_string(sg)}, {"score", total_failure_score(state_.memory, sg.item)}});
      if (triggered(sg.item)) {
        if (!frozen_) revise(sg.item, sg);
        state_.memory.reset_item(sg.item);
        state_.consecutive_failures[sg.item] = 0;
        event("reset", {{"item", sg.item.str()}});
        if (!fixed) goal = select_goal();
      }
      break;
    }
    if (completed) {
      event("goal_success", {{"goal", goal->str()}});
      if (fixed) return true;
      goal = select_goal();
    }
  }
  return false;
}

bool Learner::run_episode(int episode) {
  episode_ = episode;
  world_.reset(derive_seed(seed_, "episode", "", static_cast<std::uint64_t>(episode)));
  const int end = recorded_ + world_.horizon();
  bool ok = true;
  try {
    pursue(select_goal(), false);
  } catch (const ProviderError& e) {
    ok = false;
    log_.faults.push_back(e.what());
    event("fault", {{"what", e.what()}});
  }
  while (recorded_ < end) record_step();
  event("episode_end", {{"ega", current_ega()}});
  return ok;
}

std::pair<bool, int> Learner::run_goal_episode(const ItemId& goal, bool revise_graph) {
  frozen_ = !revise_graph;
  episode_ = 0;
  world_.reset(derive_seed(seed_, "eval", goal.str()));
  bool ok = false;
  try {
    ok = pursue(goal, true);
  } catch (const ProviderError& e) {
    log_.faults.push_back(e.what());
  }
  return {ok, world_.step()};
}

// ---------------------------------------------------------------------------

std::string ExperimentLog::metrics_csv() const {
  std::string out = "seed,episode,step,ega\n";
  for (const auto& s : seeds) {
    for (const auto& m : s.metrics) {
      out += std::to_string(m.seed) + "," + std::to_string(m.episode) + "," + std::to_string(m.step) +
             "," + fmt(m.ega) + "\n";
    }
  }
  return out;
}

std::string ExperimentLog::events_jsonl() const {
  std::string out;
  for (const auto& s : seeds) {
    for (const auto& e : s.events) out += e + "\n";
  }
  return out;
}

void ExperimentLog::write(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir / "graphs");
  write_text(dir / "metrics.csv", metrics_csv());
  write_text(dir / "events.jsonl", events_jsonl());
  write_text(dir / "config.json", config_to_json(config).dump(2) + "\n");
  nlohmann::json summary = nlohmann::json::array();
  for (const auto& s : seeds) {
    write_text(dir / "graphs" / ("seed_" + std::to_string(s.seed) + ".json"), s.final_graph.dump(1) + "\n");
    summary.push_back({{"seed", s.seed},
                       {"initial_ega", s.initial_ega},
                       {"final_ega", s.metrics.empty() ? s.initial_ega : s.metrics.back().ega},
                       {"provider_calls", s.provider_calls},
                       {"revisions", s.revisions},
                       {"seed_plan_failures", s.seed_plan_failures},
                       {"faults", s.faults}});
  }
  write_text(dir / "summary.json", summary.dump(2) + "\n");
}

SeedLog run_learning_seed(const ExperimentConfig& config, const Worlds& worlds, std::uint64_t seed) {
  LexicalSimilarity similarity;
  auto provider = make_provider(config, worlds.knowledge, seed, similarity);
  Learner learner(config, worlds, *provider, similarity, seed);
  learner.initialize();
  for (int ep = 0; ep < config.episodes; ++ep) learner.run_episode(ep);
  auto log = std::move(learner.log());
  log.final_graph = learned_graph_json(learner.state());
  return log;
}

nlohmann::json learned_graph_json(const AgentState& state) {
  auto j = graph_to_json(state.graph, state.tools);
  nlohmann::json exp = nlohmann::json::array();
  for (const auto& v : state.experienced) exp.push_back(v.str());
  j["experienced"] = exp;
  return j;
}

ExperimentLog run_learning(const ExperimentConfig& config) {
  config.validate();
  const Worlds worlds = load_worlds(config);
  ExperimentLog log{config, std::vector<SeedLog>(config.seeds.size())};
  std::vector<std::exception_ptr> errors(config.seeds.size());
  const auto n = static_cast<long>(config.seeds.size());
#pragma omp parallel for schedule(dynamic) if (config.parallel)
  for (long i = 0; i < n; ++i) {
    try {
      log.seeds[i] = run_learning_seed(config, worlds, config.seeds[i]);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return log;
}

LearnedGraph load_learned_graph(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read graph " + path.string());
  const auto doc = nlohmann::json::parse(in);
  LearnedGraph g{graph_from_json(doc), {}, {}};
  for (const auto& rec : doc.at("items")) {
    if (rec.value("tool_class", false)) g.tools.insert(ItemId(rec.at("name").get<std::string>()));
  }
  if (doc.contains("experienced")) {
    for (const auto& v : doc["experienced"]) g.experienced.insert(ItemId(v.get<std::string>()));
  }
  return g;
}

std::vector<GoalResult> evaluate_sr(const ExperimentConfig& config,
                                    const std::optional<LearnedGraph>& learned,
                                    const std::vector<ItemId>& goals) {
  config.validate();
  const Worlds worlds = load_worlds(config);
  const auto names = worlds.environment.item_names();
  for (const auto& g : goals) {
    if (!names.count(g)) throw std::invalid_argument("unknown goal: " + g.str());
  }
  const DependencyGraph truth = worlds.environment.truth_graph();
  const auto n_goals = goals.size();
  const auto total = static_cast<long>(config.seeds.size() * n_goals);
  std::vector<GoalResult> results(static_cast<std::size_t>(total));
  std::vector<std::exception_ptr> errors(results.size());

#pragma omp parallel for schedule(dynamic) if (config.parallel)
  for (long i = 0; i < total; ++i) {
    try {
      const auto seed = config.seeds[static_cast<std::size_t>(i) / n_goals];
      const auto& goal = goals[static_cast<std::size_t>(i) % n_goals];
      LexicalSimilarity similarity;
      auto provider = make_provider(config, worlds.knowledge, derive_seed(seed, "eval", goal.str()), similarity);
      Learner agent(config, worlds, *provider, similarity, seed);
      if (learned) {
        agent.load_state(learned->graph, learned->tools, learned->experienced);
      } else {
        ExperiencedSet all(truth.nodes().begin(), truth.nodes().end());
        agent.load_state(truth, worlds.environment.tool_items(), all);
      }
      auto [ok, steps] = agent.run_goal_episode(goal, config.eval_revision);
      results[i] = {goal, worlds.environment.group_of(goal), seed, ok, steps};
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

std::string sr_csv(const std::vector<GoalResult>& results) {
  std::string out = "goal,group,seed,success,steps_used\n";
  for (const auto& r : results) {
    out += r.goal.str() + "," + r.group + "," + std::to_string(r.seed) + "," + (r.success ? "1" : "0") +
           "," + std::to_string(r.steps_used) + "\n";
  }
  return out;
}

std::vector<double> replay_ega(const std::vector<std::string>& events, const DependencyGraph& truth,
                               const std::vector<ItemId>& goals) {
  DependencyGraph g;
  int last = 0;
  std::vector<std::pair<int, nlohmann::json>> updates;
  for (const auto& line : events) {
    auto e = nlohmann::json::parse(line);
    const auto type = e.at("type").get<std::string>();
    if (type == "init") {
      g = graph_from_json(e.at("graph"));
    } else if (type == "graph") {
      updates.emplace_back(e.at("step").get<int>(), e);
    } else if (type == "episode_end") {
      last = std::max(last, e.at("step").get<int>() - 1);
    }
  }
  std::vector<double> out;
  std::size_t next = 0;
  for (int t = 1; t <= last; ++t) {
    for (; next < updates.size() && updates[next].first <= t; ++next) {
      const auto& e = updates[next].second;
      RequirementSet r;
      for (const auto& [u, q] : e.at("requirements").items()) r.set(ItemId(u), q.get<int>());
      g.set_requirements(ItemId(e.at("item").get<std::string>()), r);
    }
    out.push_back(ega(g, truth, goals));
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

struct Curve {
  std::vector<std::vector<double>> by_step;  // by_step[t-1] = values across seeds
};

Curve read_curve(const std::filesystem::path& metrics) {
  std::ifstream in(metrics);
  if (!in) throw std::runtime_error("missing " + metrics.string());
  std::string line;
  std::getline(in, line);
  if (line != "seed,episode,step,ega") throw std::runtime_error("corrupt header in " + metrics.string());
  Curve c;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 4) throw std::runtime_error("corrupt row in " + metrics.string() + ": " + line);
    const auto step = std::stoul(cells[2]);
    const double v = std::stod(cells[3]);
    if (step < 1 || !(v >= 0.0 && v <= 1.0)) throw std::runtime_error("corrupt row: " + line);
    if (c.by_step.size() < step) c.by_step.resize(step);
    c.by_step[step - 1].push_back(v);
  }
  if (c.by_step.empty()) throw std::runtime_error("no rows in " + metrics.string());
  return c;
}

std::string svg_chart(const std::vector<std::pair<std::string, std::vector<double>>>& series) {
  const double w = 640, h = 400, pad = 40;
  std::size_t steps = 1;
  for (const auto& [n, s] : series) steps = std::max(steps, s.size());
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                 "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<line x1=\"" << pad << "\" y1=\"" << h - pad << "\" x2=\"" << w - pad << "\" y2=\"" << h - pad
    << "\" stroke=\"black\"/>\n<line x1=\"" << pad << "\" y1=\"" << pad << "\" x2=\"" << pad
    << "\" y2=\"" << h - pad << "\" stroke=\"black\"/>\n"
    << "<text x=\"" << w / 2 << "\" y=\"" << h - 8 << "\" font-size=\"12\">step (0.." << steps
    << ")</text>\n<text x=\"4\" y=\"" << pad - 8 << "\" font-size=\"12\">EGA</text>\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& [name, s] = series[i];
    const auto* color = colors[i % 8];
    o << "<polyline fill=\"none\" stroke=\"" << color << "\" points=\"";
    const std::size_t stride = std::max<std::size_t>(1, s.size() / 400);
    for (std::size_t t = 0; t < s.size(); t += stride) {
      o << pad + (w - 2 * pad) * double(t + 1) / double(steps) << ","
        << (h - pad) - (h - 2 * pad) * s[t] << " ";
    }
    o << "\"/>\n<text x=\"" << w - pad - 150 << "\" y=\"" << pad + 16 * (i + 1) << "\" fill=\"" << color
      << "\" font-size=\"12\">" << name << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace

void emit_report(const std::vector<std::filesystem::path>& runs, const std::filesystem::path& out_dir,
                 const WorldSpec& spec) {
  if (runs.empty()) throw std::invalid_argument("emit_report: no runs");
  std::filesystem::create_directories(out_dir);
  std::string curve = "run,step,mean,std,n\n";
  std::string sr = "run,group,episodes,successes,sr\n";
  std::vector<std::pair<std::string, std::vector<double>>> series;
  for (const auto& run : runs) {
    const auto name = std::filesystem::path(run).lexically_normal().filename().string().empty()
                          ? std::filesystem::path(run).lexically_normal().parent_path().filename().string()
                          : std::filesystem::path(run).lexically_normal().filename().string();
    const auto c = read_curve(run / "metrics.csv");
    std::vector<double> means;
    for (std::size_t t = 0; t < c.by_step.size(); ++t) {
      const auto& v = c.by_step[t];
      double mean = 0;
      for (double x : v) mean += x;
      mean /= double(v.size());
      double var = 0;
      for (double x : v) var += (x - mean) * (x - mean);
      const double sd = v.size() > 1 ? std::sqrt(var / double(v.size() - 1)) : 0.0;
      curve += name + "," + std::to_string(t + 1) + "," + fmt(mean) + "," + fmt(sd) + "," +
               std::to_string(v.size()) + "\n";
      means.push_back(mean);
    }
    series.emplace_back(name, std::move(means));

    const auto sr_path = run / "sr.csv";
    if (!std::filesystem::exists(sr_path)) continue;
    std::ifstream in(sr_path);
    std::string line;
    std::getline(in, line);
    std::map<std::string, std::pair<int, int>> by_group;
    while (std::getline(in, line)) {
      const auto cells = split_csv(line);
      if (cells.size() != 5) throw std::runtime_error("corrupt row in " + sr_path.string());
      const auto group = spec.group_of(ItemId(cells[0]));
      auto& [n, k] = by_group[group.empty() ? "other" : group];
      ++n;
      k += cells[3] == "1";
      auto& [tn, tk] = by_group["overall"];
      ++tn;
      tk += cells[3] == "1";
    }
    std::vector<std::string> order;
    for (const auto& g : spec.goal_groups) order.push_back(g.name);
    order.push_back("other");
    order.push_back("overall");
    for (const auto& g : order) {
      auto it = by_group.find(g);
      if (it == by_group.end()) continue;
      const auto [n, k] = it->second;
      sr += name + "," + g + "," + std::to_string(n) + "," + std::to_string(k) + "," +
            fmt(double(k) / double(n)) + "\n";
    }
  }
  write_text(out_dir / "ega_curve.csv", curve);
  write_text(out_dir / "sr_by_group.csv", sr);
  write_text(out_dir / "ega_curve.svg", svg_chart(series));
}

}  // namespace deplearn
