#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "deplearn/adl.hpp"
#include "deplearn/explore.hpp"
#include "deplearn/ffom.hpp"
#include "deplearn/http_provider.hpp"
#include "deplearn/knowledge.hpp"
#include "deplearn/textworld.hpp"

namespace deplearn {

enum class AgentVariant {
  kRepoa,
  kAdam,
  kDeckard,
  kRand,
  kRepoaMinusFfom,
  kRepoaMinusAnalogy,
  kRepoaMinusRevision,
  kRepoaOracleGraph,
};
inline constexpr std::array<AgentVariant, 8> kAllAgentVariants{
    AgentVariant::kRepoa,          AgentVariant::kAdam,
    AgentVariant::kDeckard,        AgentVariant::kRand,
    AgentVariant::kRepoaMinusFfom, AgentVariant::kRepoaMinusAnalogy,
    AgentVariant::kRepoaMinusRevision, AgentVariant::kRepoaOracleGraph};

std::string_view to_string(AgentVariant v) noexcept;
std::optional<AgentVariant> parse_agent_variant(std::string_view s);

enum class PredictionSource { kProvider, kResourceConstant, kTruth };
enum class GoalSelector { kDex, kDeckard, kRandom };
enum class RevisionMode { kAnalogy, kProvider, kNone };
/// kFailureScore uses the memory's failure total; kConsecutive counts plain
/// back-to-back subgoal failures per item, for agents without failure memory.
enum class RevisionTrigger { kFailureScore, kConsecutive };

struct FeatureMatrix {
  PredictionSource prediction;
  GoalSelector selector;
  MemoryMode memory;
  RevisionMode revision;
  RevisionTrigger trigger;
};

FeatureMatrix features(AgentVariant v) noexcept;

struct Hyperparams {
  int margin = 2;
  int d0 = 6;
  int c0 = 3;
  int alpha_s = 2;
  int alpha_i = 8;
  std::size_t k = 3;
  int adam_constant = 8;
};

struct ProviderConfig {
  std::string kind = "oracle";  // oracle | http
  NoiseProfile noise;
  HttpConfig http;
};

struct ExperimentConfig {
  std::string name = "run";
  std::filesystem::path world_spec = DEPLEARN_DATA_DIR "/techtree.json";
  std::filesystem::path seed_plans = DEPLEARN_DATA_DIR "/seed_plans";
  AgentVariant agent = AgentVariant::kRepoa;
  VariantKind environment = VariantKind::kVanilla;
  std::vector<std::uint64_t> seeds{0};
  int episodes = 1;
  int horizon = 2000;
  int subgoal_retries = 1;
  Hyperparams hp;
  ProviderConfig provider;
  bool eval_revision = false;  // keep revising during evaluation
  bool parallel = true;
  bool log_graph_updates = true;

  void validate() const;
};

ExperimentConfig config_from_json(const nlohmann::json& doc);
nlohmann::json config_to_json(const ExperimentConfig& config);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Everything the agent carries between episodes.
struct AgentState {
  DependencyGraph graph;
  ExperiencedSet experienced;
  ResourceSet resources;
  std::set<ItemId> tools;  // items seen required but not consumed
  ExplorationCounts counts;
  OperationMemory memory;
  std::map<ItemId, int> consecutive_failures;
  Rng rng;
};

struct MetricRow {
  std::uint64_t seed;
  int episode;
  int step;  // cumulative environment step for this seed, starting at 1
  double ega;
};

struct SeedLog {
  std::uint64_t seed = 0;
  std::vector<MetricRow> metrics;
  std::vector<std::string> events;  // JSON lines
  nlohmann::json final_graph;
  double initial_ega = 0.0;
  int provider_calls = 0;
  int revisions = 0;
  std::vector<std::string> seed_plan_failures;  // "plan: subgoal"
  std::vector<std::string> faults;
};

struct ExperimentLog {
  ExperimentConfig config;
  std::vector<SeedLog> seeds;

  std::string metrics_csv() const;
  std::string events_jsonl() const;
  void write(const std::filesystem::path& dir) const;
};

/// Counts provider calls by kind; forwards to the wrapped provider.
class CountingProvider final : public KnowledgeProvider {
 public:
  explicit CountingProvider(KnowledgeProvider& inner) : inner_(inner) {}
  RequirementSet predict_requirements(const ItemId& item,
                                      std::span<const Exemplar> exemplars) override {
    ++predict_calls;
    return inner_.predict_requirements(item, exemplars);
  }
  OperationKind select_operation(const ItemId& item, std::span<const OperationExemplar> exemplars,
                                 std::span<const OperationKind> candidates) override {
    ++select_calls;
    return inner_.select_operation(item, exemplars, candidates);
  }
  RequirementSet revise_requirements(const ItemId& item, const FailedTransition& failed,
                                     std::span<const Exemplar> exemplars) override {
    ++revise_calls;
    return inner_.revise_requirements(item, failed, exemplars);
  }
  int predict_calls = 0;
  int select_calls = 0;
  int revise_calls = 0;

 private:
  KnowledgeProvider& inner_;
};

/// The experiment's world spec with the environment variant applied, and the
/// vanilla spec the provider draws its knowledge from.
struct Worlds {
  WorldSpec knowledge;
  WorldSpec environment;
};
Worlds load_worlds(const ExperimentConfig& config);

std::unique_ptr<KnowledgeProvider> make_provider(const ExperimentConfig& config,
                                                 const WorldSpec& knowledge, std::uint64_t seed,
                                                 const SimilarityProvider& similarity);

/// One learner from initialization through every episode.
class Learner {
 public:
  Learner(const ExperimentConfig& config, const Worlds& worlds, KnowledgeProvider& provider,
          const SimilarityProvider& similarity, std::uint64_t seed);

  /// Seed plans plus the variant's initial requirement sets.
  void initialize();
  /// Replaces the graph, e.g. with a checkpoint for evaluation.
  void load_state(DependencyGraph graph, std::set<ItemId> tools, ExperiencedSet experienced);
  /// One learning episode. Pads the metric stream to the horizon; returns
  /// false on a provider fault.
  bool run_episode(int episode);
  /// Pursues a fixed goal in a fresh episode; returns (success, steps used).
  /// The graph stays frozen unless `revise_graph`.
  std::pair<bool, int> run_goal_episode(const ItemId& goal, bool revise_graph);

  const AgentState& state() const noexcept { return state_; }
  SeedLog& log() noexcept { return log_; }
  double current_ega() const;

 private:
  void event(const std::string& type, nlohmann::json body);
  void apply_update(const ItemId& item, const char* cause);
  void observe(const Subgoal& sg, const ActionResult& a);
  void record_step();
  std::optional<ItemId> select_goal();
  void revise(const ItemId& item, const Subgoal& failed);
  bool triggered(const ItemId& item) const;
  void check_single_valid(const ItemId& item) const;
  bool pursue(std::optional<ItemId> goal, bool fixed);
  void refresh_resource_constants();
  void predict_new_nodes();

  const ExperimentConfig& config_;
  const Worlds& worlds_;
  FeatureMatrix features_;
  KnowledgeProvider& provider_;
  const SimilarityProvider& similarity_;
  std::uint64_t seed_;
  World world_;
  DependencyGraph truth_;
  std::vector<ItemId> goals_;
  AgentState state_;
  SeedLog log_;
  int episode_ = 0;
  int recorded_ = 0;  // last step with a metric row
  bool frozen_ = false;
  std::size_t resources_seen_ = 0;
  mutable bool ega_dirty_ = true;
  mutable double ega_cache_ = 0.0;
};

/// Checkpoint form of a learned graph: graph JSON plus the experienced list.
nlohmann::json learned_graph_json(const AgentState& state);

/// Runs every seed. With config.parallel the seeds are spread over OpenMP
/// threads; output is identical to the serial path.
ExperimentLog run_learning(const ExperimentConfig& config);
SeedLog run_learning_seed(const ExperimentConfig& config, const Worlds& worlds,
                          std::uint64_t seed);

struct GoalResult {
  ItemId goal{"none"};
  std::string group;
  std::uint64_t seed = 0;
  bool success = false;
  int steps_used = 0;
};

struct LearnedGraph {
  DependencyGraph graph;
  std::set<ItemId> tools;
  ExperiencedSet experienced;
};
LearnedGraph load_learned_graph(const std::filesystem::path& path);

/// Fixed-goal episodes on a frozen graph (unless config.eval_revision). A null
/// `learned` uses the environment's true graph. Throws std::invalid_argument
/// for goals outside the spec.
std::vector<GoalResult> evaluate_sr(const ExperimentConfig& config,
                                    const std::optional<LearnedGraph>& learned,
                                    const std::vector<ItemId>& goals);
std::string sr_csv(const std::vector<GoalResult>& results);

/// Reads metrics.csv (and sr.csv when present) from each run directory and
/// writes ega_curve.csv (mean and std across seeds per step) and
/// sr_by_group.csv into `out_dir`.
void emit_report(const std::vector<std::filesystem::path>& runs,
                 const std::filesystem::path& out_dir, const WorldSpec& spec);

/// Replays graph events to recompute the EGA series of one seed.
std::vector<double> replay_ega(const std::vector<std::string>& events, const DependencyGraph& truth,
                               const std::vector<ItemId>& goals);

}  // namespace deplearn
