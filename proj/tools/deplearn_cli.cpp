#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "deplearn/harness.hpp"

using namespace deplearn;

namespace {

struct Overrides {
  std::string agent;
  std::string environment;
  int seeds = 0;
  int episodes = 0;
  bool serial = false;
};

void add_overrides(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--agent", o.agent, "override the agent variant");
  cmd->add_option("--environment", o.environment, "override the environment variant");
  cmd->add_option("--seeds", o.seeds, "use seeds 0..N-1");
  cmd->add_option("--episodes", o.episodes, "override the episode count");
  cmd->add_flag("--serial", o.serial, "disable OpenMP over seeds");
}

ExperimentConfig resolve(const std::string& path, const Overrides& o) {
  ExperimentConfig c = path.empty() ? ExperimentConfig{} : load_config(path);
  if (!o.agent.empty()) {
    auto v = parse_agent_variant(o.agent);
    if (!v) throw std::invalid_argument("unknown agent " + o.agent);
    c.agent = *v;
  }
  if (!o.environment.empty()) c.environment = parse_variant(o.environment);
  if (o.seeds > 0) {
    c.seeds.clear();
    for (int i = 0; i < o.seeds; ++i) c.seeds.push_back(static_cast<std::uint64_t>(i));
  }
  if (o.episodes > 0) c.episodes = o.episodes;
  if (o.serial) c.parallel = false;
  c.validate();
  return c;
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learns crafting dependencies in a text crafting world"};
  app.require_subcommand(1);

  std::string config_path, out_dir, graph_arg, run_dir;
  std::vector<std::string> runs, goal_list;
  Overrides ov;

  auto* learn = app.add_subcommand("learn", "run learning episodes and log EGA");
  learn->add_option("--config", config_path, "experiment config JSON")->check(CLI::ExistingFile);
  learn->add_option("--out", out_dir, "output directory")->required();
  add_overrides(learn, ov);

  auto* eval = app.add_subcommand("eval", "success rate over fixed goals");
  eval->add_option("--config", config_path, "experiment config JSON")->check(CLI::ExistingFile);
  eval->add_option("--graph", graph_arg, "learned graph JSON, or 'oracle'")->required();
  eval->add_option("--out", out_dir, "output directory")->required();
  eval->add_option("--goals", goal_list, "goal items (default: every goal in the spec)");
  add_overrides(eval, ov);

  auto* compare = app.add_subcommand("compare", "EGA curves and SR tables across runs");
  compare->add_option("--runs", runs, "run directories")->required();
  compare->add_option("--out", out_dir, "output directory")->required();
  compare->add_option("--config", config_path, "config naming the world spec")->check(CLI::ExistingFile);

  auto* plots = app.add_subcommand("emit-plots", "curve CSV and SVG for one run");
  plots->add_option("--run", run_dir, "run directory")->required();

  int cal_seeds = 30;
  auto* calibrate = app.add_subcommand("calibrate", "measure the noisy oracle against the spec");
  calibrate->add_option("--config", config_path, "experiment config JSON")->check(CLI::ExistingFile);
  calibrate->add_option("--seeds", cal_seeds, "oracle seeds");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*learn) {
      const auto c = resolve(config_path, ov);
      const auto log = run_learning(c);
      log.write(out_dir);
      for (const auto& s : log.seeds) {
        std::cout << "seed " << s.seed << ": ega " << s.initial_ega << " -> "
                  << (s.metrics.empty() ? s.initial_ega : s.metrics.back().ega) << ", revisions "
                  << s.revisions << ", provider calls " << s.provider_calls << "\n";
        for (const auto& f : s.faults) std::cerr << "  fault: " << f << "\n";
      }
    } else if (*eval) {
      const auto c = resolve(config_path, ov);
      std::optional<LearnedGraph> learned;
      if (graph_arg != "oracle") learned = load_learned_graph(graph_arg);
      std::vector<ItemId> goals;
      for (const auto& g : goal_list) goals.emplace_back(g);
      if (goals.empty()) goals = load_worlds(c).environment.goal_items();
      const auto results = evaluate_sr(c, learned, goals);
      std::filesystem::create_directories(out_dir);
      write_file(std::filesystem::path(out_dir) / "sr.csv", sr_csv(results));
      int ok = 0;
      for (const auto& r : results) ok += r.success;
      std::cout << "success " << ok << "/" << results.size() << "\n";
    } else if (*compare) {
      const auto c = config_path.empty() ? ExperimentConfig{} : load_config(config_path);
      std::vector<std::filesystem::path> paths(runs.begin(), runs.end());
      emit_report(paths, out_dir, load_world_spec(c.world_spec));
    } else if (*plots) {
      std::filesystem::path run(run_dir);
      ExperimentConfig c;
      if (std::filesystem::exists(run / "config.json")) c = load_config(run / "config.json");
      emit_report({run}, run / "plots", load_world_spec(c.world_spec));
    } else if (*calibrate) {
      const auto c = config_path.empty() ? ExperimentConfig{} : load_config(config_path);
      const auto spec = load_world_spec(c.world_spec);
      const auto r = calibrate_oracle(spec, c.provider.noise, calibration_items(spec), cal_seeds);
      std::cout << "predictions          " << r.predictions << "\n"
                << "correct item set     " << r.correct_item_set << "\n"
                << "exact                " << r.exact << "\n"
                << "hallucinated         " << r.hallucinated << "\n"
                << "unnecessary included " << r.unnecessary_included << "\n"
                << "required omitted     " << r.required_omitted << "\n"
                << "quantity MAE         " << r.quantity_mae << "\n"
                << "quantity mean error  " << r.quantity_mean_error << "\n"
                << "quantity sd          " << r.quantity_sd << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
