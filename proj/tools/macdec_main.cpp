#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "macdec/harness.hpp"
#include "macdec/plot.hpp"

namespace {

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

macdec::TrainConfig load_config(const std::string& config_path,
                                const std::string& env, const std::string& algo) {
  macdec::TrainConfig cfg;
  if (!config_path.empty())
    cfg = macdec::config_from_json(slurp(config_path));
  else
    cfg = macdec::default_config(env.empty() ? "bp10" : env,
                                 algo.empty() ? "macdec_maddrqn" : algo);
  if (!env.empty()) cfg.env = env;
  if (!algo.empty()) cfg.learner.algorithm = macdec::algorithm_from_string(algo);
  return macdec::resolve_config(cfg);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"macro-action multi-agent Q-learning"};
  app.require_subcommand(1);

  std::string config_path, env, algo, out;
  std::uint64_t seed = 0;
  bool seed_set = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON config file");
    cmd->add_option("--env", env)->check(CLI::IsMember({"bp10", "bp30", "wtd"}));
    cmd->add_option("--algo", algo);
    cmd->add_option("--seed", seed)->each([&](const std::string&) {
      seed_set = true;
    });
    cmd->add_option("--out", out, "output directory");
  };

  auto* train = app.add_subcommand("train", "run a training experiment");
  add_common(train);
  long episodes = 0;
  int num_runs = 0, jobs = 0;
  train->add_option("--episodes", episodes);
  train->add_option("--num-runs", num_runs);
  train->add_option("--jobs", jobs);

  auto* evaluate = app.add_subcommand("evaluate", "evaluate a checkpoint");
  std::string ckpt;
  int eval_episodes = 1;
  evaluate->add_option("--ckpt", ckpt, "checkpoint directory")->required();
  evaluate->add_option("--episodes", eval_episodes);
  evaluate->add_option("--seed", seed);

  auto* plot = app.add_subcommand("plot", "render learning curves to SVG");
  std::vector<std::string> csvs;
  std::string svg_out = "curves.svg";
  double ref = 0.0;
  bool ref_set = false;
  plot->add_option("files", csvs, "metrics CSV files")->required();
  plot->add_option("--out", svg_out);
  plot->add_option("--ref", ref, "horizontal reference value")
      ->each([&](const std::string&) { ref_set = true; });

  auto* defconf = app.add_subcommand("default-config", "print a full config");
  add_common(defconf);

  auto* trace = app.add_subcommand("trace", "render one scripted episode");
  add_common(trace);
  std::string policy = "optimal";
  trace->add_option("--policy", policy)
      ->check(CLI::IsMember({"optimal", "demo", "stay"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) {
      macdec::TrainConfig cfg = load_config(config_path, env, algo);
      if (seed_set) cfg.seed = seed;
      if (!out.empty()) cfg.out_dir = out;
      if (episodes > 0) cfg.episodes = episodes;
      if (num_runs > 0) cfg.num_runs = num_runs;
      if (jobs > 0) cfg.jobs = jobs;
      cfg = macdec::resolve_config(cfg);
      macdec::run_experiment(cfg);
      std::cout << "wrote " << cfg.out_dir << "\n";
    } else if (*evaluate) {
      macdec::TrainConfig cfg = macdec::load_checkpoint_config(ckpt);
      macdec::AgentNets nets = macdec::load_checkpoint(ckpt);
      double v = macdec::evaluate_policy(nets, cfg, eval_episodes, seed);
      std::cout << v << "\n";
    } else if (*plot) {
      std::vector<macdec::CurveData> curves;
      for (const auto& f : csvs) curves.push_back(macdec::load_curve_csv(f));
      std::ofstream os(svg_out);
      macdec::render_curves_svg(
          curves, ref_set ? std::optional<double>(ref) : std::nullopt, os);
      std::cout << "wrote " << svg_out << "\n";
    } else if (*defconf) {
      macdec::TrainConfig cfg = load_config(config_path, env, algo);
      if (seed_set) cfg.seed = seed;
      if (!out.empty()) {
        std::ofstream os(out);
        os << macdec::config_to_json(cfg);
      } else {
        std::cout << macdec::config_to_json(cfg);
      }
    } else if (*trace) {
      macdec::TrainConfig cfg = load_config(config_path, env, algo);
      macdec::ScriptedPolicy p;
      if (policy == "optimal" && cfg.env != "wtd")
        p = macdec::bp_scripted_optimal();
      else if (policy == "demo" || (policy == "optimal" && cfg.env == "wtd"))
        p = macdec::wtd_scripted_demo();
      else {
        auto e = macdec::make_env(cfg);
        p = macdec::all_stay_policy(
            *e, cfg.env == "wtd" ? 1 : static_cast<int>(macdec::BPMacro::Stay));
      }
      if (!out.empty() && out != "-") {
        std::ofstream os(out);
        macdec::trace_episode(cfg, p, seed, os);
        std::cout << "wrote " << out << "\n";
      } else {
        macdec::trace_episode(cfg, p, seed, std::cout);
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
