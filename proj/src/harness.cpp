#include "macdec/harness.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

namespace macdec {

namespace fs = std::filesystem;
using nlohmann::json;

double discounted_return(const EpisodeRecord& ep, double gamma) {
  double total = 0.0;
  int prev = 0;
  for (const auto& rec : ep.records) {
    total += ipow(gamma, prev) * rec.joint_r_cum;
    prev = rec.boundary_time;
  }
  return total;
}

PolicyFn ScriptedPolicy::make() const {
  auto pos = std::make_shared<std::vector<size_t>>(sequences.size(), 0);
  auto seqs = sequences;
  auto loops = loop_start;
  return [pos, seqs, loops](const std::vector<bool>& free,
                            const std::vector<int>&,
                            const BoundaryTracker*) {
    std::map<AgentId, MacroAction> actions;
    for (size_t i = 0; i < free.size(); ++i) {
      if (!free[i]) continue;
      size_t& p = (*pos)[i];
      const auto& seq = seqs[i];
      if (p >= seq.size()) {
        if (loops[i] >= 0)
          p = static_cast<size_t>(loops[i]);
        else
          p = seq.size() - 1;
      }
      actions[static_cast<AgentId>(i)] = MacroAction{seq[p]};
      ++p;
    }
    return actions;
  };
}

ScriptedPolicy bp_scripted_optimal() {
  int move = static_cast<int>(BPMacro::MoveToBigBox);
  int push = static_cast<int>(BPMacro::Push);
  return {{{move, push}, {move, push}}, {1, 1}};
}

ScriptedPolicy wtd_scripted_demo() {
  int s1 = static_cast<int>(WTDGrayMacro::SearchTool1);
  int s2 = static_cast<int>(WTDGrayMacro::SearchTool2);
  int s3 = static_cast<int>(WTDGrayMacro::SearchTool3);
  int p0 = static_cast<int>(WTDGrayMacro::PassToM0);
  int p1 = static_cast<int>(WTDGrayMacro::PassToM1);
  int wait = static_cast<int>(WTDGrayMacro::WaitM);
  int get = static_cast<int>(WTDMobileMacro::GetTool);
  int ws = static_cast<int>(WTDMobileMacro::GoToWS);
  return {{{get, ws}, {get, ws}, {s1, p0, s2, s3, p1, p0, wait}}, {0, 0, 6}};
}

ScriptedPolicy all_stay_policy(const MacroEnv& env, int action_id) {
  ScriptedPolicy p;
  p.sequences.assign(env.num_agents(), {action_id});
  p.loop_start.assign(env.num_agents(), 0);
  return p;
}

double bp_optimal_return(const BPConfig& cfg, double gamma) {
  int n = cfg.grid_size;
  // per-robot Move-to-big-box duration: vertical leg, horizontal leg, final turn
  int vertical = (n - 1) - (n / 2 + 1);
  int d0 = vertical + ((n / 2 - 1) - n / 4) + 1;
  int d1 = vertical + (3 * n / 4 - n / 2) + 1;
  int push = n / 2;
  int total = std::max(d0, d1) + push;
  double sum_steps = 0.0;
  for (int t = 0; t < total; ++t) sum_steps += ipow(gamma, t) * cfg.reward_step;
  return sum_steps + ipow(gamma, total - 1) * cfg.reward_big;
}

namespace {

PolicyFn make_greedy_policy(const JointActionSpace& space, ExplorationMode mode,
                            std::shared_ptr<Rng> rng) {
  return [space, mode, rng](const std::vector<bool>& free,
                            const std::vector<int>& running,
                            const BoundaryTracker* tracker) {
    return epsilon_greedy_select(free, &tracker->dec_q(), &tracker->cen_q(),
                                 running, space, 0.0, mode, *rng);
  };
}

}  // namespace

double evaluate_policy(AgentNets& nets, const TrainConfig& cfg, int episodes,
                       std::uint64_t seed) {
  TrainConfig c = resolve_config(cfg);
  auto env = make_env(c);
  InputCodec codec = InputCodec::from_env(*env);
  ExplorationMode mode = nets.has_dec() ? ExplorationMode::Decentralized
                                        : ExplorationMode::Centralized;
  auto rng = std::make_shared<Rng>(seed);
  EpisodeRunner runner(*env, c.learner.gamma, codec, &nets,
                       make_greedy_policy(nets.space, mode, rng));
  double total = 0.0;
  for (int e = 0; e < episodes; ++e) {
    runner.start(seed + static_cast<std::uint64_t>(e));
    while (!runner.step_boundary()) {
    }
    total += discounted_return(runner.episode(), c.learner.gamma);
  }
  return total / episodes;
}

namespace {

struct Stopwatch {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  }
};

struct TrainContext {
  TrainConfig cfg;
  int run_id;
  Rng rng;
  AgentNets nets;
  InputCodec codec;
  TrainHooks hooks;
  Stopwatch clock;
  std::vector<MetricsRow> rows;

  double current_epsilon = 1.0;

  void maybe_eval(long episode_index) {
    if ((episode_index + 1) % cfg.eval_interval != 0) return;
    MetricsRow row;
    row.run = run_id;
    row.episode = episode_index + 1;
    row.return_mean = evaluate_policy(nets, cfg, cfg.eval_episodes,
                                      cfg.seed + 7777);
    row.epsilon = current_epsilon;
    row.seconds = cfg.deterministic_timing ? 0.0 : clock.seconds();
    rows.push_back(row);
  }
};

PolicyFn make_exploring_policy(TrainContext& ctx, ExplorationMode mode) {
  double* eps = &ctx.current_epsilon;
  Rng* rng = &ctx.rng;
  JointActionSpace space = ctx.nets.space;
  return [eps, rng, space, mode](const std::vector<bool>& free,
                                 const std::vector<int>& running,
                                 const BoundaryTracker* tracker) {
    return epsilon_greedy_select(free, &tracker->dec_q(), &tracker->cen_q(),
                                 running, space, *eps, mode, *rng);
  };
}

void train_once(TrainContext& ctx, ReplayBuffer& buffer, const char* tag) {
  const LearnerConfig& lc = ctx.cfg.learner;
  Minibatch mb = buffer.sample_minibatch(lc.batch_size, ctx.rng);
  if (ctx.hooks.on_sample) ctx.hooks.on_sample(tag, buffer, mb);
  switch (lc.algorithm) {
    case Algorithm::DecHDDRQN:
      dec_hddrqn_update(ctx.nets, mb, ctx.codec, lc);
      if (ctx.hooks.on_update) ctx.hooks.on_update("dec");
      break;
    case Algorithm::CenDDRQN:
      update_centralized(ctx.nets, mb, ctx.codec, lc);
      if (ctx.hooks.on_update) ctx.hooks.on_update("cen");
      break;
    case Algorithm::MacDecMADDRQN:
    case Algorithm::MacDecMADDRQNRegularDoubleQ:
      macdec_train_step(ctx.nets, mb, ctx.codec, lc);
      if (ctx.hooks.on_update) ctx.hooks.on_update("cen+dec");
      break;
    default:
      throw std::logic_error("train_once: unexpected algorithm");
  }
}

void run_single_env_training(TrainContext& ctx) {
  const LearnerConfig& lc = ctx.cfg.learner;
  auto env = make_env(ctx.cfg);
  ExplorationMode mode;
  switch (lc.algorithm) {
    case Algorithm::DecHDDRQN: mode = ExplorationMode::Decentralized; break;
    case Algorithm::CenDDRQN: mode = ExplorationMode::Centralized; break;
    default: mode = lc.exploration_mode; break;
  }
  EpisodeRunner runner(*env, lc.accum_gamma(), ctx.codec, &ctx.nets,
                       make_exploring_policy(ctx, mode));
  ReplayBuffer buffer(lc.buffer_capacity);
  int min_fill = std::min(lc.batch_size, lc.buffer_capacity);
  long t_bound = 0, prim = 0;
  long next_target = lc.target_update_primitive_steps;

  for (long e = 0; e < ctx.cfg.episodes; ++e) {
    ctx.current_epsilon = lc.epsilon_at(e);
    runner.start(static_cast<std::uint64_t>(e));
    bool done = false;
    while (!done) {
      done = runner.step_boundary();
      ++t_bound;
      prim += runner.last_gap();
      if (lc.train_interval_boundaries > 0 &&
          t_bound % lc.train_interval_boundaries == 0 &&
          buffer.size() >= min_fill)
        train_once(ctx, buffer, "main");
      if (prim >= next_target) {
        ctx.nets.refresh_targets();
        next_target += lc.target_update_primitive_steps;
      }
    }
    buffer.push_episode(runner.take_episode());
    if (lc.train_interval_boundaries == 0 && buffer.size() >= min_fill)
      train_once(ctx, buffer, "main");
    ctx.maybe_eval(e);
  }
}

void run_parallel_training(TrainContext& ctx) {
  const LearnerConfig& lc = ctx.cfg.learner;
  auto cen_env = make_env(ctx.cfg);
  auto dec_env = make_env(ctx.cfg);
  EpisodeRunner cen_runner(*cen_env, lc.accum_gamma(), ctx.codec, &ctx.nets,
                           make_exploring_policy(ctx, ExplorationMode::Centralized));
  EpisodeRunner dec_runner(*dec_env, lc.accum_gamma(), ctx.codec, &ctx.nets,
                           make_exploring_policy(ctx, ExplorationMode::Decentralized));
  ReplayBuffer d_cen(lc.buffer_capacity), d_dec(lc.buffer_capacity);
  int min_fill = std::min(lc.batch_size, lc.buffer_capacity);

  long dec_episodes = 0, t_dec = 0, prim_dec = 0;
  long next_target = lc.target_update_primitive_steps;
  std::uint64_t cen_seed = 1u << 20;  // distinct from dec-env episode seeds

  ctx.current_epsilon = lc.epsilon_at(0);
  cen_runner.start(cen_seed++);
  dec_runner.start(0);

  SelectorKind selector = lc.conditional_argmax
                              ? SelectorKind::CentralizedConditional
                              : SelectorKind::CentralizedUnconditional;

  while (dec_episodes < ctx.cfg.episodes) {
    if (cen_runner.step_boundary()) {
      d_cen.push_episode(cen_runner.take_episode());
      cen_runner.start(cen_seed++);
    }
    bool dec_done = dec_runner.step_boundary();
    ++t_dec;
    prim_dec += dec_runner.last_gap();
    if (dec_done) {
      d_dec.push_episode(dec_runner.take_episode());
      ++dec_episodes;
    }

    bool ready = d_cen.size() >= min_fill && d_dec.size() >= min_fill;
    bool do_train = lc.train_interval_boundaries > 0
                        ? (t_dec % lc.train_interval_boundaries == 0)
                        : dec_done;
    if (do_train && ready) {
      Minibatch mb_cen = d_cen.sample_minibatch(lc.batch_size, ctx.rng);
      if (ctx.hooks.on_sample) ctx.hooks.on_sample("cen", d_cen, mb_cen);
      update_centralized(ctx.nets, mb_cen, ctx.codec, lc);
      if (ctx.hooks.on_update) ctx.hooks.on_update("cen");
      Minibatch mb_dec = d_dec.sample_minibatch(lc.batch_size, ctx.rng);
      if (ctx.hooks.on_sample) ctx.hooks.on_sample("dec", d_dec, mb_dec);
      update_decentralized(ctx.nets, mb_dec, ctx.codec, lc, selector, 1.0);
      if (ctx.hooks.on_update) ctx.hooks.on_update("dec");
    }
    if (prim_dec >= next_target) {
      ctx.nets.refresh_targets();
      next_target += lc.target_update_primitive_steps;
    }
    if (dec_done) {
      ctx.maybe_eval(dec_episodes - 1);
      ctx.current_epsilon = lc.epsilon_at(dec_episodes);
      if (dec_episodes < ctx.cfg.episodes)
        dec_runner.start(static_cast<std::uint64_t>(dec_episodes));
    }
  }
}

}  // namespace

RunOutput run_training(const TrainConfig& cfg, std::uint64_t seed, int run_id,
                       const TrainHooks* hooks) {
  TrainConfig c = resolve_config(cfg);
  auto env = make_env(c);
  InputCodec codec = InputCodec::from_env(*env);
  Rng rng(seed);
  bool with_dec = c.learner.algorithm != Algorithm::CenDDRQN;
  bool with_cen = c.learner.algorithm != Algorithm::DecHDDRQN;
  AgentNets nets = make_agent_nets(codec, c.net.hidden, c.net.lstm_dec,
                                   c.net.lstm_cen, with_dec, with_cen, rng);

  TrainContext ctx{c,
                   run_id,
                   std::move(rng),
                   std::move(nets),
                   codec,
                   hooks ? *hooks : TrainHooks{},
                   Stopwatch{},
                   {},
                   c.learner.epsilon_at(0)};
  if (c.learner.algorithm == Algorithm::ParallelMacDecMADDRQN)
    run_parallel_training(ctx);
  else
    run_single_env_training(ctx);
  return RunOutput{std::move(ctx.rows), std::move(ctx.nets), codec};
}

std::vector<double> smooth_series(const std::vector<double>& xs, int window) {
  if (window <= 1) return xs;
  int n = static_cast<int>(xs.size());
  std::vector<double> out(n);
  int before = (window - 1) / 2, after = window / 2;
  for (int i = 0; i < n; ++i) {
    int lo = std::max(0, i - before), hi = std::min(n - 1, i + after);
    double acc = 0.0;
    for (int k = lo; k <= hi; ++k) acc += xs[k];
    out[i] = acc / (hi - lo + 1);
  }
  return out;
}

void write_metrics_csv(std::ostream& os, const std::vector<MetricsRow>& rows) {
  os << "run,episode,return_mean,epsilon,seconds\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%d,%ld,%.6f,%.6f,%.3f\n", r.run, r.episode,
                  r.return_mean, r.epsilon, r.seconds);
    os << buf;
  }
}

std::vector<MetricsRow> read_metrics_csv(std::istream& is) {
  std::vector<MetricsRow> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (lineno == 1) {
      if (line.rfind("run,episode,return_mean,epsilon,seconds", 0) != 0)
        throw std::runtime_error("metrics CSV line 1: unexpected header");
      continue;
    }
    MetricsRow r;
    double se_ignored;
    int n = std::sscanf(line.c_str(), "%d,%ld,%lf,%lf,%lf,%lf", &r.run,
                        &r.episode, &r.return_mean, &r.epsilon, &r.seconds,
                        &se_ignored);
    if (n < 5)
      throw std::runtime_error("metrics CSV line " + std::to_string(lineno) +
                               ": parse error");
    rows.push_back(r);
  }
  return rows;
}

void write_aggregate_csv(std::ostream& os,
                         const std::vector<std::vector<MetricsRow>>& runs,
                         int smoothing_window) {
  if (runs.empty()) throw std::invalid_argument("no runs to aggregate");
  size_t points = runs[0].size();
  for (const auto& r : runs)
    if (r.size() != points)
      throw std::invalid_argument("runs disagree on evaluation points");
  int n = static_cast<int>(runs.size());
  std::vector<double> mean(points), se(points), eps(points), secs(points);
  for (size_t k = 0; k < points; ++k) {
    double m = 0.0;
    for (const auto& r : runs) m += r[k].return_mean;
    m /= n;
    double var = 0.0;
    for (const auto& r : runs) var += (r[k].return_mean - m) * (r[k].return_mean - m);
    se[k] = n > 1 ? std::sqrt(var / (n - 1)) / std::sqrt(static_cast<double>(n))
                  : 0.0;
    mean[k] = m;
    double e = 0.0, s = 0.0;
    for (const auto& r : runs) {
      e += r[k].epsilon;
      s += r[k].seconds;
    }
    eps[k] = e / n;
    secs[k] = s / n;
  }
  std::vector<double> mean_s = smooth_series(mean, smoothing_window);
  std::vector<double> se_s = smooth_series(se, smoothing_window);
  os << "run,episode,return_mean,epsilon,seconds,return_se\n";
  char buf[200];
  for (size_t k = 0; k < points; ++k) {
    std::snprintf(buf, sizeof(buf), "%d,%ld,%.6f,%.6f,%.3f,%.6f\n", -1,
                  runs[0][k].episode, mean_s[k], eps[k], secs[k], se_s[k]);
    os << buf;
  }
}

void run_experiment(const TrainConfig& cfg) {
  TrainConfig c = resolve_config(cfg);
  fs::path out(c.out_dir);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec || !fs::is_directory(out))
    throw std::runtime_error("cannot create output directory " + out.string());
  {
    std::ofstream cf(out / "config.json");
    cf << config_to_json(c);
  }

  std::vector<std::vector<MetricsRow>> all_rows(c.num_runs);
  std::vector<RunOutput> outputs;
  outputs.reserve(c.num_runs);
  for (int r = 0; r < c.num_runs; ++r)
    outputs.emplace_back(RunOutput{{}, AgentNets{}, InputCodec{}});

  int jobs = std::max(1, c.jobs);
  for (int base = 0; base < c.num_runs; base += jobs) {
    int wave = std::min(jobs, c.num_runs - base);
    std::vector<std::thread> threads;
    for (int w = 0; w < wave; ++w) {
      int run_id = base + w;
      threads.emplace_back([&c, &outputs, run_id]() {
        outputs[run_id] = run_training(c, c.seed + run_id, run_id);
      });
    }
    for (auto& t : threads) t.join();
  }

  for (int r = 0; r < c.num_runs; ++r) {
    all_rows[r] = outputs[r].rows;
    std::ofstream f(out / ("run_" + std::to_string(r) + ".csv"));
    write_metrics_csv(f, all_rows[r]);
    save_checkpoint(outputs[r].nets, c,
                    (out / ("run_" + std::to_string(r))).string());
  }
  std::ofstream agg(out / "aggregate.csv");
  write_aggregate_csv(agg, all_rows, c.smoothing_window);
}

void save_checkpoint(const AgentNets& nets, const TrainConfig& cfg,
                     const std::string& dir) {
  fs::create_directories(dir);
  json manifest;
  manifest["config"] = json::parse(config_to_json(cfg));
  manifest["num_dec"] = nets.dec.size();
  manifest["has_cen"] = nets.has_cen();
  manifest["joint_dims"] = nets.space.dims;
  std::ofstream mf(fs::path(dir) / "manifest.json");
  mf << manifest.dump(2) << "\n";

  auto dump_net = [&](const RecurrentQNet& net, const std::string& name) {
    std::ofstream bin(fs::path(dir) / (name + ".bin"), std::ios::binary);
    net.save(bin);
    json side;
    side["input"] = net.spec().input;
    side["hidden"] = net.spec().hidden;
    side["lstm"] = net.spec().lstm;
    side["output"] = net.spec().output;
    side["lr"] = cfg.learner.lr;
    side["gamma"] = cfg.learner.gamma;
    std::ofstream sf(fs::path(dir) / (name + ".json"));
    sf << side.dump(2) << "\n";
  };
  for (size_t i = 0; i < nets.dec.size(); ++i)
    dump_net(nets.dec[i], "dec_" + std::to_string(i));
  if (nets.has_cen()) dump_net(nets.cen[0], "cen");
}

TrainConfig load_checkpoint_config(const std::string& dir) {
  std::ifstream mf(fs::path(dir) / "manifest.json");
  if (!mf) throw std::runtime_error("missing manifest.json in " + dir);
  json manifest = json::parse(mf);
  return config_from_json(manifest.at("config").dump());
}

AgentNets load_checkpoint(const std::string& dir) {
  std::ifstream mf(fs::path(dir) / "manifest.json");
  if (!mf) throw std::runtime_error("missing manifest.json in " + dir);
  json manifest = json::parse(mf);
  AgentNets nets;
  nets.space.dims = manifest.at("joint_dims").get<std::vector<int>>();
  size_t num_dec = manifest.at("num_dec").get<size_t>();
  for (size_t i = 0; i < num_dec; ++i) {
    std::ifstream bin(fs::path(dir) / ("dec_" + std::to_string(i) + ".bin"),
                      std::ios::binary);
    if (!bin) throw std::runtime_error("missing dec net in checkpoint");
    nets.dec.push_back(RecurrentQNet::load(bin));
    nets.dec_target.emplace_back(nets.dec.back().spec());
  }
  if (manifest.at("has_cen").get<bool>()) {
    std::ifstream bin(fs::path(dir) / "cen.bin", std::ios::binary);
    if (!bin) throw std::runtime_error("missing cen net in checkpoint");
    nets.cen.push_back(RecurrentQNet::load(bin));
    nets.cen_target.emplace_back(nets.cen.back().spec());
  }
  nets.refresh_targets();
  return nets;
}

void trace_episode(const TrainConfig& cfg, const ScriptedPolicy& policy,
                   std::uint64_t seed, std::ostream& os) {
  TrainConfig c = resolve_config(cfg);
  auto env = make_env(c);
  InputCodec codec = InputCodec::from_env(*env);
  EpisodeRunner runner(*env, 1.0, codec, nullptr, policy.make());
  runner.start(seed);
  bool ascii = c.env != "wtd";
  if (ascii) os << env->render() << "\n";
  bool done = false;
  while (!done) {
    done = runner.step_boundary();
    const JointStepRecord& rec = runner.episode().records.back();
    if (ascii) {
      os << "t=" << rec.boundary_time << " r=" << rec.joint_r_cum << " [";
      for (size_t i = 0; i < rec.agents.size(); ++i) {
        os << (i ? ", " : "")
           << env->action_name(static_cast<int>(i), rec.agents[i].m)
           << (rec.agents[i].terminated ? "*" : "");
      }
      os << "]\n" << env->render() << "\n";
    } else {
      json j;
      j["t"] = rec.boundary_time;
      j["joint_r_cum"] = rec.joint_r_cum;
      j["terminated"] = json::array();
      j["actions"] = json::array();
      for (size_t i = 0; i < rec.agents.size(); ++i) {
        j["terminated"].push_back(rec.agents[i].terminated);
        j["actions"].push_back(
            env->action_name(static_cast<int>(i), rec.agents[i].m));
      }
      j["episode_done"] = rec.episode_done;
      j["state"] = env->render();
      os << j.dump() << "\n";
    }
  }
  os << "return_sum=" << runner.return_sum() << "\n";
}

}  // namespace macdec
