#pragma once

#include <functional>
#include <iosfwd>
#include <optional>

#include "macdec/config.hpp"

namespace macdec {

struct MetricsRow {
  int run = 0;
  long episode = 0;
  double return_mean = 0.0;
  double epsilon = 0.0;
  double seconds = 0.0;
};

struct RunOutput {
  std::vector<MetricsRow> rows;
  AgentNets nets;
  InputCodec codec;
};

// Instrumentation points used by tests; all optional.
struct TrainHooks {
  std::function<void(const std::string& buffer_tag, const ReplayBuffer& buffer,
                     const Minibatch& batch)>
      on_sample;
  std::function<void(const std::string& net_tag)> on_update;
};

// Mean discounted return (Eq.-style primitive-step sum) of greedy execution.
// Decentralized nets act on their own histories; a cen-only configuration
// evaluates the centralized policy.
double evaluate_policy(AgentNets& nets, const TrainConfig& cfg, int episodes,
                       std::uint64_t seed);

// One seeded training run of cfg's algorithm (including the two-environment
// parallel variant).
RunOutput run_training(const TrainConfig& cfg, std::uint64_t seed, int run_id,
                       const TrainHooks* hooks = nullptr);

// num_runs seeded runs (seed, seed+1, ...), per-run CSVs, one aggregate CSV,
// final checkpoints. Runs execute on up to cfg.jobs threads.
void run_experiment(const TrainConfig& cfg);

// Discounted primitive-step return of one episode's records; requires the
// records to have been accumulated with the same gamma.
double discounted_return(const EpisodeRecord& ep, double gamma);

// centered moving average; shrinks at the edges so constants stay constant
std::vector<double> smooth_series(const std::vector<double>& xs, int window);

void write_metrics_csv(std::ostream& os, const std::vector<MetricsRow>& rows);
std::vector<MetricsRow> read_metrics_csv(std::istream& is);
void write_aggregate_csv(std::ostream& os,
                         const std::vector<std::vector<MetricsRow>>& runs,
                         int smoothing_window);

void save_checkpoint(const AgentNets& nets, const TrainConfig& cfg,
                     const std::string& dir);
AgentNets load_checkpoint(const std::string& dir);
TrainConfig load_checkpoint_config(const std::string& dir);

// Scripted policies: each agent consumes its sequence as its macro-actions
// terminate, then loops from loop_start (repeats the last action when < 0).
struct ScriptedPolicy {
  std::vector<std::vector<int>> sequences;
  std::vector<int> loop_start;
  PolicyFn make() const;
};

// both robots: Move-to-big-box then joint Push
ScriptedPolicy bp_scripted_optimal();
// gray: Search(1) Pass(0) Search(2) Search(3) Pass(1) Pass(0) then Wait-M;
// mobiles: Get-Tool / Go-to-WS cycles
ScriptedPolicy wtd_scripted_demo();
ScriptedPolicy all_stay_policy(const MacroEnv& env, int action_id);

// closed-form discounted return of the scripted-optimal BP trajectory
double bp_optimal_return(const BPConfig& cfg, double gamma);

// one rendered episode per line (ASCII for BP, JSON for WTD)
void trace_episode(const TrainConfig& cfg, const ScriptedPolicy& policy,
                   std::uint64_t seed, std::ostream& os);

}  // namespace macdec
