#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "macdec/rng.hpp"

namespace macdec {

using AgentId = int;

// Index into the owning agent's macro-action set.
struct MacroAction {
  int id = -1;
  friend bool operator==(const MacroAction&, const MacroAction&) = default;
};

// Categorical feature layout of a macro-observation; feature k takes values
// in [0, cardinalities[k]).
struct ObsSchema {
  std::vector<int> cardinalities;
  int onehot_size() const;
};

struct MacroObservation {
  std::vector<int> features;
  friend bool operator==(const MacroObservation&, const MacroObservation&) = default;
};

// Writes the one-hot encoding of `z` into out[offset..]; returns the number
// of slots consumed.
int encode_onehot(const MacroObservation& z, const ObsSchema& schema,
                  double* out, int offset);

// One agent's slice of a boundary record. `z` is the macro-observation the
// agent held when `m` started; `z_next` is fresh only if `terminated`.
// `r_cum` and `duration` span the whole macro-action (partial for agents
// still running).
struct AgentStep {
  MacroObservation z;
  MacroAction m;
  MacroObservation z_next;
  double r_cum = 0.0;
  int duration = 0;
  int start_boundary = 0;  // boundary index at which `m` was chosen
  bool terminated = false;
};

// Everything recorded when at least one agent's macro-action ends.
struct JointStepRecord {
  std::vector<AgentStep> agents;
  double joint_r_cum = 0.0;  // accumulated since the previous boundary
  int boundary_time = 0;     // primitive clock at this boundary
  int gap = 0;               // primitive steps since the previous boundary
  bool episode_done = false;
  bool terminal = false;     // true terminal state, not a horizon cutoff

  std::vector<bool> undone_mask() const;
};

struct PrimitiveOutcome {
  double reward = 0.0;
  std::vector<bool> macro_done;  // per agent: termination predicate fired
  bool terminal = false;
};

// Environment contract: owns the low-level controllers and termination
// predicates of every macro-action. One instance per rollout stream.
class MacroEnv {
 public:
  virtual ~MacroEnv() = default;

  virtual int num_agents() const = 0;
  virtual int num_macro_actions(AgentId agent) const = 0;
  virtual ObsSchema obs_schema(AgentId agent) const = 0;
  virtual int horizon() const = 0;

  virtual void reset(std::uint64_t seed) = 0;
  virtual MacroObservation observe(AgentId agent) const = 0;
  virtual void start_macro(AgentId agent, MacroAction m) = 0;
  // Executes one primitive step of every agent's running controller.
  virtual PrimitiveOutcome advance() = 0;

  virtual std::string action_name(AgentId agent, MacroAction m) const = 0;
  virtual std::string render() const { return {}; }
};

// r_cum over a macro-action's primitive rewards: sum_k gamma^k r_k.
double accumulate_reward(const std::vector<double>& rewards, double gamma);

// pow with integer exponent by repeated multiplication; reproducible and
// exact for dyadic bases.
double ipow(double base, int exp);

// Advances primitive time until any agent's macro-action terminates (or the
// episode ends) and emits JointStepRecords. Rewards are accumulated with
// `accum_gamma` from each agent's own start step (1.0 gives the plain sums).
class MacroExecutor {
 public:
  MacroExecutor(MacroEnv& env, double accum_gamma);

  // Starts an episode; every agent becomes free. Returns initial observations.
  std::vector<MacroObservation> reset(std::uint64_t seed);

  // `new_actions` must cover exactly the currently free agents.
  JointStepRecord run_until_any_termination(
      const std::map<AgentId, MacroAction>& new_actions);

  const std::vector<bool>& free_agents() const { return free_; }
  bool episode_done() const { return done_; }
  int clock() const { return clock_; }
  int boundary_count() const { return boundary_count_; }
  MacroEnv& env() { return env_; }

 private:
  MacroEnv& env_;
  double gamma_;
  int clock_ = 0;
  int boundary_count_ = 0;
  bool done_ = true;
  std::vector<bool> free_;
  std::vector<MacroAction> running_;
  std::vector<MacroObservation> obs_at_start_;  // obs each running macro saw
  std::vector<double> agent_accum_;
  std::vector<double> agent_weight_;
  std::vector<int> start_time_;
  std::vector<int> start_boundary_;
};

}  // namespace macdec
