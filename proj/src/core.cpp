#include "macdec/core.hpp"

#include <numeric>
#include <stdexcept>

namespace macdec {

int ObsSchema::onehot_size() const {
  return std::accumulate(cardinalities.begin(), cardinalities.end(), 0);
}

int encode_onehot(const MacroObservation& z, const ObsSchema& schema,
                  double* out, int offset) {
  if (z.features.size() != schema.cardinalities.size())
    throw std::invalid_argument("observation does not match schema");
  int pos = offset;
  for (size_t k = 0; k < schema.cardinalities.size(); ++k) {
    int card = schema.cardinalities[k];
    int v = z.features[k];
    if (v < 0 || v >= card)
      throw std::invalid_argument("categorical feature out of range");
    out[pos + v] = 1.0;
    pos += card;
  }
  return pos - offset;
}

std::vector<bool> JointStepRecord::undone_mask() const {
  std::vector<bool> mask(agents.size());
  for (size_t i = 0; i < agents.size(); ++i) mask[i] = !agents[i].terminated;
  return mask;
}

double accumulate_reward(const std::vector<double>& rewards, double gamma) {
  if (rewards.empty())
    throw std::invalid_argument("accumulate_reward: empty reward sequence");
  double acc = 0.0, w = 1.0;
  for (double r : rewards) {
    acc += w * r;
    w *= gamma;
  }
  return acc;
}

double ipow(double base, int exp) {
  if (exp < 0) throw std::invalid_argument("ipow: negative exponent");
  double acc = 1.0;
  while (exp-- > 0) acc *= base;
  return acc;
}

MacroExecutor::MacroExecutor(MacroEnv& env, double accum_gamma)
    : env_(env), gamma_(accum_gamma) {
  if (!(accum_gamma > 0.0 && accum_gamma <= 1.0))
    throw std::invalid_argument("accum_gamma must be in (0,1]");
}

std::vector<MacroObservation> MacroExecutor::reset(std::uint64_t seed) {
  env_.reset(seed);
  int n = env_.num_agents();
  clock_ = 0;
  boundary_count_ = 0;
  done_ = false;
  free_.assign(n, true);
  running_.assign(n, MacroAction{});
  obs_at_start_.assign(n, MacroObservation{});
  agent_accum_.assign(n, 0.0);
  agent_weight_.assign(n, 1.0);
  start_time_.assign(n, 0);
  start_boundary_.assign(n, 0);
  std::vector<MacroObservation> obs(n);
  for (int i = 0; i < n; ++i) obs[i] = env_.observe(i);
  return obs;
}

JointStepRecord MacroExecutor::run_until_any_termination(
    const std::map<AgentId, MacroAction>& new_actions) {
  if (done_) throw std::logic_error("episode already finished");
  int n = env_.num_agents();
  for (const auto& [agent, m] : new_actions) {
    if (agent < 0 || agent >= n)
      throw std::invalid_argument("unknown agent id");
    if (!free_[agent])
      throw std::invalid_argument("action supplied for a non-terminated agent");
  }
  for (int i = 0; i < n; ++i) {
    if (free_[i] && !new_actions.count(i))
      throw std::invalid_argument("missing action for a terminated agent");
  }

  for (const auto& [agent, m] : new_actions) {
    if (m.id < 0 || m.id >= env_.num_macro_actions(agent))
      throw std::invalid_argument("macro-action id out of range");
    env_.start_macro(agent, m);
    running_[agent] = m;
    obs_at_start_[agent] = env_.observe(agent);
    agent_accum_[agent] = 0.0;
    agent_weight_[agent] = 1.0;
    start_time_[agent] = clock_;
    start_boundary_[agent] = boundary_count_;
    free_[agent] = false;
  }

  int segment_start = clock_;
  double joint_accum = 0.0, joint_weight = 1.0;
  std::vector<bool> done_flags(n, false);
  bool terminal = false;

  while (true) {
    PrimitiveOutcome out = env_.advance();
    ++clock_;
    joint_accum += joint_weight * out.reward;
    joint_weight *= gamma_;
    for (int i = 0; i < n; ++i) {
      agent_accum_[i] += agent_weight_[i] * out.reward;
      agent_weight_[i] *= gamma_;
    }
    bool any_done = false;
    for (int i = 0; i < n; ++i) {
      if (out.macro_done[i]) {
        done_flags[i] = true;
        any_done = true;
      }
    }
    terminal = out.terminal;
    bool horizon_hit = clock_ >= env_.horizon();
    if (terminal || horizon_hit) {
      // episode over: every agent's macro is cut at this boundary
      done_ = true;
      done_flags.assign(n, true);
      break;
    }
    if (any_done) break;
  }

  JointStepRecord rec;
  rec.agents.resize(n);
  rec.joint_r_cum = joint_accum;
  rec.boundary_time = clock_;
  rec.gap = clock_ - segment_start;
  rec.episode_done = done_;
  rec.terminal = terminal;
  ++boundary_count_;
  for (int i = 0; i < n; ++i) {
    AgentStep& s = rec.agents[i];
    s.z = obs_at_start_[i];
    s.m = running_[i];
    s.terminated = done_flags[i];
    s.r_cum = agent_accum_[i];
    s.duration = clock_ - start_time_[i];
    s.start_boundary = start_boundary_[i];
    if (done_flags[i]) {
      s.z_next = env_.observe(i);
      free_[i] = true;
    } else {
      // undone agents keep their last macro-observation
      s.z_next = obs_at_start_[i];
    }
  }
  if (done_) free_.assign(n, false);
  return rec;
}

}  // namespace macdec
