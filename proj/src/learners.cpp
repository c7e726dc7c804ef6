#include "macdec/learners.hpp"

#include <algorithm>
#include <stdexcept>

namespace macdec {

Algorithm algorithm_from_string(const std::string& s) {
  if (s == "dec_hddrqn") return Algorithm::DecHDDRQN;
  if (s == "cen_ddrqn") return Algorithm::CenDDRQN;
  if (s == "macdec_maddrqn") return Algorithm::MacDecMADDRQN;
  if (s == "parallel_macdec_maddrqn") return Algorithm::ParallelMacDecMADDRQN;
  if (s == "macdec_maddrqn_regular_double_q")
    return Algorithm::MacDecMADDRQNRegularDoubleQ;
  throw std::invalid_argument("unknown algorithm: " + s);
}

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::DecHDDRQN: return "dec_hddrqn";
    case Algorithm::CenDDRQN: return "cen_ddrqn";
    case Algorithm::MacDecMADDRQN: return "macdec_maddrqn";
    case Algorithm::ParallelMacDecMADDRQN: return "parallel_macdec_maddrqn";
    case Algorithm::MacDecMADDRQNRegularDoubleQ:
      return "macdec_maddrqn_regular_double_q";
  }
  return "?";
}

ExplorationMode exploration_mode_from_string(const std::string& s) {
  if (s == "centralized") return ExplorationMode::Centralized;
  if (s == "decentralized") return ExplorationMode::Decentralized;
  throw std::invalid_argument("unknown exploration mode: " + s);
}

std::string to_string(ExplorationMode m) {
  return m == ExplorationMode::Centralized ? "centralized" : "decentralized";
}

double LearnerConfig::epsilon_at(long episode) const {
  if (epsilon_decay_episodes <= 0) return epsilon_end;
  double frac = std::min(1.0, static_cast<double>(episode) /
                                  static_cast<double>(epsilon_decay_episodes));
  return epsilon_start - (epsilon_start - epsilon_end) * frac;
}

int JointActionSpace::size() const {
  int n = 1;
  for (int d : dims) n *= d;
  return n;
}

int JointActionSpace::index_of(const std::vector<int>& actions) const {
  if (actions.size() != dims.size())
    throw std::invalid_argument("joint action arity mismatch");
  int idx = 0;
  for (size_t i = 0; i < dims.size(); ++i) {
    if (actions[i] < 0 || actions[i] >= dims[i])
      throw std::invalid_argument("joint action component out of range");
    idx = idx * dims[i] + actions[i];
  }
  return idx;
}

std::vector<int> JointActionSpace::actions_of(int index) const {
  std::vector<int> a(dims.size());
  for (int i = static_cast<int>(dims.size()) - 1; i >= 0; --i) {
    a[i] = index % dims[i];
    index /= dims[i];
  }
  return a;
}

int JointActionSpace::component(int index, int agent) const {
  int stride = 1;
  for (size_t j = agent + 1; j < dims.size(); ++j) stride *= dims[j];
  return (index / stride) % dims[agent];
}

int conditional_joint_argmax(const Eigen::VectorXd& q_joint,
                             const JointActionSpace& space,
                             const std::vector<bool>& undone,
                             const std::vector<int>& running) {
  int n = static_cast<int>(space.dims.size());
  if (q_joint.size() != space.size())
    throw std::invalid_argument("q_joint length must equal the joint space size");
  if (static_cast<int>(undone.size()) != n ||
      static_cast<int>(running.size()) != n)
    throw std::invalid_argument("undone/running arity mismatch");
  for (int i = 0; i < n; ++i) {
    if (undone[i] && (running[i] < 0 || running[i] >= space.dims[i]))
      throw std::invalid_argument("undone agent without a running macro-action");
  }
  int best = -1;
  double best_q = 0.0;
  for (int idx = 0; idx < space.size(); ++idx) {
    bool ok = true;
    for (int i = 0; i < n && ok; ++i)
      if (undone[i] && space.component(idx, i) != running[i]) ok = false;
    if (!ok) continue;
    if (best < 0 || q_joint(idx) > best_q) {
      best = idx;
      best_q = q_joint(idx);
    }
  }
  return best;
}

InputCodec InputCodec::from_env(const MacroEnv& env) {
  InputCodec c;
  for (int i = 0; i < env.num_agents(); ++i) {
    c.schemas.push_back(env.obs_schema(i));
    c.action_dims.push_back(env.num_macro_actions(i));
  }
  c.space.dims = c.action_dims;
  return c;
}

int InputCodec::dec_input_size(int agent) const {
  return schemas[agent].onehot_size() + action_dims[agent];
}

int InputCodec::cen_input_size() const {
  int n = 0;
  for (int i = 0; i < num_agents(); ++i) n += dec_input_size(i);
  return n;
}

Eigen::VectorXd InputCodec::encode_dec(int agent, const MacroObservation& z,
                                       int prev_m) const {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(dec_input_size(agent));
  int used = encode_onehot(z, schemas[agent], x.data(), 0);
  if (prev_m >= 0) {
    if (prev_m >= action_dims[agent])
      throw std::invalid_argument("previous action out of range");
    x(used + prev_m) = 1.0;
  }
  return x;
}

Eigen::VectorXd InputCodec::encode_cen(const std::vector<MacroObservation>& zs,
                                       const std::vector<int>& prev_ms) const {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(cen_input_size());
  int off = 0;
  for (int i = 0; i < num_agents(); ++i) {
    x.segment(off, dec_input_size(i)) = encode_dec(i, zs[i], prev_ms[i]);
    off += dec_input_size(i);
  }
  return x;
}

void AgentNets::refresh_targets() {
  for (size_t i = 0; i < dec.size(); ++i) dec[i].copy_into_target(dec_target[i]);
  for (size_t i = 0; i < cen.size(); ++i) cen[i].copy_into_target(cen_target[i]);
}

AgentNets make_agent_nets(const InputCodec& codec, int hidden, int lstm_dec,
                          int lstm_cen, bool with_dec, bool with_cen,
                          Rng& rng) {
  AgentNets nets;
  nets.space = codec.space;
  if (with_dec) {
    for (int i = 0; i < codec.num_agents(); ++i) {
      NetSpec spec{codec.dec_input_size(i), hidden, lstm_dec,
                   codec.action_dims[i]};
      RecurrentQNet net(spec);
      net.init_weights(rng);
      nets.dec_target.emplace_back(spec);
      nets.dec.push_back(std::move(net));
    }
  }
  if (with_cen) {
    NetSpec spec{codec.cen_input_size(), hidden, lstm_cen, codec.space.size()};
    RecurrentQNet net(spec);
    net.init_weights(rng);
    nets.cen_target.emplace_back(spec);
    nets.cen.push_back(std::move(net));
  }
  nets.refresh_targets();
  return nets;
}

double cen_target_value(double joint_r, double gamma_pow,
                        const Eigen::VectorXd& q_next_online,
                        const Eigen::VectorXd& q_next_target,
                        const JointActionSpace& space,
                        const std::vector<bool>& undone,
                        const std::vector<int>& running, bool terminal) {
  if (terminal) return joint_r;
  int a = conditional_joint_argmax(q_next_online, space, undone, running);
  return joint_r + gamma_pow * q_next_target(a);
}

double macdec_target_value(double r_i, double gamma_pow, int agent,
                           const Eigen::VectorXd* q_joint_next_online,
                           const Eigen::VectorXd* q_dec_next_online_i,
                           const Eigen::VectorXd& q_dec_next_target_i,
                           const JointActionSpace& space,
                           const std::vector<bool>& undone,
                           const std::vector<int>& running, bool terminal,
                           SelectorKind selector) {
  if (terminal) return r_i;
  int a_i;
  switch (selector) {
    case SelectorKind::CentralizedConditional: {
      if (!q_joint_next_online)
        throw std::invalid_argument("centralized selector needs joint q values");
      int joint =
          conditional_joint_argmax(*q_joint_next_online, space, undone, running);
      a_i = space.component(joint, agent);
      break;
    }
    case SelectorKind::CentralizedUnconditional: {
      if (!q_joint_next_online)
        throw std::invalid_argument("centralized selector needs joint q values");
      std::vector<bool> none(space.dims.size(), false);
      int joint = conditional_joint_argmax(*q_joint_next_online, space, none,
                                           running);
      a_i = space.component(joint, agent);
      break;
    }
    case SelectorKind::OwnNet: {
      if (!q_dec_next_online_i)
        throw std::invalid_argument("own-net selector needs the agent's q values");
      a_i = 0;
      for (int k = 1; k < q_dec_next_online_i->size(); ++k)
        if ((*q_dec_next_online_i)(k) > (*q_dec_next_online_i)(a_i)) a_i = k;
      break;
    }
    default:
      throw std::logic_error("unknown selector");
  }
  return r_i + gamma_pow * q_dec_next_target_i(a_i);
}

std::vector<Eigen::MatrixXd> build_dec_inputs(const Minibatch& mb,
                                              const InputCodec& codec,
                                              int agent) {
  int B = static_cast<int>(mb.episodes.size());
  int T = mb.max_len + 1;
  std::vector<Eigen::MatrixXd> xs(
      T, Eigen::MatrixXd::Zero(codec.dec_input_size(agent), B));
  for (int b = 0; b < B; ++b) {
    const EpisodeRecord& ep = *mb.episodes[b];
    xs[0].col(b) = codec.encode_dec(agent, ep.initial_obs[agent], -1);
    for (int r = 0; r < ep.length(); ++r) {
      const AgentStep& s = ep.records[r].agents[agent];
      xs[r + 1].col(b) = codec.encode_dec(agent, s.z_next, s.m.id);
    }
  }
  return xs;
}

std::vector<Eigen::MatrixXd> build_cen_inputs(const Minibatch& mb,
                                              const InputCodec& codec) {
  int B = static_cast<int>(mb.episodes.size());
  int T = mb.max_len + 1;
  int n = codec.num_agents();
  std::vector<Eigen::MatrixXd> xs(T,
                                  Eigen::MatrixXd::Zero(codec.cen_input_size(), B));
  std::vector<MacroObservation> zs(n);
  std::vector<int> prev(n);
  for (int b = 0; b < B; ++b) {
    const EpisodeRecord& ep = *mb.episodes[b];
    for (int i = 0; i < n; ++i) {
      zs[i] = ep.initial_obs[i];
      prev[i] = -1;
    }
    xs[0].col(b) = codec.encode_cen(zs, prev);
    for (int r = 0; r < ep.length(); ++r) {
      for (int i = 0; i < n; ++i) {
        zs[i] = ep.records[r].agents[i].z_next;
        prev[i] = ep.records[r].agents[i].m.id;
      }
      xs[r + 1].col(b) = codec.encode_cen(zs, prev);
    }
  }
  return xs;
}

std::vector<Eigen::VectorXd> build_position_mask(const Minibatch& mb) {
  int B = static_cast<int>(mb.episodes.size());
  int T = mb.max_len + 1;
  std::vector<Eigen::VectorXd> mask(T, Eigen::VectorXd::Zero(B));
  for (int b = 0; b < B; ++b) {
    int len = mb.episodes[b]->length();
    for (int p = 0; p <= len; ++p) mask[p](b) = 1.0;
  }
  return mask;
}

namespace {

std::vector<int> running_actions(const JointStepRecord& rec) {
  std::vector<int> m(rec.agents.size());
  for (size_t i = 0; i < rec.agents.size(); ++i) m[i] = rec.agents[i].m.id;
  return m;
}

TargetBatch cen_targets_from_q(const Minibatch& mb, const JointActionSpace& space,
                               const LearnerConfig& cfg,
                               const std::vector<Eigen::MatrixXd>& q_on,
                               const std::vector<Eigen::MatrixXd>& q_tg) {
  int B = static_cast<int>(mb.episodes.size());
  TargetBatch out;
  out.y.assign(mb.max_len, Eigen::VectorXd::Zero(B));
  out.mask.assign(mb.max_len, Eigen::VectorXd::Zero(B));
  for (int b = 0; b < B; ++b) {
    const EpisodeRecord& ep = *mb.episodes[b];
    for (int r = 0; r < ep.length(); ++r) {
      const JointStepRecord& rec = ep.records[r];
      double gp = ipow(cfg.gamma, cfg.bootstrap_exponent(rec.gap));
      out.y[r](b) = cen_target_value(
          rec.joint_r_cum, gp, q_on[r + 1].col(b), q_tg[r + 1].col(b), space,
          rec.undone_mask(), running_actions(rec), rec.terminal);
      out.mask[r](b) = 1.0;
    }
  }
  return out;
}

TargetBatch macdec_targets_from_q(const Minibatch& mb,
                                  const JointActionSpace& space,
                                  const LearnerConfig& cfg, int agent,
                                  SelectorKind selector,
                                  const std::vector<Eigen::MatrixXd>* q_joint_on,
                                  const std::vector<Eigen::MatrixXd>* q_dec_on,
                                  const std::vector<Eigen::MatrixXd>& q_dec_tg) {
  int B = static_cast<int>(mb.episodes.size());
  TargetBatch out;
  out.y.assign(mb.max_len, Eigen::VectorXd::Zero(B));
  out.mask.assign(mb.max_len, Eigen::VectorXd::Zero(B));
  for (int b = 0; b < B; ++b) {
    const EpisodeRecord& ep = *mb.episodes[b];
    for (int r = 0; r < ep.length(); ++r) {
      const JointStepRecord& rec = ep.records[r];
      const AgentStep& s = rec.agents[agent];
      if (!s.terminated) continue;
      double gp = ipow(cfg.gamma, cfg.bootstrap_exponent(s.duration));
      Eigen::VectorXd qj, qd;
      if (q_joint_on) qj = (*q_joint_on)[r + 1].col(b);
      if (q_dec_on) qd = (*q_dec_on)[r + 1].col(b);
      out.y[r](b) = macdec_target_value(
          s.r_cum, gp, agent, q_joint_on ? &qj : nullptr,
          q_dec_on ? &qd : nullptr, q_dec_tg[r + 1].col(b), space,
          rec.undone_mask(), running_actions(rec), rec.terminal, selector);
      out.mask[r](b) = 1.0;
    }
  }
  return out;
}

std::vector<Eigen::MatrixXd> forward_q(const RecurrentQNet& net,
                                       const std::vector<Eigen::MatrixXd>& xs,
                                       const std::vector<Eigen::VectorXd>& mask,
                                       ForwardCache* cache_out = nullptr) {
  ForwardCache cache = net.forward_sequence(
      xs, net.zero_hidden(static_cast<int>(xs[0].cols())), mask);
  std::vector<Eigen::MatrixXd> q = cache.q;
  if (cache_out) *cache_out = std::move(cache);
  return q;
}

}  // namespace

TargetBatch cen_target(const Minibatch& mb, const AgentNets& nets,
                       const InputCodec& codec, const LearnerConfig& cfg) {
  if (!nets.has_cen()) throw std::invalid_argument("no centralized net");
  auto xs = build_cen_inputs(mb, codec);
  auto mask = build_position_mask(mb);
  auto q_on = forward_q(nets.cen[0], xs, mask);
  auto q_tg = forward_q(nets.cen_target[0], xs, mask);
  return cen_targets_from_q(mb, nets.space, cfg, q_on, q_tg);
}

TargetBatch macdec_target(const Minibatch& mb, const AgentNets& nets,
                          const InputCodec& codec, const LearnerConfig& cfg,
                          int agent, SelectorKind selector) {
  auto mask = build_position_mask(mb);
  std::vector<Eigen::MatrixXd> q_joint, q_dec_on;
  const std::vector<Eigen::MatrixXd>* qj = nullptr;
  const std::vector<Eigen::MatrixXd>* qd = nullptr;
  if (selector != SelectorKind::OwnNet) {
    if (!nets.has_cen()) throw std::invalid_argument("no centralized net");
    q_joint = forward_q(nets.cen[0], build_cen_inputs(mb, codec), mask);
    qj = &q_joint;
  } else {
    q_dec_on =
        forward_q(nets.dec[agent], build_dec_inputs(mb, codec, agent), mask);
    qd = &q_dec_on;
  }
  auto q_tg =
      forward_q(nets.dec_target[agent], build_dec_inputs(mb, codec, agent), mask);
  return macdec_targets_from_q(mb, nets.space, cfg, agent, selector, qj, qd,
                               q_tg);
}

void update_centralized(AgentNets& nets, const Minibatch& mb,
                        const InputCodec& codec, const LearnerConfig& cfg) {
  if (!nets.has_cen()) throw std::invalid_argument("no centralized net");
  int B = static_cast<int>(mb.episodes.size());
  auto xs = build_cen_inputs(mb, codec);
  auto mask = build_position_mask(mb);
  ForwardCache cache;
  auto q_on = forward_q(nets.cen[0], xs, mask, &cache);
  auto q_tg = forward_q(nets.cen_target[0], xs, mask);
  TargetBatch tb = cen_targets_from_q(mb, nets.space, cfg, q_on, q_tg);

  long count = 0;
  for (int r = 0; r < mb.max_len; ++r) count += static_cast<long>(tb.mask[r].sum());
  if (count == 0) return;

  std::vector<Eigen::MatrixXd> upstream(
      xs.size(), Eigen::MatrixXd::Zero(nets.space.size(), B));
  for (int b = 0; b < B; ++b) {
    const EpisodeRecord& ep = *mb.episodes[b];
    for (int r = 0; r < ep.length(); ++r) {
      int a = nets.space.index_of(running_actions(ep.records[r]));
      double delta = q_on[r](a, b) - tb.y[r](b);
      upstream[r](a, b) += 2.0 * delta / static_cast<double>(count);
    }
  }
  GradientSet grads = nets.cen[0].backward_sequence(cache, upstream);
  nets.cen[0].optimizer_step(grads, cfg.lr);
}

void update_decentralized(AgentNets& nets, const Minibatch& mb,
                          const InputCodec& codec, const LearnerConfig& cfg,
                          SelectorKind selector, double beta, StepDiag* diag) {
  if (!nets.has_dec()) throw std::invalid_argument("no decentralized nets");
  int B = static_cast<int>(mb.episodes.size());
  auto mask = build_position_mask(mb);

  std::vector<Eigen::MatrixXd> q_joint;
  const std::vector<Eigen::MatrixXd>* qj = nullptr;
  if (selector != SelectorKind::OwnNet) {
    q_joint = forward_q(nets.cen[0], build_cen_inputs(mb, codec), mask);
    qj = &q_joint;
    if (diag) diag->selector_q = q_joint;
  }

  for (int i = 0; i < static_cast<int>(nets.dec.size()); ++i) {
    auto xs = build_dec_inputs(mb, codec, i);
    ForwardCache cache;
    auto q_on = forward_q(nets.dec[i], xs, mask, &cache);
    auto q_tg = forward_q(nets.dec_target[i], xs, mask);
    const std::vector<Eigen::MatrixXd>* qd =
        selector == SelectorKind::OwnNet ? &q_on : nullptr;
    TargetBatch tb =
        macdec_targets_from_q(mb, nets.space, cfg, i, selector, qj, qd, q_tg);

    long count = 0;
    for (int r = 0; r < mb.max_len; ++r)
      count += static_cast<long>(tb.mask[r].sum());
    if (count == 0) continue;

    std::vector<Eigen::MatrixXd> upstream(
        xs.size(), Eigen::MatrixXd::Zero(codec.action_dims[i], B));
    for (int b = 0; b < B; ++b) {
      const EpisodeRecord& ep = *mb.episodes[b];
      for (int r = 0; r < ep.length(); ++r) {
        const AgentStep& s = ep.records[r].agents[i];
        if (!s.terminated) continue;
        int p = s.start_boundary;
        double q_pred = q_on[p](s.m.id, b);
        double td = tb.y[r](b) - q_pred;
        double w = td < 0.0 ? beta : 1.0;
        upstream[p](s.m.id, b) +=
            2.0 * w * (q_pred - tb.y[r](b)) / static_cast<double>(count);
      }
    }
    GradientSet grads = nets.dec[i].backward_sequence(cache, upstream);
    nets.dec[i].optimizer_step(grads, cfg.lr);
  }
}

void macdec_train_step(AgentNets& nets, const Minibatch& mb,
                       const InputCodec& codec, const LearnerConfig& cfg,
                       StepDiag* diag) {
  update_centralized(nets, mb, codec, cfg);
  SelectorKind selector =
      cfg.algorithm == Algorithm::MacDecMADDRQNRegularDoubleQ
          ? SelectorKind::OwnNet
          : (cfg.conditional_argmax ? SelectorKind::CentralizedConditional
                                    : SelectorKind::CentralizedUnconditional);
  update_decentralized(nets, mb, codec, cfg, selector, 1.0, diag);
}

void dec_hddrqn_update(AgentNets& nets, const Minibatch& mb,
                       const InputCodec& codec, const LearnerConfig& cfg) {
  update_decentralized(nets, mb, codec, cfg, SelectorKind::OwnNet,
                       cfg.hysteretic_beta);
}

std::map<AgentId, MacroAction> epsilon_greedy_select(
    const std::vector<bool>& free, const std::vector<Eigen::VectorXd>* dec_q,
    const Eigen::VectorXd* cen_q, const std::vector<int>& running,
    const JointActionSpace& space, double epsilon, ExplorationMode mode,
    Rng& rng) {
  int n = static_cast<int>(free.size());
  std::map<AgentId, MacroAction> actions;
  if (mode == ExplorationMode::Decentralized) {
    for (int i = 0; i < n; ++i) {
      if (!free[i]) continue;
      if (rng.uniform() < epsilon) {
        actions[i] = MacroAction{rng.uniform_int(space.dims[i])};
      } else {
        if (!dec_q) throw std::invalid_argument("decentralized q values required");
        const Eigen::VectorXd& q = (*dec_q)[i];
        int best = 0;
        for (int k = 1; k < q.size(); ++k)
          if (q(k) > q(best)) best = k;
        actions[i] = MacroAction{best};
      }
    }
    return actions;
  }
  // centralized: one draw decides the whole joint action
  if (rng.uniform() < epsilon) {
    for (int i = 0; i < n; ++i)
      if (free[i]) actions[i] = MacroAction{rng.uniform_int(space.dims[i])};
    return actions;
  }
  if (!cen_q) throw std::invalid_argument("centralized q values required");
  std::vector<bool> undone(n);
  for (int i = 0; i < n; ++i) undone[i] = !free[i];
  int joint = conditional_joint_argmax(*cen_q, space, undone, running);
  for (int i = 0; i < n; ++i)
    if (free[i]) actions[i] = MacroAction{space.component(joint, i)};
  return actions;
}

BoundaryTracker::BoundaryTracker(const InputCodec& codec, AgentNets* nets)
    : codec_(&codec), nets_(nets) {}

void BoundaryTracker::begin_episode(const std::vector<MacroObservation>& obs0) {
  int n = codec_->num_agents();
  dec_q_.assign(n, Eigen::VectorXd());
  cen_q_ = Eigen::VectorXd();
  if (nets_ && nets_->has_dec()) {
    dec_hidden_.clear();
    for (int i = 0; i < n; ++i)
      dec_hidden_.push_back(nets_->dec[i].zero_hidden(1));
  }
  if (nets_ && nets_->has_cen()) cen_hidden_ = nets_->cen[0].zero_hidden(1);
  advance(obs0, std::vector<int>(n, -1));
}

void BoundaryTracker::observe_boundary(const JointStepRecord& rec) {
  int n = codec_->num_agents();
  std::vector<MacroObservation> z(n);
  std::vector<int> prev(n);
  for (int i = 0; i < n; ++i) {
    z[i] = rec.agents[i].z_next;
    prev[i] = rec.agents[i].m.id;
  }
  advance(z, prev);
}

void BoundaryTracker::advance(const std::vector<MacroObservation>& z,
                              const std::vector<int>& prev) {
  if (!nets_) return;
  if (nets_->has_dec()) {
    for (int i = 0; i < codec_->num_agents(); ++i)
      dec_q_[i] = nets_->dec[i].step(codec_->encode_dec(i, z[i], prev[i]),
                                     dec_hidden_[i]);
  }
  if (nets_->has_cen())
    cen_q_ = nets_->cen[0].step(codec_->encode_cen(z, prev), cen_hidden_);
}

EpisodeRunner::EpisodeRunner(MacroEnv& env, double accum_gamma,
                             const InputCodec& codec, AgentNets* nets,
                             PolicyFn policy)
    : executor_(env, accum_gamma),
      codec_(&codec),
      policy_(std::move(policy)),
      tracker_(codec, nets) {}

void EpisodeRunner::start(std::uint64_t seed) {
  auto obs0 = executor_.reset(seed);
  episode_ = EpisodeRecord{obs0, {}, false};
  tracker_.begin_episode(obs0);
  running_.assign(obs0.size(), -1);
  done_ = false;
  last_gap_ = 0;
  return_sum_ = 0.0;
}

bool EpisodeRunner::step_boundary() {
  if (done_) throw std::logic_error("episode already finished");
  auto actions = policy_(executor_.free_agents(), running_, &tracker_);
  JointStepRecord rec = executor_.run_until_any_termination(actions);
  for (size_t i = 0; i < rec.agents.size(); ++i)
    running_[i] = rec.agents[i].m.id;
  last_gap_ = rec.gap;
  return_sum_ += rec.joint_r_cum;
  tracker_.observe_boundary(rec);
  done_ = rec.episode_done;
  episode_.terminal = rec.terminal;
  episode_.records.push_back(std::move(rec));
  return done_;
}

}  // namespace macdec
