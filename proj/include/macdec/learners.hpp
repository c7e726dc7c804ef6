#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "macdec/net.hpp"
#include "macdec/replay.hpp"

namespace macdec {

enum class Algorithm {
  DecHDDRQN,
  CenDDRQN,
  MacDecMADDRQN,
  ParallelMacDecMADDRQN,
  MacDecMADDRQNRegularDoubleQ,
};

enum class ExplorationMode { Centralized, Decentralized };

// Which network proposes the bootstrap action in a double-Q target.
enum class SelectorKind {
  CentralizedConditional,    // argmax over Q_phi constrained by undone agents
  CentralizedUnconditional,  // plain joint argmax over Q_phi
  OwnNet,                    // each agent's own online net
};

Algorithm algorithm_from_string(const std::string& s);
std::string to_string(Algorithm a);
ExplorationMode exploration_mode_from_string(const std::string& s);
std::string to_string(ExplorationMode m);

struct LearnerConfig {
  double gamma = 0.98;
  double lr = 1e-3;
  double hysteretic_beta = 0.4;
  int batch_size = 16;
  // 0 trains once per finished episode; >0 trains every that many boundaries
  int train_interval_boundaries = 0;
  long target_update_primitive_steps = 5000;
  double epsilon_start = 1.0;
  double epsilon_end = 0.1;
  long epsilon_decay_episodes = 0;  // 0 = resolved to 40% of the episode budget
  ExplorationMode exploration_mode = ExplorationMode::Centralized;
  Algorithm algorithm = Algorithm::MacDecMADDRQN;
  bool conditional_argmax = true;
  bool plain_sum_gamma_power_1 = false;
  int buffer_capacity = 1000;

  double epsilon_at(long episode) const;
  // reward accumulation discount inside macro-actions
  double accum_gamma() const { return plain_sum_gamma_power_1 ? 1.0 : gamma; }
  // discount exponent used when bootstrapping across a gap of `steps`
  int bootstrap_exponent(int steps) const {
    return plain_sum_gamma_power_1 ? 1 : steps;
  }
};

// Joint macro-action indexing, row-major by agent order (agent 0 outermost).
struct JointActionSpace {
  std::vector<int> dims;

  int size() const;
  int index_of(const std::vector<int>& actions) const;
  std::vector<int> actions_of(int index) const;
  int component(int index, int agent) const;
};

// Argmax over joint actions whose components for undone agents are fixed to
// those agents' running macro-actions. Lowest index wins ties.
int conditional_joint_argmax(const Eigen::VectorXd& q_joint,
                             const JointActionSpace& space,
                             const std::vector<bool>& undone,
                             const std::vector<int>& running);

// One-hot encoding of boundary inputs: onehot(z_i) ++ onehot(previous own
// macro-action); the centralized net sees the concatenation over agents.
struct InputCodec {
  std::vector<ObsSchema> schemas;
  std::vector<int> action_dims;
  JointActionSpace space;

  static InputCodec from_env(const MacroEnv& env);

  int num_agents() const { return static_cast<int>(schemas.size()); }
  int dec_input_size(int agent) const;
  int cen_input_size() const;
  // prev_m == -1 encodes "no previous action" (episode start)
  Eigen::VectorXd encode_dec(int agent, const MacroObservation& z,
                             int prev_m) const;
  Eigen::VectorXd encode_cen(const std::vector<MacroObservation>& zs,
                             const std::vector<int>& prev_ms) const;
};

// Online and target networks of one training configuration.
struct AgentNets {
  std::vector<RecurrentQNet> dec, dec_target;    // per agent; may be empty
  std::vector<RecurrentQNet> cen, cen_target;    // 0 or 1 entries
  JointActionSpace space;

  bool has_dec() const { return !dec.empty(); }
  bool has_cen() const { return !cen.empty(); }
  void refresh_targets();
};

AgentNets make_agent_nets(const InputCodec& codec, int hidden, int lstm_dec,
                          int lstm_cen, bool with_dec, bool with_cen, Rng& rng);

// ---- target formulas (one boundary) -------------------------------------

// y = r + gamma_pow * Q_target(argmax_{m'} Q_online(m' | undone)); terminal
// boundaries return r alone.
double cen_target_value(double joint_r, double gamma_pow,
                        const Eigen::VectorXd& q_next_online,
                        const Eigen::VectorXd& q_next_target,
                        const JointActionSpace& space,
                        const std::vector<bool>& undone,
                        const std::vector<int>& running, bool terminal);

// y_i = r_i + gamma_pow * Q_target_i([selector]_i); the selector picks a
// joint action from q_joint_next_online (centralized kinds) or agent i's own
// q_dec_next_online (OwnNet).
double macdec_target_value(double r_i, double gamma_pow, int agent,
                           const Eigen::VectorXd* q_joint_next_online,
                           const Eigen::VectorXd* q_dec_next_online_i,
                           const Eigen::VectorXd& q_dec_next_target_i,
                           const JointActionSpace& space,
                           const std::vector<bool>& undone,
                           const std::vector<int>& running, bool terminal,
                           SelectorKind selector);

// ---- batch input assembly -------------------------------------------------

// Sequence positions run over boundaries 0..max_len; the record at index r
// begins at position r and ends at position r+1.
std::vector<Eigen::MatrixXd> build_dec_inputs(const Minibatch& mb,
                                              const InputCodec& codec,
                                              int agent);
std::vector<Eigen::MatrixXd> build_cen_inputs(const Minibatch& mb,
                                              const InputCodec& codec);
std::vector<Eigen::VectorXd> build_position_mask(const Minibatch& mb);

// ---- batch targets (spec operations) ---------------------------------------

// targets[t](b) for record t of sample b; entries without a valid record are 0
// and flagged false in the companion mask.
struct TargetBatch {
  std::vector<Eigen::VectorXd> y;
  std::vector<Eigen::VectorXd> mask;
};

TargetBatch cen_target(const Minibatch& mb, const AgentNets& nets,
                       const InputCodec& codec, const LearnerConfig& cfg);
TargetBatch macdec_target(const Minibatch& mb, const AgentNets& nets,
                          const InputCodec& codec, const LearnerConfig& cfg,
                          int agent, SelectorKind selector);

// ---- gradient updates -------------------------------------------------------

struct StepDiag {
  // cen q values the decentralized updates used for action selection
  std::vector<Eigen::MatrixXd> selector_q;
};

// One Adam step on Q_phi from the joint view of `mb`.
void update_centralized(AgentNets& nets, const Minibatch& mb,
                        const InputCodec& codec, const LearnerConfig& cfg);

// One Adam step per agent on Q_theta_i. `beta` scales negative-TD samples
// (1.0 disables hysteresis).
void update_decentralized(AgentNets& nets, const Minibatch& mb,
                          const InputCodec& codec, const LearnerConfig& cfg,
                          SelectorKind selector, double beta,
                          StepDiag* diag = nullptr);

// Q_phi first, then every Q_theta_i against the post-update Q_phi.
void macdec_train_step(AgentNets& nets, const Minibatch& mb,
                       const InputCodec& codec, const LearnerConfig& cfg,
                       StepDiag* diag = nullptr);

// Hysteretic decentralized double-DQN step (own-net selectors).
void dec_hddrqn_update(AgentNets& nets, const Minibatch& mb,
                       const InputCodec& codec, const LearnerConfig& cfg);

// ---- action selection -------------------------------------------------------

// Picks macro-actions for the agents marked free. Decentralized mode explores
// each agent independently; centralized mode draws one epsilon for the joint
// action and otherwise follows the conditional joint argmax.
std::map<AgentId, MacroAction> epsilon_greedy_select(
    const std::vector<bool>& free, const std::vector<Eigen::VectorXd>* dec_q,
    const Eigen::VectorXd* cen_q, const std::vector<int>& running,
    const JointActionSpace& space, double epsilon, ExplorationMode mode,
    Rng& rng);

// ---- rollout driver ---------------------------------------------------------

// Advances each tracked net's hidden state once per boundary using the same
// input encoding the training batches use.
class BoundaryTracker {
 public:
  BoundaryTracker(const InputCodec& codec, AgentNets* nets);

  void begin_episode(const std::vector<MacroObservation>& obs0);
  void observe_boundary(const JointStepRecord& rec);

  const std::vector<Eigen::VectorXd>& dec_q() const { return dec_q_; }
  const Eigen::VectorXd& cen_q() const { return cen_q_; }

 private:
  void advance(const std::vector<MacroObservation>& z,
               const std::vector<int>& prev);

  const InputCodec* codec_;
  AgentNets* nets_;
  std::vector<HiddenState> dec_hidden_;
  HiddenState cen_hidden_;
  std::vector<Eigen::VectorXd> dec_q_;
  Eigen::VectorXd cen_q_;
};

// Chooses actions for the free agents at a boundary.
using PolicyFn = std::function<std::map<AgentId, MacroAction>(
    const std::vector<bool>& free, const std::vector<int>& running,
    const BoundaryTracker* tracker)>;

// Incremental rollout of one environment instance; parallel training drives
// two of these in lockstep.
class EpisodeRunner {
 public:
  EpisodeRunner(MacroEnv& env, double accum_gamma, const InputCodec& codec,
                AgentNets* nets, PolicyFn policy);

  void start(std::uint64_t seed);
  // Runs to the next boundary; returns true when the episode finished.
  bool step_boundary();

  bool episode_done() const { return done_; }
  const EpisodeRecord& episode() const { return episode_; }
  EpisodeRecord take_episode() { return std::move(episode_); }
  int last_gap() const { return last_gap_; }
  // plain sum of segment accumulations; the undiscounted return when the
  // executor runs with accum_gamma 1
  double return_sum() const { return return_sum_; }

 private:
  MacroExecutor executor_;
  const InputCodec* codec_;
  PolicyFn policy_;
  BoundaryTracker tracker_;
  EpisodeRecord episode_;
  std::vector<int> running_;
  bool done_ = true;
  int last_gap_ = 0;
  double return_sum_ = 0.0;
};

}  // namespace macdec
