#pragma once

#include <array>

#include "macdec/core.hpp"

namespace macdec {

struct BPConfig {
  int grid_size = 10;   // N, even, >= 6
  int horizon = 0;      // 0 = default (100 for N=10, 300 for N=30, else 10N)
  double reward_big = 100.0;
  double reward_small = 10.0;
  double penalty = -5.0;
  double reward_step = -0.1;

  int resolved_horizon() const;
};

// Front-cell categories, in schema order.
enum class BPCell { Empty = 0, Teammate = 1, Boundary = 2, SmallBox = 3, BigBox = 4 };

// Macro-action ids shared by both robots. The box index / big-box cell of the
// Move-to targets follow each robot's side assignment.
enum class BPMacro {
  TurnLeft = 0,
  TurnRight = 1,
  Stay = 2,
  MoveToSmallBox = 3,
  MoveToBigBox = 4,
  Push = 5,
};
constexpr int kBPNumMacros = 6;

// Events of one primitive step; reward = step + penalties + deliveries.
struct BPStepEvents {
  int lone_big_push = 0;
  int boundary_hit = 0;
  bool small_delivered = false;
  bool big_delivered = false;
};

double bp_reward(const BPConfig& cfg, const BPStepEvents& ev);

// Two robots, one big box movable only by a joint push, two distracting small
// boxes; each robot observes the single cell in front of it. Goal area is
// row 0.
class BoxPushingEnv : public MacroEnv {
 public:
  explicit BoxPushingEnv(const BPConfig& cfg);

  int num_agents() const override { return 2; }
  int num_macro_actions(AgentId) const override { return kBPNumMacros; }
  ObsSchema obs_schema(AgentId) const override { return {{5}}; }
  int horizon() const override { return horizon_; }

  void reset(std::uint64_t seed) override;
  MacroObservation observe(AgentId agent) const override;
  void start_macro(AgentId agent, MacroAction m) override;
  PrimitiveOutcome advance() override;

  std::string action_name(AgentId agent, MacroAction m) const override;
  std::string render() const override;

  const BPConfig& config() const { return cfg_; }

 private:
  struct Robot {
    int row = 0, col = 0;
    int facing = 0;  // 0=N 1=E 2=S 3=W
    BPMacro macro = BPMacro::Stay;
    int wp_row = 0, wp_col = 0;  // Move-to target waypoint
  };

  BPCell front_cell(int robot) const;
  bool in_grid(int row, int col) const;
  bool is_small_box(int row, int col) const;
  bool is_big_box(int row, int col) const;
  bool occupied_by_box(int row, int col) const;
  bool robot_at(int row, int col, int except) const;

  BPConfig cfg_;
  int horizon_;
  std::array<Robot, 2> robots_;
  int big_row_ = 0, big_left_col_ = 0;  // big box cells: (row,c) and (row,c+1)
  std::array<std::array<int, 2>, 2> small_;  // per box: {row, col}
  bool big_delivered_ = false;
  std::array<bool, 2> small_delivered_{};
};

}  // namespace macdec
