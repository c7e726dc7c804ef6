#pragma once

#include <array>
#include <deque>

#include "macdec/core.hpp"

namespace macdec {

struct WTDConfig {
  double speed = 0.6;          // distance units per primitive step
  int human_step_duration = 18;
  int staging_capacity = 2;
  int search_duration = 6;
  int pass_duration = 4;
  int get_tool_timeout = 10;   // waiting steps after reaching the table
  int horizon = 150;
  std::array<double, 2> wp_m0 = {1.0, 1.0};  // mobile 0 table-side waypoint
  std::array<double, 2> wp_m1 = {2.0, 1.0};  // mobile 1 table-side waypoint
  std::array<double, 2> wp_tr = {4.0, 2.5};  // tool-room waypoint (start)
  std::array<double, 2> wp_ws = {2.5, 6.5};  // workshop waypoint
  double tool_room_y = 3.5;    // tool room is y <= this
  double reward_step = -1.0;
  double reward_failed_pass = -10.0;
  double reward_delivery = 100.0;
};

// Agents: 0,1 = mobile robots, 2 = gray manipulator.
enum class WTDMobileMacro { GoToWS = 0, GoToTR = 1, GetTool = 2 };
enum class WTDGrayMacro {
  WaitM = 0,
  SearchTool1 = 1,
  SearchTool2 = 2,
  SearchTool3 = 3,
  PassToM0 = 4,
  PassToM1 = 5,
};

struct WTDStepEvents {
  int failed_pass = 0;
  int delivered = 0;  // correct tools handed to the human this step
};

double wtd_reward(const WTDConfig& cfg, const WTDStepEvents& ev);

// One gray manipulator staging tools (FIFO, capacity 2) and two mobile
// robots ferrying them to a human working through a 4-step assembly; tools
// 1..3 are needed in order, one pending tool at a time.
class WarehouseEnv : public MacroEnv {
 public:
  explicit WarehouseEnv(const WTDConfig& cfg);

  int num_agents() const override { return 3; }
  int num_macro_actions(AgentId agent) const override {
    return agent == 2 ? 6 : 3;
  }
  ObsSchema obs_schema(AgentId agent) const override {
    if (agent == 2) return {{4, 3}};
    return {{4, 5, 2, 2, 2, 4}};
  }
  int horizon() const override { return cfg_.horizon; }

  void reset(std::uint64_t seed) override;
  MacroObservation observe(AgentId agent) const override;
  void start_macro(AgentId agent, MacroAction m) override;
  PrimitiveOutcome advance() override;

  std::string action_name(AgentId agent, MacroAction m) const override;
  std::string render() const override;

  const WTDConfig& config() const { return cfg_; }
  int travel_steps(const std::array<double, 2>& from,
                   const std::array<double, 2>& to) const;

 private:
  struct Mobile {
    std::array<double, 2> pos;
    std::vector<int> basket;
    WTDMobileMacro macro = WTDMobileMacro::GetTool;
    std::array<double, 2> target;
    bool traveling = false;
    bool waiting = false;   // Get-Tool wait phase
    int wait_ticks = 0;
    bool received = false;  // tool obtained during the current Get-Tool
  };
  struct Gray {
    WTDGrayMacro macro = WTDGrayMacro::WaitM;
    int ticks_left = 0;
  };
  struct Human {
    int current_step = 1;   // assembly step being worked on (or waited at)
    int work_left = 0;
    bool waiting = false;
    int pending_tool = 0;   // handed over but not yet consumed; 0 = none
    int delivered_count = 0;
    bool done = false;
  };

  bool at(const std::array<double, 2>& p, const std::array<double, 2>& q) const;
  const std::array<double, 2>& own_waypoint(int mobile) const;

  WTDConfig cfg_;
  std::array<Mobile, 2> mobiles_;
  Gray gray_;
  Human human_;
  std::deque<int> staging_;
  bool terminal_ = false;
};

}  // namespace macdec
