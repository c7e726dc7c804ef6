#include "macdec/warehouse.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace macdec {

double wtd_reward(const WTDConfig& cfg, const WTDStepEvents& ev) {
  return cfg.reward_step + cfg.reward_failed_pass * ev.failed_pass +
         cfg.reward_delivery * ev.delivered;
}

WarehouseEnv::WarehouseEnv(const WTDConfig& cfg) : cfg_(cfg) {
  if (cfg.speed <= 0.0) throw std::invalid_argument("WTD speed must be > 0");
  if (cfg.human_step_duration <= 0 || cfg.search_duration <= 0 ||
      cfg.pass_duration <= 0 || cfg.get_tool_timeout <= 0 || cfg.horizon <= 0)
    throw std::invalid_argument("WTD durations must be positive");
  if (cfg.staging_capacity != 2)
    throw std::invalid_argument("WTD staging capacity must be 2");
  reset(0);
}

int WarehouseEnv::travel_steps(const std::array<double, 2>& from,
                               const std::array<double, 2>& to) const {
  double d = std::hypot(to[0] - from[0], to[1] - from[1]);
  return static_cast<int>(std::ceil(d / cfg_.speed));
}

void WarehouseEnv::reset(std::uint64_t /*seed*/) {
  for (auto& m : mobiles_) {
    m.pos = cfg_.wp_tr;
    m.basket.clear();
    m.macro = WTDMobileMacro::GetTool;
    m.traveling = false;
    m.waiting = false;
    m.wait_ticks = 0;
    m.received = false;
  }
  gray_ = Gray{};
  human_ = Human{};
  human_.work_left = cfg_.human_step_duration;
  staging_.clear();
  terminal_ = false;
}

bool WarehouseEnv::at(const std::array<double, 2>& p,
                      const std::array<double, 2>& q) const {
  return std::abs(p[0] - q[0]) < 1e-9 && std::abs(p[1] - q[1]) < 1e-9;
}

const std::array<double, 2>& WarehouseEnv::own_waypoint(int mobile) const {
  return mobile == 0 ? cfg_.wp_m0 : cfg_.wp_m1;
}

MacroObservation WarehouseEnv::observe(AgentId agent) const {
  if (agent == 2) {
    bool m0 = at(mobiles_[0].pos, cfg_.wp_m0);
    bool m1 = at(mobiles_[1].pos, cfg_.wp_m1);
    int who = m0 && m1 ? 3 : m1 ? 2 : m0 ? 1 : 0;
    return {{who, static_cast<int>(staging_.size())}};
  }
  const Mobile& m = mobiles_[agent];
  int loc = at(m.pos, own_waypoint(agent)) ? 0
            : at(m.pos, cfg_.wp_tr)        ? 1
            : at(m.pos, cfg_.wp_ws)        ? 2
                                           : 3;
  // the human's step is only visible from the workshop
  int human_step = loc == 2 ? human_.current_step - 1 : 4;
  int carry1 = 0, carry2 = 0, carry3 = 0;
  for (int t : m.basket) {
    if (t == 1) carry1 = 1;
    if (t == 2) carry2 = 1;
    if (t == 3) carry3 = 1;
  }
  // staged count is only visible inside the tool room
  int staged = m.pos[1] <= cfg_.tool_room_y + 1e-9
                   ? static_cast<int>(staging_.size())
                   : 3;
  return {{loc, human_step, carry1, carry2, carry3, staged}};
}

void WarehouseEnv::start_macro(AgentId agent, MacroAction m) {
  if (agent == 2) {
    gray_.macro = static_cast<WTDGrayMacro>(m.id);
    switch (gray_.macro) {
      case WTDGrayMacro::WaitM: gray_.ticks_left = 1; break;
      case WTDGrayMacro::SearchTool1:
      case WTDGrayMacro::SearchTool2:
      case WTDGrayMacro::SearchTool3:
        gray_.ticks_left = cfg_.search_duration;
        break;
      case WTDGrayMacro::PassToM0:
      case WTDGrayMacro::PassToM1:
        gray_.ticks_left = cfg_.pass_duration;
        break;
    }
    return;
  }
  Mobile& mob = mobiles_[agent];
  mob.macro = static_cast<WTDMobileMacro>(m.id);
  switch (mob.macro) {
    case WTDMobileMacro::GoToWS: mob.target = cfg_.wp_ws; break;
    case WTDMobileMacro::GoToTR: mob.target = cfg_.wp_tr; break;
    case WTDMobileMacro::GetTool: mob.target = own_waypoint(agent); break;
  }
  mob.traveling = !at(mob.pos, mob.target);
  mob.waiting = !mob.traveling && mob.macro == WTDMobileMacro::GetTool;
  mob.wait_ticks = 0;
  mob.received = false;
}

PrimitiveOutcome WarehouseEnv::advance() {
  PrimitiveOutcome out;
  out.macro_done.assign(3, false);
  WTDStepEvents ev;

  // 1. mobiles move (or wait at the table)
  for (int i = 0; i < 2; ++i) {
    Mobile& m = mobiles_[i];
    if (m.traveling) {
      double dx = m.target[0] - m.pos[0], dy = m.target[1] - m.pos[1];
      double d = std::hypot(dx, dy);
      if (d <= cfg_.speed + 1e-12) {
        m.pos = m.target;
        m.traveling = false;
        if (m.macro == WTDMobileMacro::GetTool) {
          m.waiting = true;
          m.wait_ticks = 0;
        } else {
          out.macro_done[i] = true;
        }
      } else {
        m.pos[0] += cfg_.speed * dx / d;
        m.pos[1] += cfg_.speed * dy / d;
      }
    } else if (m.waiting) {
      ++m.wait_ticks;
      if (m.wait_ticks >= cfg_.get_tool_timeout) out.macro_done[i] = true;
    } else {
      // zero-distance relocation: one no-op step
      out.macro_done[i] = true;
    }
  }

  // 2. gray's action ticks down; effects land on the final tick, after the
  //    mobiles have moved
  if (--gray_.ticks_left <= 0) {
    out.macro_done[2] = true;
    switch (gray_.macro) {
      case WTDGrayMacro::WaitM:
        break;
      case WTDGrayMacro::SearchTool1:
      case WTDGrayMacro::SearchTool2:
      case WTDGrayMacro::SearchTool3: {
        int tool = static_cast<int>(gray_.macro);
        if (static_cast<int>(staging_.size()) < cfg_.staging_capacity)
          staging_.push_back(tool);
        // full staging area: the search was a 6-step pause
        break;
      }
      case WTDGrayMacro::PassToM0:
      case WTDGrayMacro::PassToM1: {
        int who = gray_.macro == WTDGrayMacro::PassToM0 ? 0 : 1;
        Mobile& m = mobiles_[who];
        if (at(m.pos, own_waypoint(who))) {
          if (!staging_.empty()) {
            m.basket.push_back(staging_.front());
            staging_.pop_front();
            if (m.macro == WTDMobileMacro::GetTool && (m.waiting || !m.traveling)) {
              m.received = true;
              out.macro_done[who] = true;  // ends immediately upon receipt
            }
          }
        } else {
          ev.failed_pass += 1;
        }
        break;
      }
    }
  }

  // 3. workshop hand-over: one pending tool at a time, lowest index first
  for (int i = 0; i < 2 && !terminal_; ++i) {
    Mobile& m = mobiles_[i];
    if (!at(m.pos, cfg_.wp_ws) || human_.pending_tool != 0) continue;
    int needed = human_.delivered_count + 1;
    if (needed > 3) break;
    for (size_t k = 0; k < m.basket.size(); ++k) {
      if (m.basket[k] == needed) {
        m.basket.erase(m.basket.begin() + k);
        human_.pending_tool = needed;
        human_.delivered_count = needed;
        ev.delivered += 1;
        if (needed == 3) terminal_ = true;  // delivery task accomplished
        break;
      }
    }
  }

  // 4. the human works, consumes the pending tool between steps, or waits
  if (!human_.done) {
    if (!human_.waiting) {
      if (--human_.work_left == 0) {
        if (human_.current_step == 4) {
          human_.done = true;
        } else if (human_.pending_tool == human_.current_step) {
          human_.pending_tool = 0;
          human_.current_step += 1;
          human_.work_left = cfg_.human_step_duration;
        } else {
          human_.waiting = true;
        }
      }
    } else if (human_.pending_tool == human_.current_step) {
      human_.pending_tool = 0;
      human_.current_step += 1;
      human_.work_left = cfg_.human_step_duration;
      human_.waiting = false;
    }
  }

  out.reward = wtd_reward(cfg_, ev);
  out.terminal = terminal_;
  return out;
}

std::string WarehouseEnv::action_name(AgentId agent, MacroAction m) const {
  if (agent == 2) {
    switch (static_cast<WTDGrayMacro>(m.id)) {
      case WTDGrayMacro::WaitM: return "Wait-M";
      case WTDGrayMacro::SearchTool1: return "Search-Tool(1)";
      case WTDGrayMacro::SearchTool2: return "Search-Tool(2)";
      case WTDGrayMacro::SearchTool3: return "Search-Tool(3)";
      case WTDGrayMacro::PassToM0: return "Pass-to-M(0)";
      case WTDGrayMacro::PassToM1: return "Pass-to-M(1)";
    }
  } else {
    switch (static_cast<WTDMobileMacro>(m.id)) {
      case WTDMobileMacro::GoToWS: return "Go-to-WS";
      case WTDMobileMacro::GoToTR: return "Go-to-TR";
      case WTDMobileMacro::GetTool: return "Get-Tool";
    }
  }
  return "?";
}

std::string WarehouseEnv::render() const {
  std::ostringstream os;
  os << "human: step " << human_.current_step
     << (human_.waiting ? " (waiting)" : "") << ", pending tool "
     << human_.pending_tool << ", delivered " << human_.delivered_count
     << "\nstaging:";
  for (int t : staging_) os << ' ' << t;
  os << "\n";
  for (int i = 0; i < 2; ++i) {
    const Mobile& m = mobiles_[i];
    os << "M" << i << " at (" << m.pos[0] << ',' << m.pos[1] << ") basket:";
    for (int t : m.basket) os << ' ' << t;
    os << "\n";
  }
  return os.str();
}

}  // namespace macdec
