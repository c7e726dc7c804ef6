#include "macdec/box_pushing.hpp"

#include <sstream>
#include <stdexcept>

namespace macdec {

namespace {
constexpr int kDR[4] = {-1, 0, 1, 0};  // N E S W
constexpr int kDC[4] = {0, 1, 0, -1};
constexpr char kArrow[4] = {'^', '>', 'v', '<'};
}  // namespace

int BPConfig::resolved_horizon() const {
  if (horizon > 0) return horizon;
  if (grid_size == 10) return 100;
  if (grid_size == 30) return 300;
  return 10 * grid_size;
}

double bp_reward(const BPConfig& cfg, const BPStepEvents& ev) {
  double r = cfg.reward_step;
  r += cfg.penalty * (ev.lone_big_push + ev.boundary_hit);
  if (ev.small_delivered) r += cfg.reward_small;
  if (ev.big_delivered) r += cfg.reward_big;
  return r;
}

BoxPushingEnv::BoxPushingEnv(const BPConfig& cfg) : cfg_(cfg) {
  if (cfg.grid_size < 6 || cfg.grid_size % 2 != 0)
    throw std::invalid_argument("BP grid size must be even and >= 6");
  horizon_ = cfg.resolved_horizon();
  if (horizon_ < cfg.grid_size)
    throw std::invalid_argument("BP horizon must be >= grid size");
  reset(0);
}

void BoxPushingEnv::reset(std::uint64_t /*seed*/) {
  // Fixed symmetric layout; the domain itself is deterministic.
  int n = cfg_.grid_size;
  big_row_ = n / 2;
  big_left_col_ = n / 2 - 1;
  small_[0] = {n / 2, 1};
  small_[1] = {n / 2, n - 2};
  big_delivered_ = false;
  small_delivered_ = {false, false};
  robots_[0] = Robot{n - 1, n / 4, 0, BPMacro::Stay, 0, 0};
  robots_[1] = Robot{n - 1, 3 * n / 4, 0, BPMacro::Stay, 0, 0};
}

bool BoxPushingEnv::in_grid(int row, int col) const {
  return row >= 0 && row < cfg_.grid_size && col >= 0 && col < cfg_.grid_size;
}

bool BoxPushingEnv::is_small_box(int row, int col) const {
  for (int b = 0; b < 2; ++b)
    if (small_[b][0] == row && small_[b][1] == col) return true;
  return false;
}

bool BoxPushingEnv::is_big_box(int row, int col) const {
  return row == big_row_ && (col == big_left_col_ || col == big_left_col_ + 1);
}

bool BoxPushingEnv::occupied_by_box(int row, int col) const {
  return is_small_box(row, col) || is_big_box(row, col);
}

bool BoxPushingEnv::robot_at(int row, int col, int except) const {
  for (int r = 0; r < 2; ++r) {
    if (r == except) continue;
    if (robots_[r].row == row && robots_[r].col == col) return true;
  }
  return false;
}

BPCell BoxPushingEnv::front_cell(int robot) const {
  const Robot& r = robots_[robot];
  int fr = r.row + kDR[r.facing], fc = r.col + kDC[r.facing];
  if (!in_grid(fr, fc)) return BPCell::Boundary;
  if (robot_at(fr, fc, robot)) return BPCell::Teammate;
  if (is_small_box(fr, fc)) return BPCell::SmallBox;
  if (is_big_box(fr, fc)) return BPCell::BigBox;
  return BPCell::Empty;
}

MacroObservation BoxPushingEnv::observe(AgentId agent) const {
  return {{static_cast<int>(front_cell(agent))}};
}

void BoxPushingEnv::start_macro(AgentId agent, MacroAction m) {
  Robot& r = robots_[agent];
  r.macro = static_cast<BPMacro>(m.id);
  if (r.macro == BPMacro::MoveToSmallBox) {
    r.wp_row = small_[agent][0] + 1;
    r.wp_col = small_[agent][1];
  } else if (r.macro == BPMacro::MoveToBigBox) {
    r.wp_row = big_row_ + 1;
    r.wp_col = big_left_col_ + agent;  // robot 0 left cell, robot 1 right cell
  }
}

PrimitiveOutcome BoxPushingEnv::advance() {
  PrimitiveOutcome out;
  out.macro_done.assign(2, false);
  BPStepEvents ev;

  // Joint big-box push: both robots run Push, face the same direction, and
  // each fronts a distinct big-box cell.
  auto fronts_big = [&](int i) {
    const Robot& r = robots_[i];
    int fr = r.row + kDR[r.facing], fc = r.col + kDC[r.facing];
    return in_grid(fr, fc) && is_big_box(fr, fc);
  };
  bool joint_push = robots_[0].macro == BPMacro::Push &&
                    robots_[1].macro == BPMacro::Push &&
                    robots_[0].facing == robots_[1].facing &&
                    fronts_big(0) && fronts_big(1) &&
                    (robots_[0].col + kDC[robots_[0].facing] !=
                         robots_[1].col + kDC[robots_[1].facing] ||
                     robots_[0].row + kDR[robots_[0].facing] !=
                         robots_[1].row + kDR[robots_[1].facing]);

  if (joint_push) {
    int dir = robots_[0].facing;
    int nr = big_row_ + kDR[dir];
    int nlc = big_left_col_ + kDC[dir];
    if (in_grid(nr, nlc) && in_grid(nr, nlc + 1) && !is_small_box(nr, nlc) &&
        !is_small_box(nr, nlc + 1)) {
      big_row_ = nr;
      big_left_col_ = nlc;
      for (auto& r : robots_) {
        r.row += kDR[dir];
        r.col += kDC[dir];
      }
      if (big_row_ == 0) {
        ev.big_delivered = true;
        big_delivered_ = true;
        out.macro_done = {true, true};
      }
    } else {
      // box jammed against the grid edge; both contacts count as lone pushes
      ev.lone_big_push += 2;
      out.macro_done = {true, true};
    }
    out.reward = bp_reward(cfg_, ev);
    out.terminal = big_delivered_;
    return out;
  }

  // Intended destination cells, resolved together so two robots never move
  // into the same cell (lower index wins) and never swap cells.
  std::array<int, 2> want_row{robots_[0].row, robots_[1].row};
  std::array<int, 2> want_col{robots_[0].col, robots_[1].col};
  std::array<int, 2> want_face{robots_[0].facing, robots_[1].facing};
  std::array<bool, 2> done{false, false};
  // deferred small-box move: {box index, dest row, dest col}
  std::array<std::array<int, 3>, 2> box_move{{{-1, 0, 0}, {-1, 0, 0}}};

  for (int i = 0; i < 2; ++i) {
    Robot& r = robots_[i];
    switch (r.macro) {
      case BPMacro::TurnLeft:
        want_face[i] = (r.facing + 3) % 4;
        done[i] = true;
        break;
      case BPMacro::TurnRight:
        want_face[i] = (r.facing + 1) % 4;
        done[i] = true;
        break;
      case BPMacro::Stay:
        done[i] = true;
        break;
      case BPMacro::MoveToSmallBox:
      case BPMacro::MoveToBigBox: {
        if (r.row == r.wp_row && r.col == r.wp_col) {
          if (r.facing == 0) {
            done[i] = true;  // was already in place: one no-op step
          } else {
            // rotate toward north, left on ties
            want_face[i] = (r.facing == 1) ? 0 : (r.facing == 3) ? 0 : 1;
            if (want_face[i] == 0) done[i] = true;
          }
          break;
        }
        // Manhattan path, vertical leg first
        int dir;
        if (r.row != r.wp_row)
          dir = r.row > r.wp_row ? 0 : 2;
        else
          dir = r.col > r.wp_col ? 3 : 1;
        int nr = r.row + kDR[dir], nc = r.col + kDC[dir];
        if (robot_at(nr, nc, i)) {
          // teammate in the way: wait this step
        } else if (occupied_by_box(nr, nc)) {
          // sidestep along the other axis when it still has distance
          int alt = -1;
          if (dir == 0 || dir == 2) {
            if (r.col != r.wp_col) alt = r.col > r.wp_col ? 3 : 1;
          } else {
            if (r.row != r.wp_row) alt = r.row > r.wp_row ? 0 : 2;
          }
          if (alt >= 0) {
            int ar = r.row + kDR[alt], ac = r.col + kDC[alt];
            if (!robot_at(ar, ac, i) && !occupied_by_box(ar, ac)) {
              want_row[i] = ar;
              want_col[i] = ac;
              want_face[i] = alt;
            }
          }
        } else {
          want_row[i] = nr;
          want_col[i] = nc;
          want_face[i] = dir;
        }
        if (want_row[i] == r.wp_row && want_col[i] == r.wp_col &&
            want_face[i] == 0)
          done[i] = true;
        break;
      }
      case BPMacro::Push: {
        int fr = r.row + kDR[r.facing], fc = r.col + kDC[r.facing];
        if (!in_grid(fr, fc)) {
          ev.boundary_hit += 1;
          done[i] = true;
        } else if (is_big_box(fr, fc)) {
          ev.lone_big_push += 1;
          done[i] = true;
        } else if (is_small_box(fr, fc)) {
          int br = fr + kDR[r.facing], bc = fc + kDC[r.facing];
          if (!in_grid(br, bc)) {
            ev.boundary_hit += 1;  // box jammed against the edge
            done[i] = true;
          } else if (occupied_by_box(br, bc) || robot_at(br, bc, i)) {
            done[i] = true;  // blocked push, no penalty
          } else {
            int b = (small_[0][0] == fr && small_[0][1] == fc) ? 0 : 1;
            box_move[i] = {b, br, bc};
            want_row[i] = fr;
            want_col[i] = fc;
            if (br == 0) {
              ev.small_delivered = true;
              done[i] = true;
            }
          }
        } else if (robot_at(fr, fc, i)) {
          // teammate ahead: wait, keep pushing next step
        } else {
          want_row[i] = fr;
          want_col[i] = fc;
        }
        break;
      }
    }
  }

  // movement conflicts: same destination -> robot 0 wins; swaps -> both stay
  if (want_row[0] == want_row[1] && want_col[0] == want_col[1]) {
    want_row[1] = robots_[1].row;
    want_col[1] = robots_[1].col;
  }
  if (want_row[0] == robots_[1].row && want_col[0] == robots_[1].col &&
      want_row[1] == robots_[0].row && want_col[1] == robots_[0].col) {
    for (int i = 0; i < 2; ++i) {
      want_row[i] = robots_[i].row;
      want_col[i] = robots_[i].col;
    }
  }

  for (int i = 0; i < 2; ++i) {
    if (box_move[i][0] >= 0) {
      small_[box_move[i][0]][0] = box_move[i][1];
      small_[box_move[i][0]][1] = box_move[i][2];
      if (box_move[i][1] == 0) small_delivered_[box_move[i][0]] = true;
    }
    robots_[i].row = want_row[i];
    robots_[i].col = want_col[i];
    robots_[i].facing = want_face[i];
    out.macro_done[i] = done[i];
  }

  out.reward = bp_reward(cfg_, ev);
  out.terminal =
      big_delivered_ || small_delivered_[0] || small_delivered_[1];
  return out;
}

std::string BoxPushingEnv::action_name(AgentId agent, MacroAction m) const {
  switch (static_cast<BPMacro>(m.id)) {
    case BPMacro::TurnLeft: return "Turn-left";
    case BPMacro::TurnRight: return "Turn-right";
    case BPMacro::Stay: return "Stay";
    case BPMacro::MoveToSmallBox:
      return agent == 0 ? "Move-to-small-box(1)" : "Move-to-small-box(2)";
    case BPMacro::MoveToBigBox: return "Move-to-big-box";
    case BPMacro::Push: return "Push";
  }
  return "?";
}

std::string BoxPushingEnv::render() const {
  int n = cfg_.grid_size;
  std::vector<std::string> grid(n, std::string(n, '.'));
  grid[big_row_][big_left_col_] = 'B';
  grid[big_row_][big_left_col_ + 1] = 'B';
  for (int b = 0; b < 2; ++b) grid[small_[b][0]][small_[b][1]] = 'b';
  for (int i = 0; i < 2; ++i)
    grid[robots_[i].row][robots_[i].col] = kArrow[robots_[i].facing];
  std::ostringstream os;
  os << "goal row 0; robots drawn as facing arrows\n";
  for (int r = 0; r < n; ++r) os << grid[r] << '\n';
  return os.str();
}

}  // namespace macdec
