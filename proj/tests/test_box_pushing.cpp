#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "macdec/box_pushing.hpp"
#include "macdec/harness.hpp"

using namespace macdec;

namespace {

constexpr int kTurnL = static_cast<int>(BPMacro::TurnLeft);
constexpr int kTurnR = static_cast<int>(BPMacro::TurnRight);
constexpr int kStay = static_cast<int>(BPMacro::Stay);
constexpr int kSmall = static_cast<int>(BPMacro::MoveToSmallBox);
constexpr int kBig = static_cast<int>(BPMacro::MoveToBigBox);
constexpr int kPush = static_cast<int>(BPMacro::Push);

EpisodeRecord run_script(BoxPushingEnv& env, const ScriptedPolicy& policy,
                         double gamma = 1.0) {
  MacroExecutor ex(env, gamma);
  EpisodeRecord ep;
  ep.initial_obs = ex.reset(0);
  auto fn = policy.make();
  std::vector<int> running(2, -1);
  while (!ex.episode_done()) {
    auto actions = fn(ex.free_agents(), running, nullptr);
    auto rec = ex.run_until_any_termination(actions);
    for (int i = 0; i < 2; ++i) running[i] = rec.agents[i].m.id;
    ep.terminal = rec.terminal;
    ep.records.push_back(std::move(rec));
  }
  return ep;
}

ScriptedPolicy two_robot_script(std::vector<int> r0, std::vector<int> r1) {
  return ScriptedPolicy{{std::move(r0), std::move(r1)}, {-1, -1}};
}

}  // namespace

TEST_CASE("construction validates the grid") {
  CHECK_THROWS_AS(BoxPushingEnv{BPConfig{5}}, std::invalid_argument);
  CHECK_THROWS_AS(BoxPushingEnv{BPConfig{4}}, std::invalid_argument);
  BPConfig bad10;
  bad10.horizon = 5;
  CHECK_THROWS_AS(BoxPushingEnv{bad10}, std::invalid_argument);
  CHECK(BPConfig{10}.resolved_horizon() == 100);
  CHECK(BPConfig{30}.resolved_horizon() == 300);
}

TEST_CASE("reset is deterministic and both robots face an empty cell") {
  BoxPushingEnv env(BPConfig{10});
  env.reset(7);
  auto a = env.observe(0), b = env.observe(1);
  env.reset(7);
  CHECK(env.observe(0) == a);
  CHECK(env.observe(1) == b);
  CHECK(a.features[0] == static_cast<int>(BPCell::Empty));
  CHECK(b.features[0] == static_cast<int>(BPCell::Empty));
}

TEST_CASE("bp_reward adds the paper's constants") {
  BPConfig cfg;
  CHECK(bp_reward(cfg, {}) == -0.1);
  BPStepEvents small;
  small.small_delivered = true;
  CHECK(bp_reward(cfg, small) == doctest::Approx(9.9));
  BPStepEvents hit;
  hit.boundary_hit = 1;
  CHECK(bp_reward(cfg, hit) == doctest::Approx(-5.1));
  BPStepEvents lone;
  lone.lone_big_push = 1;
  CHECK(bp_reward(cfg, lone) == doctest::Approx(-5.1));
  BPStepEvents big;
  big.big_delivered = true;
  CHECK(bp_reward(cfg, big) == doctest::Approx(99.9));
}

TEST_CASE("Stay and turns are one-step macros") {
  BoxPushingEnv env(BPConfig{10});
  MacroExecutor ex(env, 1.0);
  ex.reset(0);
  std::string before = env.render();
  auto rec = ex.run_until_any_termination(
      {{0, MacroAction{kStay}}, {1, MacroAction{kStay}}});
  CHECK(rec.boundary_time == 1);
  CHECK(rec.agents[0].terminated);
  CHECK(rec.agents[1].terminated);
  CHECK(rec.joint_r_cum == -0.1);  // spec example: both Stay costs one step
  CHECK(env.render() == before);

  auto rec2 = ex.run_until_any_termination(
      {{0, MacroAction{kTurnL}}, {1, MacroAction{kTurnR}}});
  CHECK(rec2.boundary_time == 2);
  // robot 0 now faces west, robot 1 east
  CHECK(env.render().find('<') != std::string::npos);
  CHECK(env.render().find('>') != std::string::npos);
}

TEST_CASE("a lone push against the big box costs -5 and stops") {
  BoxPushingEnv env(BPConfig{10});
  auto ep = run_script(
      env, two_robot_script({kBig, kPush, kStay}, {kStay}));
  // robot 0 reaches its waypoint at t=6 while robot 1 idles
  bool found = false;
  for (const auto& rec : ep.records) {
    if (rec.agents[0].terminated && rec.agents[0].m.id == kPush) {
      CHECK(rec.agents[0].duration == 1);
      CHECK(rec.joint_r_cum == doctest::Approx(-5.1));
      found = true;
      break;
    }
  }
  CHECK(found);
}

TEST_CASE("push into the boundary costs -5 and stops") {
  BoxPushingEnv env(BPConfig{10});
  // robot 0 turns south then pushes into the bottom edge
  auto ep = run_script(env, two_robot_script({kTurnL, kTurnL, kPush, kStay}, {kStay}));
  bool found = false;
  for (const auto& rec : ep.records) {
    if (rec.agents[0].m.id == kPush && rec.agents[0].terminated) {
      CHECK(rec.joint_r_cum == doctest::Approx(-5.1));
      found = true;
      break;
    }
  }
  CHECK(found);
}

TEST_CASE("joint push delivers the big box for +100") {
  BoxPushingEnv env(BPConfig{10});
  auto ep = run_script(env, two_robot_script({kBig, kPush}, {kBig, kPush}));
  CHECK(ep.terminal);
  const auto& last = ep.records.back();
  CHECK(last.boundary_time == 11);
  CHECK(last.joint_r_cum == doctest::Approx(-0.5 + 100.0));
  double total = 0.0;
  for (const auto& rec : ep.records) total += rec.joint_r_cum;
  CHECK(total == doctest::Approx(98.9));
}

TEST_CASE("scripted optimal return matches the closed-form oracle") {
  BPConfig cfg{10};
  BoxPushingEnv env(cfg);
  auto ep = run_script(env, two_robot_script({kBig, kPush}, {kBig, kPush}), 0.98);
  double measured = discounted_return(ep, 0.98);
  // independent oracle: 11 steps of -0.1 plus +100 on the last one
  double expected = 0.0;
  for (int t = 0; t < 11; ++t) expected += std::pow(0.98, t) * -0.1;
  expected += std::pow(0.98, 10) * 100.0;
  CHECK(measured == doctest::Approx(expected).epsilon(1e-12));
  CHECK(bp_optimal_return(cfg, 0.98) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("single-robot small-box policy is worth less than the joint push") {
  BoxPushingEnv env(BPConfig{10});
  auto small = run_script(env, two_robot_script({kSmall, kPush}, {kStay}), 0.98);
  CHECK(small.terminal);
  double small_return = discounted_return(small, 0.98);
  BoxPushingEnv env2(BPConfig{10});
  auto big = run_script(env2, two_robot_script({kBig, kPush}, {kBig, kPush}), 0.98);
  double big_return = discounted_return(big, 0.98);
  CHECK(big_return > small_return);
  // small-box script: 5 steps to the waypoint, 5 pushes, +10 at t=9
  double expected_small = 0.0;
  for (int t = 0; t < 10; ++t) expected_small += std::pow(0.98, t) * -0.1;
  expected_small += std::pow(0.98, 9) * 10.0;
  CHECK(small_return == doctest::Approx(expected_small).epsilon(1e-12));
}

TEST_CASE("episode ends exactly at delivery or horizon") {
  BoxPushingEnv env(BPConfig{10});
  auto stay = run_script(env, two_robot_script({kStay}, {kStay}));
  CHECK_FALSE(stay.terminal);
  CHECK(stay.records.size() == 100);  // every Stay is a 1-step boundary
  CHECK(stay.records.back().episode_done);
  CHECK(stay.records.back().boundary_time == 100);

  BoxPushingEnv env2(BPConfig{10});
  auto small = run_script(env2, two_robot_script({kSmall, kPush}, {kStay}));
  CHECK(small.terminal);
  CHECK(small.records.back().boundary_time == 10);
}

TEST_CASE("move-to macros end facing their box") {
  BoxPushingEnv env(BPConfig{10});
  MacroExecutor ex(env, 1.0);
  ex.reset(0);
  auto rec = ex.run_until_any_termination(
      {{0, MacroAction{kBig}}, {1, MacroAction{kSmall}}});
  // robot 1's small-box waypoint is closer (5 steps) than robot 0's big-box
  // waypoint (6 steps)
  CHECK(rec.boundary_time == 5);
  CHECK(rec.agents[1].terminated);
  CHECK_FALSE(rec.agents[0].terminated);
  CHECK(rec.agents[1].z_next.features[0] == static_cast<int>(BPCell::SmallBox));
  auto rec2 = ex.run_until_any_termination({{1, MacroAction{kStay}}});
  CHECK(rec2.boundary_time == 6);
  CHECK(rec2.agents[0].terminated);
  CHECK(rec2.agents[0].z_next.features[0] == static_cast<int>(BPCell::BigBox));
}

TEST_CASE("teammate and boundary observations") {
  BoxPushingEnv env(BPConfig{10});
  MacroExecutor ex(env, 1.0);
  ex.reset(0);
  // both at their big-box waypoints (6,4) and (6,5)
  (void)ex.run_until_any_termination({{0, MacroAction{kBig}}, {1, MacroAction{kBig}}});
  auto rec = ex.run_until_any_termination(
      {{0, MacroAction{kTurnR}}, {1, MacroAction{kTurnL}}});
  CHECK(rec.agents[0].z_next.features[0] == static_cast<int>(BPCell::Teammate));
  CHECK(rec.agents[1].z_next.features[0] == static_cast<int>(BPCell::Teammate));

  BoxPushingEnv env2(BPConfig{10});
  MacroExecutor ex2(env2, 1.0);
  ex2.reset(0);
  auto r2 = ex2.run_until_any_termination(
      {{0, MacroAction{kTurnL}}, {1, MacroAction{kStay}}});
  auto r3 = ex2.run_until_any_termination(
      {{0, MacroAction{kTurnL}}, {1, MacroAction{kStay}}});
  // facing south at the bottom row: boundary ahead
  CHECK(r3.agents[0].z_next.features[0] == static_cast<int>(BPCell::Boundary));
}

TEST_CASE("N=30 layout scales") {
  BoxPushingEnv env(BPConfig{30});
  auto ep = run_script(env, two_robot_script({kBig, kPush}, {kBig, kPush}));
  CHECK(ep.terminal);
  // 21 movement steps, then 15 joint pushes
  CHECK(ep.records.back().boundary_time == 36);
  double total = 0.0;
  for (const auto& rec : ep.records) total += rec.joint_r_cum;
  CHECK(total == doctest::Approx(100.0 - 3.6));
}
