#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "test_helpers.hpp"

using namespace macdec;
using testing::FakeEnv;

TEST_CASE("accumulate_reward matches direct arithmetic") {
  CHECK(accumulate_reward({-0.1}, 0.98) == doctest::Approx(-0.1).epsilon(1e-12));
  CHECK(accumulate_reward({-0.1, -0.1, -0.1}, 1.0) ==
        doctest::Approx(-0.3).epsilon(1e-12));
  double expected = -1.0 + 0.98 * -1.0 + 0.98 * 0.98 * 100.0;
  CHECK(accumulate_reward({-1.0, -1.0, 100.0}, 0.98) == expected);
  CHECK(expected == doctest::Approx(94.06).epsilon(1e-9));
  CHECK_THROWS_AS(accumulate_reward({}, 0.98), std::invalid_argument);
}

TEST_CASE("ipow is exact for dyadic bases") {
  CHECK(ipow(0.5, 3) == 0.125);
  CHECK(ipow(0.25, 0) == 1.0);
  CHECK(ipow(2.0, 10) == 1024.0);
  CHECK_THROWS_AS(ipow(0.5, -1), std::invalid_argument);
}

TEST_CASE("one-hot encoding respects schema") {
  ObsSchema schema{{3, 2}};
  CHECK(schema.onehot_size() == 5);
  Eigen::VectorXd buf = Eigen::VectorXd::Zero(5);
  int used = encode_onehot({{2, 0}}, schema, buf.data(), 0);
  CHECK(used == 5);
  CHECK(buf(2) == 1.0);
  CHECK(buf(3) == 1.0);
  CHECK(buf.sum() == 2.0);
  CHECK_THROWS_AS(encode_onehot({{3, 0}}, schema, buf.data(), 0),
                  std::invalid_argument);
  CHECK_THROWS_AS(encode_onehot({{0}}, schema, buf.data(), 0),
                  std::invalid_argument);
}

TEST_CASE("executor enforces the free-agent contract") {
  FakeEnv env(2, 100);
  MacroExecutor ex(env, 1.0);
  ex.reset(0);
  std::map<AgentId, MacroAction> missing{{0, MacroAction{0}}};
  CHECK_THROWS_AS(ex.run_until_any_termination(missing), std::invalid_argument);

  // agent 0 finishes after 1 step, agent 1 keeps running its 4-step macro
  auto rec = ex.run_until_any_termination({{0, MacroAction{0}}, {1, MacroAction{3}}});
  CHECK(rec.agents[0].terminated);
  CHECK_FALSE(rec.agents[1].terminated);
  std::map<AgentId, MacroAction> busy{{0, MacroAction{0}}, {1, MacroAction{0}}};
  CHECK_THROWS_AS(ex.run_until_any_termination(busy), std::invalid_argument);
}

TEST_CASE("boundaries fire at any-agent termination with per-agent accumulation") {
  FakeEnv env(2, 100, 1.0);
  MacroExecutor ex(env, 0.5);
  auto obs0 = ex.reset(0);
  CHECK(obs0.size() == 2);

  // agent 0: repeated 1-step macros; agent 1: one 3-step macro
  auto r1 = ex.run_until_any_termination({{0, MacroAction{0}}, {1, MacroAction{2}}});
  CHECK(r1.boundary_time == 1);
  CHECK(r1.gap == 1);
  CHECK(r1.agents[0].terminated);
  CHECK_FALSE(r1.agents[1].terminated);
  CHECK(r1.agents[1].duration == 1);
  CHECK(r1.agents[1].start_boundary == 0);
  // undone agents keep their initial macro-observation
  CHECK(r1.agents[1].z_next == r1.agents[1].z);
  CHECK(r1.undone_mask() == std::vector<bool>{false, true});

  auto r2 = ex.run_until_any_termination({{0, MacroAction{0}}});
  CHECK(r2.boundary_time == 2);
  CHECK_FALSE(r2.agents[1].terminated);

  auto r3 = ex.run_until_any_termination({{0, MacroAction{0}}});
  CHECK(r3.boundary_time == 3);
  CHECK(r3.agents[1].terminated);
  CHECK(r3.agents[1].duration == 3);
  CHECK(r3.agents[1].start_boundary == 0);
  // discounted accumulation from the macro's own start: 1 + 0.5 + 0.25
  CHECK(r3.agents[1].r_cum == 1.75);
  // joint accumulation restarts at each boundary
  CHECK(r1.joint_r_cum == 1.0);
  CHECK(r2.joint_r_cum == 1.0);
  CHECK(r3.joint_r_cum == 1.0);
  // agent 0's last 1-step macro started at boundary 2
  CHECK(r3.agents[0].start_boundary == 2);
}

TEST_CASE("horizon forces episode_done with all agents terminated") {
  FakeEnv env(2, 4);
  MacroExecutor ex(env, 1.0);
  ex.reset(0);
  auto r1 = ex.run_until_any_termination({{0, MacroAction{3}}, {1, MacroAction{3}}});
  CHECK(r1.boundary_time == 4);
  CHECK(r1.episode_done);
  CHECK_FALSE(r1.terminal);  // horizon cutoff is not a true terminal
  CHECK(r1.agents[0].terminated);
  CHECK(r1.agents[1].terminated);
  CHECK(ex.episode_done());
  CHECK_THROWS_AS(
      ex.run_until_any_termination({{0, MacroAction{0}}, {1, MacroAction{0}}}),
      std::logic_error);
}

TEST_CASE("true terminals are flagged and cut running macros") {
  FakeEnv env(2, 100, 1.0, /*terminal_at=*/2);
  MacroExecutor ex(env, 1.0);
  ex.reset(0);
  auto r = ex.run_until_any_termination({{0, MacroAction{3}}, {1, MacroAction{3}}});
  CHECK(r.boundary_time == 2);
  CHECK(r.episode_done);
  CHECK(r.terminal);
  CHECK(r.agents[0].terminated);
  CHECK(r.agents[0].duration == 2);
}

TEST_CASE("same seed and actions reproduce bit-identical record streams") {
  auto ep1 = testing::make_fake_episode(3, 40, -0.5, 7, 0.9);
  auto ep2 = testing::make_fake_episode(3, 40, -0.5, 7, 0.9);
  CHECK(testing::episode_digest(ep1) == testing::episode_digest(ep2));
  auto ep3 = testing::make_fake_episode(3, 40, -0.5, 8, 0.9);
  CHECK(testing::episode_digest(ep1) != testing::episode_digest(ep3));
}

TEST_CASE("undiscounted joint accumulation equals the primitive reward sum") {
  const double step_reward = -0.25;
  auto ep = testing::make_fake_episode(2, 37, step_reward, 3, 1.0);
  double total = 0.0;
  int steps = 0;
  for (const auto& rec : ep.records) {
    total += rec.joint_r_cum;
    steps += rec.gap;
  }
  CHECK(steps == 37);
  CHECK(total == doctest::Approx(step_reward * 37).epsilon(1e-12));
}

TEST_CASE("boundary bookkeeping invariants hold on random episodes") {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    auto ep = testing::make_fake_episode(3, 50, 1.0, seed, 0.97);
    int prev_time = 0;
    for (size_t k = 0; k < ep.records.size(); ++k) {
      const auto& rec = ep.records[k];
      CHECK(rec.boundary_time > prev_time);
      CHECK(rec.gap == rec.boundary_time - prev_time);
      prev_time = rec.boundary_time;
      bool any_term = false;
      for (const auto& a : rec.agents) {
        any_term |= a.terminated;
        CHECK(a.duration >= 1);
        if (a.terminated) {
          int start_time = a.start_boundary == 0
                               ? 0
                               : ep.records[a.start_boundary - 1].boundary_time;
          CHECK(a.duration == rec.boundary_time - start_time);
        }
      }
      CHECK(any_term);
      auto undone = rec.undone_mask();
      for (size_t i = 0; i < rec.agents.size(); ++i)
        CHECK(undone[i] == !rec.agents[i].terminated);
    }
  }
}
