#pragma once

#include <memory>
#include <string>

#include "macdec/box_pushing.hpp"
#include "macdec/learners.hpp"
#include "macdec/warehouse.hpp"

namespace macdec {

struct NetConfig {
  int hidden = 32;
  int lstm_dec = 0;  // 0 = per-environment default (32 for BP, 64 for WTD)
  int lstm_cen = 64;
};

// Everything a training run needs; serialized as flat JSON with
// environment-prefixed keys.
struct TrainConfig {
  std::string env = "bp10";  // bp10 | bp30 | wtd
  LearnerConfig learner;
  NetConfig net;
  BPConfig bp;
  WTDConfig wtd;
  int num_runs = 1;
  long episodes = 2000;
  int eval_interval = 50;
  int eval_episodes = 1;
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  int smoothing_window = 20;
  int jobs = 1;
  // write 0.000 in the wall-clock column so seeded runs are byte-identical
  bool deterministic_timing = true;
};

// Fills every derived default (grid size, horizons, net widths, epsilon decay
// horizon) so the returned config is fully explicit.
TrainConfig resolve_config(const TrainConfig& cfg);

TrainConfig default_config(const std::string& env, const std::string& algo);
TrainConfig config_from_json(const std::string& text);
std::string config_to_json(const TrainConfig& cfg);

std::unique_ptr<MacroEnv> make_env(const TrainConfig& cfg);

}  // namespace macdec
