#pragma once

#include <Eigen/Dense>
#include <deque>
#include <iosfwd>

#include "macdec/core.hpp"

namespace macdec {

// One episode's boundary records plus the observations every agent held at
// reset (needed to rebuild the first net input).
struct EpisodeRecord {
  std::vector<MacroObservation> initial_obs;
  std::vector<JointStepRecord> records;
  bool terminal = false;  // ended in a true terminal state, not at the horizon

  int length() const { return static_cast<int>(records.size()); }
};

// A sampled batch of episodes aligned on boundary index. Mask vectors have
// one entry per batch sample; step t covers the record at index t.
struct Minibatch {
  std::vector<const EpisodeRecord*> episodes;
  int max_len = 0;  // longest record count in the batch
  std::vector<Eigen::VectorXd> valid;                    // [T](B)
  std::vector<std::vector<Eigen::VectorXd>> terminated;  // [agent][T](B)
  std::vector<std::vector<Eigen::VectorXd>> undone;      // [agent][T](B)
};

// Episodic ring buffer; one merged store serves as Mac-CERTs (per-agent
// masked views) and Mac-JERTs (joint view) at once.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(int capacity);

  void push_episode(EpisodeRecord episode);
  int size() const { return static_cast<int>(episodes_.size()); }
  int capacity() const { return capacity_; }
  std::int64_t pushed_total() const { return pushed_; }
  const EpisodeRecord& episode(int idx) const { return episodes_.at(idx); }

  // Uniform sampling with replacement; episodes padded to the longest one.
  Minibatch sample_minibatch(int batch_size, Rng& rng) const;

 private:
  int capacity_;
  std::deque<EpisodeRecord> episodes_;
  std::int64_t pushed_ = 0;
};

// JSON-lines fixtures: one episode per line.
void dump_episodes(std::ostream& os, const std::vector<EpisodeRecord>& eps);
std::vector<EpisodeRecord> load_episodes(std::istream& is);

}  // namespace macdec
