#include "macdec/replay.hpp"

#include <istream>
#include <ostream>
#include <stdexcept>

#include "json.hpp"

namespace macdec {

ReplayBuffer::ReplayBuffer(int capacity) : capacity_(capacity) {
  if (capacity <= 0) throw std::invalid_argument("buffer capacity must be > 0");
}

void ReplayBuffer::push_episode(EpisodeRecord episode) {
  if (episode.records.empty())
    throw std::invalid_argument("cannot push an empty episode");
  episodes_.push_back(std::move(episode));
  ++pushed_;
  if (static_cast<int>(episodes_.size()) > capacity_) episodes_.pop_front();
}

Minibatch ReplayBuffer::sample_minibatch(int batch_size, Rng& rng) const {
  if (episodes_.empty())
    throw std::logic_error("cannot sample from an empty buffer");
  if (batch_size <= 0) throw std::invalid_argument("batch_size must be > 0");

  Minibatch mb;
  mb.episodes.reserve(batch_size);
  for (int b = 0; b < batch_size; ++b) {
    int idx = rng.uniform_int(static_cast<int>(episodes_.size()));
    const EpisodeRecord& ep = episodes_[idx];
    mb.episodes.push_back(&ep);
    mb.max_len = std::max(mb.max_len, ep.length());
  }

  int num_agents = static_cast<int>(mb.episodes[0]->initial_obs.size());
  int T = mb.max_len, B = batch_size;
  mb.valid.assign(T, Eigen::VectorXd::Zero(B));
  mb.terminated.assign(num_agents,
                       std::vector<Eigen::VectorXd>(T, Eigen::VectorXd::Zero(B)));
  mb.undone.assign(num_agents,
                   std::vector<Eigen::VectorXd>(T, Eigen::VectorXd::Zero(B)));
  for (int b = 0; b < B; ++b) {
    const EpisodeRecord& ep = *mb.episodes[b];
    for (int t = 0; t < ep.length(); ++t) {
      mb.valid[t](b) = 1.0;
      for (int i = 0; i < num_agents; ++i) {
        if (ep.records[t].agents[i].terminated)
          mb.terminated[i][t](b) = 1.0;
        else
          mb.undone[i][t](b) = 1.0;
      }
    }
  }
  return mb;
}

namespace {

using nlohmann::json;

json obs_to_json(const MacroObservation& z) { return json(z.features); }

MacroObservation obs_from_json(const json& j) {
  return {j.get<std::vector<int>>()};
}

json record_to_json(const JointStepRecord& r) {
  json agents = json::array();
  for (const auto& a : r.agents) {
    agents.push_back({{"z", obs_to_json(a.z)},
                      {"m", a.m.id},
                      {"z_next", obs_to_json(a.z_next)},
                      {"r_cum", a.r_cum},
                      {"duration", a.duration},
                      {"start_boundary", a.start_boundary},
                      {"terminated", a.terminated}});
  }
  return {{"agents", agents},
          {"joint_r_cum", r.joint_r_cum},
          {"boundary_time", r.boundary_time},
          {"gap", r.gap},
          {"episode_done", r.episode_done},
          {"terminal", r.terminal}};
}

JointStepRecord record_from_json(const json& j) {
  JointStepRecord r;
  for (const auto& a : j.at("agents")) {
    AgentStep s;
    s.z = obs_from_json(a.at("z"));
    s.m.id = a.at("m").get<int>();
    s.z_next = obs_from_json(a.at("z_next"));
    s.r_cum = a.at("r_cum").get<double>();
    s.duration = a.at("duration").get<int>();
    s.start_boundary = a.at("start_boundary").get<int>();
    s.terminated = a.at("terminated").get<bool>();
    r.agents.push_back(std::move(s));
  }
  r.joint_r_cum = j.at("joint_r_cum").get<double>();
  r.boundary_time = j.at("boundary_time").get<int>();
  r.gap = j.at("gap").get<int>();
  r.episode_done = j.at("episode_done").get<bool>();
  r.terminal = j.at("terminal").get<bool>();
  return r;
}

}  // namespace

void dump_episodes(std::ostream& os, const std::vector<EpisodeRecord>& eps) {
  for (const auto& ep : eps) {
    json j;
    j["initial_obs"] = json::array();
    for (const auto& z : ep.initial_obs) j["initial_obs"].push_back(obs_to_json(z));
    j["terminal"] = ep.terminal;
    j["records"] = json::array();
    for (const auto& r : ep.records) j["records"].push_back(record_to_json(r));
    os << j.dump() << '\n';
  }
}

std::vector<EpisodeRecord> load_episodes(std::istream& is) {
  std::vector<EpisodeRecord> eps;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    EpisodeRecord ep;
    for (const auto& z : j.at("initial_obs")) ep.initial_obs.push_back(obs_from_json(z));
    ep.terminal = j.at("terminal").get<bool>();
    for (const auto& r : j.at("records")) ep.records.push_back(record_from_json(r));
    eps.push_back(std::move(ep));
  }
  return eps;
}

}  // namespace macdec
