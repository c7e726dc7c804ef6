#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>
#include <sstream>

#include "macdec/harness.hpp"
#include "macdec/plot.hpp"

namespace py = pybind11;
using namespace macdec;

namespace {

TrainConfig config_from_name_or_json(const std::string& spec) {
  if (!spec.empty() && spec.front() == '{') return config_from_json(spec);
  return default_config(spec, "macdec_maddrqn");
}

// One environment instance plus its executor, stepped at macro-action
// boundaries from Python.
class PyEnv {
 public:
  explicit PyEnv(const std::string& env_or_config, double accum_gamma = 0.98)
      : cfg_(resolve_config(config_from_name_or_json(env_or_config))),
        env_(make_env(cfg_)),
        executor_(*env_, accum_gamma) {}

  int num_agents() const { return env_->num_agents(); }
  int num_macro_actions(int agent) const {
    return env_->num_macro_actions(agent);
  }
  std::vector<int> obs_schema(int agent) const {
    return env_->obs_schema(agent).cardinalities;
  }
  int horizon() const { return env_->horizon(); }
  std::string action_name(int agent, int action) const {
    return env_->action_name(agent, MacroAction{action});
  }
  std::string render() const { return env_->render(); }

  std::vector<std::vector<int>> reset(std::uint64_t seed) {
    auto obs = executor_.reset(seed);
    std::vector<std::vector<int>> out;
    for (const auto& z : obs) out.push_back(z.features);
    return out;
  }

  std::vector<bool> free_agents() const { return executor_.free_agents(); }
  bool episode_done() const { return executor_.episode_done(); }
  int clock() const { return executor_.clock(); }

  py::dict step(const std::map<int, int>& actions) {
    std::map<AgentId, MacroAction> macro_actions;
    for (const auto& [agent, action] : actions)
      macro_actions[agent] = MacroAction{action};
    JointStepRecord rec = executor_.run_until_any_termination(macro_actions);
    py::dict d;
    d["boundary_time"] = rec.boundary_time;
    d["gap"] = rec.gap;
    d["joint_r_cum"] = rec.joint_r_cum;
    d["episode_done"] = rec.episode_done;
    d["terminal"] = rec.terminal;
    py::list agents;
    for (const auto& a : rec.agents) {
      py::dict ad;
      ad["z"] = a.z.features;
      ad["m"] = a.m.id;
      ad["z_next"] = a.z_next.features;
      ad["r_cum"] = a.r_cum;
      ad["duration"] = a.duration;
      ad["start_boundary"] = a.start_boundary;
      ad["terminated"] = a.terminated;
      agents.append(ad);
    }
    d["agents"] = agents;
    return d;
  }

 private:
  TrainConfig cfg_;
  std::unique_ptr<MacroEnv> env_;
  MacroExecutor executor_;
};

class PyNet {
 public:
  PyNet(int input, int hidden, int lstm, int output)
      : net_(NetSpec{input, hidden, lstm, output}) {}
  explicit PyNet(RecurrentQNet net) : net_(std::move(net)) {}

  void init_weights(std::uint64_t seed) {
    Rng rng(seed);
    net_.init_weights(rng);
  }

  std::vector<Eigen::MatrixXd> forward(
      const std::vector<Eigen::MatrixXd>& inputs) {
    auto cache = net_.forward_sequence(
        inputs, net_.zero_hidden(static_cast<int>(inputs.at(0).cols())), {});
    return cache.q;
  }

  std::int64_t parameter_count() const { return net_.parameter_count(); }
  std::vector<double> parameters() const { return net_.flatten_parameters(); }
  void set_parameters(const std::vector<double>& flat) {
    net_.unflatten_parameters(flat);
  }

  void save(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    net_.save(os);
  }
  static PyNet load(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path);
    return PyNet(RecurrentQNet::load(is));
  }

 private:
  RecurrentQNet net_;
};

}  // namespace

PYBIND11_MODULE(_macdec, m) {
  m.doc() = "macro-action multi-agent Q-learning core";

  m.def("accumulate_reward", &accumulate_reward, py::arg("rewards"),
        py::arg("gamma"));
  m.def("ipow", &ipow, py::arg("base"), py::arg("exp"));
  m.def(
      "conditional_joint_argmax",
      [](const Eigen::VectorXd& q, const std::vector<int>& dims,
         const std::vector<bool>& undone, const std::vector<int>& running) {
        JointActionSpace space{dims};
        return conditional_joint_argmax(q, space, undone, running);
      },
      py::arg("q_joint"), py::arg("dims"), py::arg("undone"),
      py::arg("running"));
  m.def(
      "bp_optimal_return",
      [](int grid_size, double gamma) {
        BPConfig cfg;
        cfg.grid_size = grid_size;
        return bp_optimal_return(cfg, gamma);
      },
      py::arg("grid_size"), py::arg("gamma") = 0.98);
  m.def("default_config", [](const std::string& env, const std::string& algo) {
    return config_to_json(default_config(env, algo));
  });
  m.def(
      "run_experiment",
      [](const std::string& config_json) {
        run_experiment(config_from_json(config_json));
      },
      py::arg("config_json"), "training experiment from a JSON config string");
  m.def(
      "evaluate_checkpoint",
      [](const std::string& dir, int episodes, std::uint64_t seed) {
        TrainConfig cfg = load_checkpoint_config(dir);
        AgentNets nets = load_checkpoint(dir);
        return evaluate_policy(nets, cfg, episodes, seed);
      },
      py::arg("dir"), py::arg("episodes") = 1, py::arg("seed") = 0);
  m.def(
      "trace_scripted",
      [](const std::string& env, const std::string& policy,
         std::uint64_t seed) {
        TrainConfig cfg = default_config(env, "macdec_maddrqn");
        ScriptedPolicy p;
        if (policy == "optimal" && env != "wtd")
          p = bp_scripted_optimal();
        else if (policy == "demo" || policy == "optimal")
          p = wtd_scripted_demo();
        else
          throw std::invalid_argument("unknown policy: " + policy);
        std::ostringstream os;
        trace_episode(cfg, p, seed, os);
        return os.str();
      },
      py::arg("env"), py::arg("policy"), py::arg("seed") = 0);

  py::class_<PyEnv>(m, "Env")
      .def(py::init<const std::string&, double>(), py::arg("env_or_config"),
           py::arg("accum_gamma") = 0.98)
      .def_property_readonly("num_agents", &PyEnv::num_agents)
      .def("num_macro_actions", &PyEnv::num_macro_actions)
      .def("obs_schema", &PyEnv::obs_schema)
      .def_property_readonly("horizon", &PyEnv::horizon)
      .def("action_name", &PyEnv::action_name)
      .def("render", &PyEnv::render)
      .def("reset", &PyEnv::reset, py::arg("seed") = 0)
      .def("free_agents", &PyEnv::free_agents)
      .def("episode_done", &PyEnv::episode_done)
      .def("clock", &PyEnv::clock)
      .def("step", &PyEnv::step, py::arg("actions"));

  py::class_<PyNet>(m, "RecurrentQNet")
      .def(py::init<int, int, int, int>(), py::arg("input"), py::arg("hidden"),
           py::arg("lstm"), py::arg("output"))
      .def("init_weights", &PyNet::init_weights, py::arg("seed"))
      .def("forward", &PyNet::forward, py::arg("inputs"))
      .def("parameter_count", &PyNet::parameter_count)
      .def("parameters", &PyNet::parameters)
      .def("set_parameters", &PyNet::set_parameters)
      .def("save", &PyNet::save)
      .def_static("load", &PyNet::load);
}
