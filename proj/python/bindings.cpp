// Python module: thin wrappers over the C++ library. Indices are 0-based,
// like the C++ API; only files and the CLI use 1-based numbering.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <random>

#include "hmbandit/harness.hpp"
#include "hmbandit/instances.hpp"
#include "hmbandit/io.hpp"
#include "hmbandit/market.hpp"

namespace py = pybind11;
using namespace hmb;

namespace {

std::vector<std::vector<Index>> orders(const MarketInstance& inst) {
  std::vector<std::vector<Index>> out;
  for (const auto& r : inst.rankings()) out.push_back(r.order);
  return out;
}

ExperimentConfig make_config(const MarketInstance& inst, const std::string& algorithm, std::uint64_t horizon,
                             std::vector<std::uint64_t> seeds, std::vector<std::uint64_t> checkpoints,
                             unsigned threads) {
  ExperimentConfig cfg;
  cfg.instance = inst;
  cfg.algorithm = algorithm_from_string(algorithm);
  cfg.horizon = horizon;
  cfg.seeds = std::move(seeds);
  cfg.checkpoints = std::move(checkpoints);
  cfg.threads = threads;
  return cfg;
}

py::dict episode_dict(const EpisodeTrace& e) {
  py::dict d;
  d["seed"] = e.seed;
  d["rounds"] = e.rounds;
  d["checkpoints"] = e.checkpoints;
  d["checkpoint_regret"] = e.checkpoint_regret;
  d["pseudo_regret"] = e.final_pseudo;
  d["realized_regret"] = e.final_realized;
  d["collisions"] = e.collisions;
  d["collision_reward"] = e.collision_reward;
  d["phase1_end"] = e.phase1_end;
  d["committed_arm"] = e.committed_arm;
  d["commit_round"] = e.commit_round;
  d["post_commit_rounds"] = e.post_commit_rounds;
  d["post_commit_core_matches"] = e.post_commit_core_matches;
  return d;
}

}  // namespace

PYBIND11_MODULE(_hmbandit, m) {
  m.doc() = "Bandit learning in housing markets";

  static py::exception<Error>& exc = py::register_exception<Error>(m, "HmbError", PyExc_ValueError);
  // Attach the error code so callers need not parse the message.
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object instance = py::reinterpret_borrow<py::object>(exc.ptr())(e.what());
      instance.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(exc.ptr(), instance.ptr());
    }
  });

  py::class_<MarketInstance>(m, "MarketInstance")
      .def(py::init([](const std::vector<std::vector<double>>& utilities, const std::string& reward_model) {
             return validate_instance(utilities, reward_family_from_string(reward_model));
           }),
           py::arg("utilities"), py::arg("reward_model") = "gaussian")
      .def_property_readonly("n", &MarketInstance::size)
      .def_property_readonly("utilities", [](const MarketInstance& i) { return i.utilities().rows(); })
      .def_property_readonly("reward_model",
                             [](const MarketInstance& i) { return std::string(to_string(i.reward_family())); })
      .def_property_readonly("rankings", &orders)
      .def_property_readonly("core", [](const MarketInstance& i) { return i.core().arm_of; })
      .def_property_readonly("delta_min", &MarketInstance::delta_min)
      .def("with_reward_model",
           [](const MarketInstance& i, const std::string& r) { return i.with_reward_family(reward_family_from_string(r)); })
      .def("to_json", [](const MarketInstance& i) { return instance_to_json(i).dump(); })
      .def("__len__", &MarketInstance::size)
      .def("__repr__", [](const MarketInstance& i) {
        return "<MarketInstance n=" + std::to_string(i.size()) + " " + std::string(to_string(i.reward_family())) + ">";
      });

  m.def("validate_instance", [](const std::vector<std::vector<double>>& u, const std::string& reward_model) {
    return validate_instance(u, reward_family_from_string(reward_model));
  }, py::arg("utilities"), py::arg("reward_model") = "gaussian");
  m.def("load_instance", &load_instance, py::arg("path"));
  m.def("save_instance", &save_instance, py::arg("instance"), py::arg("path"));
  m.def("min_gap", &min_gap, py::arg("instance"));

  m.def("ttc", [](const MarketInstance& i) { return ttc(i.rankings()).arm_of; }, py::arg("instance"));
  m.def("ttc_rankings", [](const std::vector<std::vector<Index>>& rankings) {
    std::vector<PreferenceRanking> r;
    for (const auto& o : rankings) r.push_back({o});
    return ttc(r).arm_of;
  }, py::arg("rankings"), "TTC on explicit rankings (most preferred arm first).");
  m.def("yrmh_igyt", [](const MarketInstance& i) {
    const auto y = yrmh_igyt(i.rankings());
    py::list cycles;
    for (const auto& e : y.trace) cycles.append(e.cycle);
    py::dict d;
    d["matching"] = y.matching.arm_of;
    d["epochs"] = y.epochs;
    d["rounds"] = y.rounds;
    d["cycles"] = cycles;
    return d;
  }, py::arg("instance"));
  m.def("find_blocking_coalition", [](const std::vector<Index>& matching, const MarketInstance& i) -> py::object {
    const auto c = find_blocking_coalition(Matching{matching}, i);
    if (!c) return py::none();
    py::dict d;
    d["members"] = c->members;
    d["reallocation"] = c->reallocation;
    return d;
  }, py::arg("matching"), py::arg("instance"));
  m.def("core_oracle", [](const MarketInstance& i) { return core_oracle_bruteforce(i).arm_of; }, py::arg("instance"));

  m.def("random_instance", [](std::size_t n, double delta_floor, std::uint64_t seed, const std::string& reward_model) {
    GeneratorConfig g;
    g.n = n;
    g.delta_floor = delta_floor;
    g.seed = seed;
    g.reward = reward_family_from_string(reward_model);
    return generate(g);
  }, py::arg("n"), py::arg("delta_floor") = 0.1, py::arg("seed") = 0, py::arg("reward_model") = "gaussian");
  m.def("sttcb_instance", [](std::size_t n, double delta, std::uint64_t seed, const std::string& reward_model) {
    GeneratorConfig g;
    g.n = n;
    g.family = GeneratorFamily::Sttcb;
    g.delta = delta;
    g.seed = seed;
    g.reward = reward_family_from_string(reward_model);
    return generate(g);
  }, py::arg("n"), py::arg("delta") = 0.2, py::arg("seed") = 0, py::arg("reward_model") = "gaussian");
  m.def("lower_bound_instance", &lower_bound_instance, py::arg("n"), py::arg("delta"), py::arg("distinguished") = 0);
  m.def("is_sttcb", &is_sttcb, py::arg("instance"));

  m.def("run_episode",
        [](const MarketInstance& i, const std::string& algorithm, std::uint64_t horizon, std::uint64_t seed,
           std::vector<std::uint64_t> checkpoints) {
          auto cfg = make_config(i, algorithm, horizon, {seed}, std::move(checkpoints), 1);
          py::gil_scoped_release release;
          auto e = run_episode(cfg, seed);
          py::gil_scoped_acquire acquire;
          return episode_dict(e);
        },
        py::arg("instance"), py::arg("algorithm"), py::arg("horizon"), py::arg("seed") = 0,
        py::arg("checkpoints") = std::vector<std::uint64_t>{});
  m.def("monte_carlo",
        [](const MarketInstance& i, const std::string& algorithm, std::uint64_t horizon,
           std::vector<std::uint64_t> seeds, std::vector<std::uint64_t> checkpoints, unsigned threads) {
          auto cfg = make_config(i, algorithm, horizon, std::move(seeds), std::move(checkpoints), threads);
          AggregateReport rep;
          {
            py::gil_scoped_release release;
            rep = monte_carlo(cfg);
          }
          py::dict d;
          d["algorithm"] = rep.algorithm;
          d["horizon"] = rep.horizon;
          d["seed_count"] = rep.seed_count;
          d["checkpoints"] = rep.checkpoints;
          d["mean"] = rep.mean;
          d["stderr"] = rep.std_error;
          d["bound"] = rep.bound;
          py::list eps;
          for (const auto& e : rep.episodes) eps.append(episode_dict(e));
          d["episodes"] = eps;
          return d;
        },
        py::arg("instance"), py::arg("algorithm"), py::arg("horizon"), py::arg("seeds"),
        py::arg("checkpoints") = std::vector<std::uint64_t>{}, py::arg("threads") = 0);
  m.def("theoretical_bounds",
        [](const MarketInstance& i, std::uint64_t horizon, const std::string& algorithm) {
          const auto b = theoretical_bounds(i, horizon, algorithm_from_string(algorithm));
          py::dict d;
          d["per_player"] = b.per_player;
          d["exploration_term_dropped"] = b.exploration_term_dropped;
          return d;
        },
        py::arg("instance"), py::arg("horizon"), py::arg("algorithm"));
}
