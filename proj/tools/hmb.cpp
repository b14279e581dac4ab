// hmb: command line front end for the housing-market bandit simulator.
//
//   hmb gen         write a generated instance as JSON
//   hmb run         run one episode, optionally writing a per-round trace
//   hmb mc          Monte Carlo over seeds, writes <out>.csv and <out>.json
//   hmb mechanisms  TTC / YRMH-IGYT / core verification on an instance file
//   hmb bounds      closed-form regret bound curves
//
// Exit codes: 0 success, 2 validation error, 3 runtime error.

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "hmbandit/harness.hpp"
#include "hmbandit/instances.hpp"
#include "hmbandit/io.hpp"
#include "hmbandit/market.hpp"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

std::vector<std::uint64_t> parse_u64_list(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      const auto colon = item.find(':');
      if (colon == std::string::npos) {
        out.push_back(std::stoull(item));
      } else {
        const auto lo = std::stoull(item.substr(0, colon));
        const auto hi = std::stoull(item.substr(colon + 1));
        if (hi < lo) throw std::invalid_argument("empty range");
        for (auto v = lo; v <= hi; ++v) out.push_back(v);
      }
    } catch (const std::logic_error&) {
      throw hmb::Error(hmb::ErrorCode::ConfigInvalid, "cannot parse '" + item + "' as a number or a:b range");
    }
  }
  return out;
}

struct RunOptions {
  std::string config;
  std::string instance;
  std::string algo = "centralized-ucb";
  std::uint64_t horizon = 0;
  std::string seeds;
  std::string out;
  std::string trace;
  std::string checkpoints;
  std::string snapshot;
  std::string reward;
  unsigned threads = 0;
};

void add_run_options(CLI::App* cmd, RunOptions& o, bool single) {
  cmd->add_option("--config", o.config, "JSON experiment config");
  cmd->add_option("--instance", o.instance, "instance JSON file");
  cmd->add_option("--algo", o.algo, "decentralized-etc | centralized-ucb | oracle-fixed");
  cmd->add_option("--horizon", o.horizon, "number of rounds T");
  cmd->add_option("--seeds", o.seeds, single ? "episode seed" : "seed list, e.g. 0:49 or 1,2,3");
  cmd->add_option("--out", o.out, single ? "summary JSON path" : "output path prefix");
  cmd->add_option("--checkpoints", o.checkpoints, "comma-separated checkpoint rounds");
  cmd->add_option("--reward", o.reward, "override the reward model of the instance");
  if (single) {
    cmd->add_option("--trace", o.trace, "per-round trace CSV path");
    cmd->add_option("--snapshot", o.snapshot, "decentralized player state snapshot JSON path");
  } else {
    cmd->add_option("--threads", o.threads, "worker threads (0 = all cores)");
  }
}

hmb::ExperimentFile resolve(const RunOptions& o) {
  hmb::ExperimentFile f;
  if (!o.config.empty()) {
    const auto base = std::filesystem::path(o.config).parent_path().string();
    f = hmb::experiment_from_json(hmb::read_json_file(o.config), base.empty() ? "." : base);
  }
  auto& c = f.config;
  if (!o.instance.empty()) {
    c.instance = hmb::load_instance(o.instance);
    c.instance_id = std::filesystem::path(o.instance).stem().string();
  }
  if (c.instance.size() == 0) {
    throw hmb::Error(hmb::ErrorCode::ConfigInvalid, "an instance is required (--instance or --config)");
  }
  if (!o.reward.empty()) c.instance = c.instance.with_reward_family(hmb::reward_family_from_string(o.reward));
  if (o.config.empty() || !o.algo.empty()) c.algorithm = hmb::algorithm_from_string(o.algo);
  if (o.horizon) c.horizon = o.horizon;
  if (!o.seeds.empty()) c.seeds = parse_u64_list(o.seeds);
  if (!o.checkpoints.empty()) c.checkpoints = parse_u64_list(o.checkpoints);
  if (o.threads) c.threads = o.threads;
  if (!o.out.empty()) f.out = o.out;
  if (!o.trace.empty()) {
    f.trace_path = o.trace;
    c.trace = true;
  }
  if (!f.trace_path.empty()) c.trace = true;
  hmb::validate(c);
  return f;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw hmb::Error(hmb::ErrorCode::Io, "cannot open '" + path + "' for writing");
  return f;
}

int cmd_gen(const std::string& family, std::size_t n, double delta, double delta_floor,
            std::size_t distinguished, const std::string& reward, std::uint64_t seed,
            const std::string& out) {
  hmb::GeneratorConfig g;
  g.family = hmb::generator_family_from_string(family);
  g.n = n;
  g.delta = delta;
  g.delta_floor = delta_floor;
  if (distinguished < 1) throw hmb::Error(hmb::ErrorCode::InvalidParameter, "--distinguished is 1-based");
  g.distinguished = distinguished - 1;
  g.reward = hmb::reward_family_from_string(reward);
  g.seed = seed;
  const auto inst = hmb::generate(g);
  if (out.empty()) {
    std::cout << hmb::instance_to_json(inst).dump(2) << '\n';
  } else {
    hmb::save_instance(inst, out);
  }
  return 0;
}

int cmd_run(const RunOptions& o) {
  auto f = resolve(o);
  auto& c = f.config;
  const std::uint64_t seed = c.seeds.front();
  const auto tr = hmb::run_episode(c, seed);

  nlohmann::ordered_json j;
  j["algorithm"] = std::string(hmb::to_string(c.algorithm));
  j["instance_id"] = c.instance_id;
  j["horizon"] = c.horizon;
  j["seed"] = seed;
  j["core"] = hmb::matching_to_json(c.instance.core());
  j["final_pseudo_regret"] = tr.final_pseudo;
  j["final_realized_regret"] = tr.final_realized;
  j["checkpoints"] = tr.checkpoints;
  j["checkpoint_regret"] = tr.checkpoint_regret;
  j["collisions"] = tr.collisions;
  if (c.algorithm == hmb::Algorithm::DecentralizedEtc) {
    auto opt = [](const auto& v) {
      auto arr = nlohmann::ordered_json::array();
      for (const auto& x : v) arr.push_back(x ? nlohmann::ordered_json(*x) : nlohmann::ordered_json());
      return arr;
    };
    j["phase1_end"] = opt(tr.phase1_end);
    j["commit_round"] = opt(tr.commit_round);
    auto arms = nlohmann::ordered_json::array();
    for (const auto& a : tr.committed_arm) arms.push_back(a ? nlohmann::ordered_json(*a + 1) : nlohmann::ordered_json());
    j["committed_arm"] = arms;
  }

  if (f.out.empty()) {
    std::cout << j.dump(2) << '\n';
  } else {
    auto os = open_out(f.out);
    os << j.dump(2) << '\n';
  }
  if (!f.trace_path.empty()) {
    auto os = open_out(f.trace_path);
    if (c.algorithm == hmb::Algorithm::CentralizedUcb) {
      tr.ledger.write_trace_csv(os, &tr.matching_is_core);
    } else {
      tr.ledger.write_trace_csv(os);
    }
  }
  if (!o.snapshot.empty()) {
    if (!tr.final_players) {
      throw hmb::Error(hmb::ErrorCode::ConfigInvalid, "--snapshot needs --algo decentralized-etc");
    }
    auto arr = nlohmann::ordered_json::array();
    for (const auto& p : tr.final_players->players()) arr.push_back(hmb::snapshot_json(p, c.horizon));
    auto os = open_out(o.snapshot);
    os << arr.dump(2) << '\n';
  }
  return 0;
}

int cmd_mc(const RunOptions& o) {
  auto f = resolve(o);
  const auto report = hmb::monte_carlo(f.config);
  if (f.out.empty()) {
    hmb::write_report_csv(std::cout, report);
  } else {
    hmb::export_report(report, f.out);
  }
  return 0;
}

int cmd_mechanisms(const std::string& instance_path, bool verify) {
  const auto inst = hmb::load_instance(instance_path);
  nlohmann::ordered_json j;
  j["n"] = inst.size();
  j["delta_min"] = std::isinf(inst.delta_min()) ? nlohmann::ordered_json("inf")
                                                 : nlohmann::ordered_json(inst.delta_min());
  const auto t = hmb::ttc_traced(inst.rankings());
  j["ttc"] = hmb::matching_to_json(t.matching);
  j["ttc_iterations"] = t.iterations;
  const auto y = hmb::yrmh_igyt(inst.rankings());
  j["yrmh_igyt"] = {{"matching", hmb::matching_to_json(y.matching)},
                    {"epochs", y.epochs},
                    {"rounds", y.rounds}};
  if (verify) {
    const auto oracle = hmb::core_oracle_bruteforce(inst);
    j["oracle"] = hmb::matching_to_json(oracle);
    j["verified"] = oracle == t.matching && y.matching == t.matching;
  }
  std::cout << j.dump(2) << '\n';
  return 0;
}

int cmd_bounds(const RunOptions& o) {
  auto f = resolve(o);
  auto cps = hmb::effective_checkpoints(f.config);
  std::ostream* os = &std::cout;
  std::ofstream file;
  if (!f.out.empty()) {
    file = open_out(f.out);
    os = &file;
  }
  *os << "algorithm,player,checkpoint_t,bound\n";
  os->precision(17);
  for (auto t : cps) {
    if (t < 2) continue;
    const auto b = hmb::theoretical_bounds(f.config.instance, t, f.config.algorithm);
    for (std::size_t i = 0; i < b.per_player.size(); ++i) {
      *os << hmb::to_string(f.config.algorithm) << ',' << i + 1 << ',' << t << ',' << b.per_player[i] << '\n';
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bandit learning in housing markets: simulator and mechanisms"};
  app.require_subcommand(1);

  std::string family = "random", reward = "gaussian", gen_out;
  std::size_t n = 5, distinguished = 1;
  double delta = 0.2, delta_floor = 0.1;
  std::uint64_t gen_seed = 0;
  auto* gen = app.add_subcommand("gen", "Generate an instance JSON");
  gen->add_option("--family", family, "random | sttcb | lower-bound");
  gen->add_option("--n", n, "number of players/arms");
  gen->add_option("--delta", delta, "gap parameter for sttcb / lower-bound");
  gen->add_option("--delta-floor", delta_floor, "minimum adjacent gap for random");
  gen->add_option("--distinguished", distinguished, "distinguished player (1-based) for lower-bound");
  gen->add_option("--reward", reward, "gaussian | bernoulli | deterministic");
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_option("--out", gen_out, "output path (stdout if omitted)");

  RunOptions run_opts, mc_opts, bound_opts;
  run_opts.algo.clear();
  mc_opts.algo.clear();
  bound_opts.algo.clear();
  auto* run = app.add_subcommand("run", "Run a single episode");
  add_run_options(run, run_opts, true);
  auto* mc = app.add_subcommand("mc", "Monte Carlo over seeds");
  add_run_options(mc, mc_opts, false);

  std::string mech_instance;
  bool verify = false;
  auto* mech = app.add_subcommand("mechanisms", "Run TTC / YRMH-IGYT on an instance");
  mech->add_option("--instance", mech_instance, "instance JSON file")->required();
  mech->add_flag("--verify", verify, "cross-check against the exhaustive core oracle");

  auto* bounds = app.add_subcommand("bounds", "Print regret bound curves");
  bounds->add_option("--instance", bound_opts.instance, "instance JSON file");
  bounds->add_option("--config", bound_opts.config, "JSON experiment config");
  bounds->add_option("--algo", bound_opts.algo, "decentralized-etc | centralized-ucb");
  bounds->add_option("--horizon", bound_opts.horizon, "horizon T");
  bounds->add_option("--checkpoints", bound_opts.checkpoints, "comma-separated rounds");
  bounds->add_option("--out", bound_opts.out, "output CSV path (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitValidation;
  }

  auto default_algo = [](RunOptions& o) {
    if (o.algo.empty() && o.config.empty()) o.algo = "centralized-ucb";
  };
  default_algo(run_opts);
  default_algo(mc_opts);
  default_algo(bound_opts);

  try {
    if (*gen) return cmd_gen(family, n, delta, delta_floor, distinguished, reward, gen_seed, gen_out);
    if (*run) return cmd_run(run_opts);
    if (*mc) return cmd_mc(mc_opts);
    if (*mech) return cmd_mechanisms(mech_instance, verify);
    if (*bounds) return cmd_bounds(bound_opts);
  } catch (const hmb::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.is_validation() ? kExitValidation : kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
