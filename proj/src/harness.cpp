#include "hmbandit/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <mutex>
#include <ostream>
#include <thread>

#include <json.hpp>

#include "hmbandit/centralized.hpp"

namespace hmb {

std::string_view to_string(Algorithm algorithm) noexcept {
  switch (algorithm) {
    case Algorithm::DecentralizedEtc: return "decentralized-etc";
    case Algorithm::CentralizedUcb: return "centralized-ucb";
    case Algorithm::OracleFixed: return "oracle-fixed";
  }
  return "centralized-ucb";
}

Algorithm algorithm_from_string(std::string_view name) {
  if (name == "decentralized-etc" || name == "etc") return Algorithm::DecentralizedEtc;
  if (name == "centralized-ucb" || name == "ucb") return Algorithm::CentralizedUcb;
  if (name == "oracle-fixed" || name == "oracle") return Algorithm::OracleFixed;
  throw Error(ErrorCode::ConfigInvalid, "unknown algorithm '" + std::string(name) + "'");
}

void validate(const ExperimentConfig& config) {
  if (config.instance.size() == 0) throw Error(ErrorCode::ConfigInvalid, "no instance");
  if (config.horizon < 1) throw Error(ErrorCode::ConfigInvalid, "horizon must be at least 1");
  if (config.seeds.empty()) throw Error(ErrorCode::ConfigInvalid, "seed list is empty");
  if (config.algorithm == Algorithm::DecentralizedEtc && config.horizon < 2) {
    throw Error(ErrorCode::ConfigInvalid, "decentralized-etc needs a horizon of at least 2");
  }
  for (auto c : config.checkpoints) {
    if (c < 1 || c > config.horizon) {
      throw Error(ErrorCode::ConfigInvalid, "checkpoint " + std::to_string(c) + " outside [1, T]");
    }
  }
}

std::vector<std::uint64_t> default_checkpoints(std::uint64_t horizon) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t c = 100; c <= 100000 && c <= horizon; c *= 10) out.push_back(c);
  return out;
}

std::vector<std::uint64_t> effective_checkpoints(const ExperimentConfig& config) {
  std::vector<std::uint64_t> cps =
      config.checkpoints.empty() ? default_checkpoints(config.horizon) : config.checkpoints;
  std::sort(cps.begin(), cps.end());
  cps.erase(std::unique(cps.begin(), cps.end()), cps.end());
  return cps;
}

std::optional<std::uint64_t> EpisodeTrace::common_phase1_end() const {
  if (phase1_end.empty() || !phase1_end.front()) return std::nullopt;
  for (const auto& t : phase1_end) {
    if (t != phase1_end.front()) return std::nullopt;
  }
  return phase1_end.front();
}

namespace {

bool confidence_violated(const DecentralizedEtc& etc, const MarketInstance& instance,
                         std::uint64_t horizon) {
  const double log_t = std::log(static_cast<double>(horizon));
  for (const auto& p : etc.players()) {
    const auto& s = p.stats();
    for (Index j = 0; j < s.size(); ++j) {
      if (s.count[j] == 0) continue;
      const double radius = std::sqrt(6.0 * log_t / static_cast<double>(s.count[j]));
      if (std::abs(s.mean[j] - instance.utility(p.id(), j)) > radius) return true;
    }
  }
  return false;
}

}  // namespace

EpisodeTrace run_episode(const ExperimentConfig& config, std::uint64_t seed) {
  validate(config);
  const MarketInstance& inst = config.instance;
  const std::size_t n = inst.size();
  const std::uint64_t horizon = config.horizon;
  const EpisodeRng rng(seed);

  EpisodeTrace tr;
  tr.seed = seed;
  tr.checkpoints = effective_checkpoints(config);
  tr.checkpoint_regret.assign(n, {});
  tr.ledger = RegretLedger(n, config.trace);
  tr.last_regret_round.assign(n, 0);
  tr.matching_is_core.reserve(horizon);

  std::optional<DecentralizedEtc> etc;
  std::optional<CentralizedUcb> ucb;
  if (config.algorithm == Algorithm::DecentralizedEtc) etc.emplace(n, horizon);
  if (config.algorithm == Algorithm::CentralizedUcb) ucb.emplace(n);

  std::vector<Proposal> proposals(n);
  std::size_t next_cp = 0;
  std::vector<double> before(n);

  for (std::uint64_t t = 1; t <= horizon; ++t) {
    switch (config.algorithm) {
      case Algorithm::DecentralizedEtc: proposals = etc->act(t); break;
      case Algorithm::CentralizedUcb: {
        const Matching mu = ucb->assign(t);
        proposals.assign(mu.arm_of.begin(), mu.arm_of.end());
        break;
      }
      case Algorithm::OracleFixed:
        proposals.assign(inst.core().arm_of.begin(), inst.core().arm_of.end());
        break;
    }

    const RoundOutcome outcome = resolve_round(proposals, inst, rng, t);
    if (etc) {
      etc->observe(t, outcome);
      if (config.track_confidence && !tr.confidence_violation) {
        tr.confidence_violation = confidence_violated(*etc, inst, horizon);
      }
    }
    if (ucb) ucb->observe(outcome);

    for (Index i = 0; i < n; ++i) before[i] = tr.ledger.pseudo_regret(i);
    tr.ledger.record(outcome, inst);

    bool all_core = true;
    for (Index i = 0; i < n; ++i) {
      const auto& r = outcome.player(i);
      const bool got_core = r.matched == inst.core()[i];
      all_core = all_core && got_core;
      if (tr.ledger.pseudo_regret(i) != before[i]) tr.last_regret_round[i] = t;
      if (etc) {
        const auto cr = etc->player(i).commit_round();
        if (cr && t > *cr) {
          ++tr.post_commit_rounds;
          if (got_core) ++tr.post_commit_core_matches;
        }
      }
    }
    tr.matching_is_core.push_back(all_core);

    while (next_cp < tr.checkpoints.size() && tr.checkpoints[next_cp] == t) {
      for (Index i = 0; i < n; ++i) tr.checkpoint_regret[i].push_back(tr.ledger.pseudo_regret(i));
      ++next_cp;
    }
  }

  tr.rounds = horizon;
  tr.final_pseudo.resize(n);
  tr.final_realized.resize(n);
  for (Index i = 0; i < n; ++i) {
    tr.final_pseudo[i] = tr.ledger.pseudo_regret(i);
    tr.final_realized[i] = tr.ledger.realized_regret(i);
    tr.collisions += tr.ledger.collisions(i);
  }
  tr.collision_reward = tr.ledger.collision_reward();

  if (etc) {
    for (const auto& p : etc->players()) {
      tr.phase1_end.push_back(p.phase1_end());
      tr.commit_round.push_back(p.commit_round());
      tr.committed_arm.push_back(p.committed_arm());
    }
    tr.synchronized_entry =
        std::all_of(tr.phase1_end.begin(), tr.phase1_end.end(),
                    [&](const auto& t) { return t == tr.phase1_end.front(); });
    tr.final_players = std::move(etc);
  }
  return tr;
}

BoundCurve theoretical_bounds(const MarketInstance& instance, std::uint64_t horizon,
                              Algorithm algorithm) {
  if (horizon < 2) throw Error(ErrorCode::InvalidParameter, "bounds need T >= 2");
  const std::size_t n = instance.size();
  const double nn = static_cast<double>(n);
  const double log_t = std::log(static_cast<double>(horizon));
  const double d = instance.delta_min();
  BoundCurve out;
  out.per_player.assign(n, 0.0);
  out.exploration_term_dropped = std::isinf(d);

  for (Index i = 0; i < n; ++i) {
    const double best = instance.core_utility(i);
    switch (algorithm) {
      case Algorithm::DecentralizedEtc: {
        double value = 3.0 * nn * nn;
        if (!out.exploration_term_dropped) {
          const double explore = 192.0 * nn * log_t / (d * d);
          value += explore + nn * std::log(explore);
        }
        out.per_player[i] = value * best;
        break;
      }
      case Algorithm::CentralizedUcb: {
        double gap = 0.0;
        for (Index j = 0; j < n; ++j) gap = std::max(gap, best - instance.utility(i, j));
        double value = 5.0 * nn * nn;
        if (!out.exploration_term_dropped) value += 12.0 * nn * log_t / (d * d);
        out.per_player[i] = gap * value;
        break;
      }
      case Algorithm::OracleFixed: break;
    }
  }
  return out;
}

AggregateReport monte_carlo(const ExperimentConfig& config) {
  validate(config);
  if (config.seeds.size() < 2) {
    throw Error(ErrorCode::ConfigInvalid, "Monte Carlo aggregation needs at least two seeds");
  }
  const std::size_t seeds = config.seeds.size();
  std::vector<std::optional<EpisodeTrace>> results(seeds);

  unsigned workers = config.threads ? config.threads : std::thread::hardware_concurrency();
  workers = std::clamp<unsigned>(workers, 1, static_cast<unsigned>(seeds));

  std::mutex error_mutex;
  std::exception_ptr first_error;
  auto work = [&](unsigned w) {
    for (std::size_t k = w; k < seeds; k += workers) {
      try {
        results[k] = run_episode(config, config.seeds[k]);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
  }
  if (first_error) std::rethrow_exception(first_error);

  AggregateReport rep;
  rep.algorithm = std::string(to_string(config.algorithm));
  rep.instance_id = config.instance_id;
  rep.horizon = config.horizon;
  rep.seed_count = seeds;
  rep.checkpoints = effective_checkpoints(config);
  const std::size_t n = config.instance.size();
  const std::size_t cps = rep.checkpoints.size();
  rep.mean.assign(n, std::vector<double>(cps, 0.0));
  rep.std_error.assign(n, std::vector<double>(cps, 0.0));
  rep.bound.assign(n, std::vector<double>(cps, 0.0));
  rep.episodes.reserve(seeds);
  for (auto& r : results) rep.episodes.push_back(std::move(*r));

  const double k = static_cast<double>(seeds);
  for (Index i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < cps; ++c) {
      double sum = 0.0;
      for (const auto& e : rep.episodes) sum += e.checkpoint_regret[i][c];
      const double mean = sum / k;
      double ss = 0.0;
      for (const auto& e : rep.episodes) {
        const double dev = e.checkpoint_regret[i][c] - mean;
        ss += dev * dev;
      }
      rep.mean[i][c] = mean;
      rep.std_error[i][c] = std::sqrt(ss / (k - 1.0) / k);
    }
  }
  for (std::size_t c = 0; c < cps; ++c) {
    if (rep.checkpoints[c] < 2) continue;
    const auto b = theoretical_bounds(config.instance, rep.checkpoints[c], config.algorithm);
    for (Index i = 0; i < n; ++i) rep.bound[i][c] = b.per_player[i];
  }
  return rep;
}

void write_report_csv(std::ostream& os, const AggregateReport& report) {
  os << "algorithm,instance_id,seed_count,player,checkpoint_t,mean_regret,stderr,bound\n";
  const auto old_precision = os.precision(17);
  for (Index i = 0; i < report.players(); ++i) {
    for (std::size_t c = 0; c < report.checkpoints.size(); ++c) {
      os << report.algorithm << ',' << report.instance_id << ',' << report.seed_count << ','
         << i + 1 << ',' << report.checkpoints[c] << ',' << report.mean[i][c] << ','
         << report.std_error[i][c] << ',' << report.bound[i][c] << '\n';
    }
  }
  os.precision(old_precision);
}

void write_report_json(std::ostream& os, const AggregateReport& report) {
  nlohmann::ordered_json j;
  j["algorithm"] = report.algorithm;
  j["instance_id"] = report.instance_id;
  j["horizon"] = report.horizon;
  j["seed_count"] = report.seed_count;
  j["checkpoints"] = report.checkpoints;
  auto& players = j["players"] = nlohmann::ordered_json::array();
  for (Index i = 0; i < report.players(); ++i) {
    nlohmann::ordered_json p;
    p["player"] = i + 1;
    p["mean_regret"] = report.mean[i];
    p["stderr"] = report.std_error[i];
    p["bound"] = report.bound[i];
    std::vector<double> finals;
    for (const auto& e : report.episodes) finals.push_back(e.final_pseudo[i]);
    p["final_regret_per_seed"] = finals;
    players.push_back(std::move(p));
  }
  std::vector<std::uint64_t> seeds;
  for (const auto& e : report.episodes) seeds.push_back(e.seed);
  j["seeds"] = seeds;
  os << j.dump(2) << '\n';
}

void export_report(const AggregateReport& report, const std::string& path_prefix) {
  auto open = [](const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorCode::Io, "cannot open '" + path + "' for writing");
    return f;
  };
  {
    const std::string path = path_prefix + ".csv";
    auto f = open(path);
    write_report_csv(f, report);
    if (!f) throw Error(ErrorCode::Io, "failed writing '" + path + "'");
  }
  {
    const std::string path = path_prefix + ".json";
    auto f = open(path);
    write_report_json(f, report);
    if (!f) throw Error(ErrorCode::Io, "failed writing '" + path + "'");
  }
}

}  // namespace hmb
