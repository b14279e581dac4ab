#pragma once

// Episode runner, Monte Carlo aggregation over seeds, closed-form regret
// bound curves and report export.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hmbandit/decentralized.hpp"
#include "hmbandit/env.hpp"
#include "hmbandit/market.hpp"

namespace hmb {

enum class Algorithm { DecentralizedEtc, CentralizedUcb, OracleFixed };

std::string_view to_string(Algorithm algorithm) noexcept;
Algorithm algorithm_from_string(std::string_view name);

struct ExperimentConfig {
  MarketInstance instance;
  std::string instance_id = "instance";
  Algorithm algorithm = Algorithm::CentralizedUcb;
  std::uint64_t horizon = 1000;
  std::vector<std::uint64_t> seeds{0};
  bool trace = false;
  std::vector<std::uint64_t> checkpoints;  // empty: powers of ten from 100 up to T
  bool track_confidence = false;           // record concentration failures (ETC only)
  unsigned threads = 0;                    // 0: hardware concurrency
};

/// Throws ConfigInvalid when the configuration cannot be run.
void validate(const ExperimentConfig& config);

/// {10^2, 10^3, 10^4, 10^5} restricted to [1, T].
std::vector<std::uint64_t> default_checkpoints(std::uint64_t horizon);
std::vector<std::uint64_t> effective_checkpoints(const ExperimentConfig& config);

struct EpisodeTrace {
  std::uint64_t seed = 0;
  std::uint64_t rounds = 0;
  std::vector<std::uint64_t> checkpoints;
  std::vector<std::vector<double>> checkpoint_regret;  // [player][checkpoint], pseudo
  std::vector<double> final_pseudo;
  std::vector<double> final_realized;
  RegretLedger ledger{0, false};
  std::vector<bool> matching_is_core;  // per round: every player got its core arm
  /// Last round with a non-zero pseudo-regret increment per player (0 if none).
  std::vector<std::uint64_t> last_regret_round;
  std::uint64_t collisions = 0;
  double collision_reward = 0.0;

  // Decentralized ETC only.
  std::vector<std::optional<std::uint64_t>> phase1_end;  // t1 per player
  bool synchronized_entry = true;
  std::vector<std::optional<std::uint64_t>> commit_round;
  std::vector<std::optional<Index>> committed_arm;
  std::uint64_t post_commit_rounds = 0;        // summed over players
  std::uint64_t post_commit_core_matches = 0;  // of those, rounds matched to mu*
  bool confidence_violation = false;
  std::optional<DecentralizedEtc> final_players;

  std::optional<std::uint64_t> common_phase1_end() const;
};

EpisodeTrace run_episode(const ExperimentConfig& config, std::uint64_t seed);

struct BoundCurve {
  std::vector<double> per_player;
  bool exploration_term_dropped = false;  // delta_min was +inf
};

/// Per-player regret bound at horizon T. Decentralized:
///   (192 N ln T / d^2 + N ln(192 N ln T / d^2) + 3 N^2) * U(i, mu*(p_i));
/// centralized:
///   max_j max(0, U(i, mu*(p_i)) - U(i, j)) * (5 N^2 + 12 N ln T / d^2);
/// oracle-fixed: 0. Here d is the instance's minimum preference gap.
BoundCurve theoretical_bounds(const MarketInstance& instance, std::uint64_t horizon,
                              Algorithm algorithm);

struct AggregateReport {
  std::string algorithm;
  std::string instance_id;
  std::uint64_t horizon = 0;
  std::size_t seed_count = 0;
  std::vector<std::uint64_t> checkpoints;
  std::vector<std::vector<double>> mean;    // [player][checkpoint]
  std::vector<std::vector<double>> std_error;  // [player][checkpoint]
  std::vector<std::vector<double>> bound;   // [player][checkpoint]
  std::vector<EpisodeTrace> episodes;       // in seed order

  std::size_t players() const noexcept { return mean.size(); }
};

/// Runs every seed (in parallel across seeds) and aggregates checkpoint means
/// and standard errors. Needs at least two seeds.
AggregateReport monte_carlo(const ExperimentConfig& config);

/// Long-format CSV: algorithm,instance_id,seed_count,player,checkpoint_t,
/// mean_regret,stderr,bound (player 1-based).
void write_report_csv(std::ostream& os, const AggregateReport& report);
void write_report_json(std::ostream& os, const AggregateReport& report);

/// Writes <prefix>.csv and <prefix>.json.
void export_report(const AggregateReport& report, const std::string& path_prefix);

}  // namespace hmb
