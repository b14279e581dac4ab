#pragma once

// Stochastic market environment: resolves one round of proposals under the
// collision rule, samples rewards and accumulates per-player core regret.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "hmbandit/market.hpp"

namespace hmb {

/// An arm index, or nullopt for abstaining.
using Proposal = std::optional<Index>;
inline constexpr std::nullopt_t kAbstain = std::nullopt;

/// SplitMix64; small enough to create one per (player, round) stream.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }
  result_type operator()() noexcept;

 private:
  std::uint64_t state_;
};

/// Root seed of an episode, split deterministically per (player, round) so
/// that outcomes do not depend on the order in which players are resolved.
class EpisodeRng {
 public:
  explicit EpisodeRng(std::uint64_t seed) noexcept : seed_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }
  SplitMix64 stream(Index player, std::uint64_t round) const noexcept;

 private:
  std::uint64_t seed_;
};

/// Gaussian: mean + N(0,1). Bernoulli: 1 with probability mean. Deterministic: mean.
template <class Urbg>
double sample_reward(RewardFamily family, double mean, Urbg& rng) {
  switch (family) {
    case RewardFamily::Gaussian:
      return mean + std::normal_distribution<double>(0.0, 1.0)(rng);
    case RewardFamily::Bernoulli:
      if (!(mean >= 0.0 && mean <= 1.0)) {
        throw Error(ErrorCode::MeanOutOfRange, "Bernoulli mean must lie in [0,1]");
      }
      return std::bernoulli_distribution(mean)(rng) ? 1.0 : 0.0;
    case RewardFamily::Deterministic:
      return mean;
  }
  return mean;
}

struct PlayerResult {
  Proposal proposal;
  std::optional<Index> matched;  // arm actually obtained
  double reward = 0.0;
  bool collided = false;
};

class RoundOutcome {
 public:
  RoundOutcome() = default;
  RoundOutcome(std::vector<PlayerResult> players, std::vector<std::vector<Index>> applicants);

  std::size_t size() const noexcept { return players_.size(); }
  const PlayerResult& player(Index i) const { return players_.at(i); }
  std::span<const PlayerResult> players() const noexcept { return players_; }

  /// |A_j^{-1}(t)|, public.
  std::size_t applicant_count(Index arm) const { return applicants_.at(arm).size(); }

  /// Identities of players who proposed to the arm endowed to `owner`. Only
  /// the owner is entitled to this view.
  std::span<const Index> owner_view(Index owner) const { return applicants_.at(owner); }

 private:
  std::vector<PlayerResult> players_;
  std::vector<std::vector<Index>> applicants_;
};

/// Applies the collision rule to one round of proposals.
RoundOutcome resolve_round(std::span<const Proposal> proposals, const MarketInstance& instance,
                           const EpisodeRng& rng, std::uint64_t round);

enum class RegretKind { Pseudo, Realized };

/// Per-player regret accumulator against T * U(i, mu*(p_i)). In trace mode it
/// keeps every round so mid-episode queries and CSV export are possible.
class RegretLedger {
 public:
  RegretLedger(std::size_t players, bool trace);

  void record(const RoundOutcome& outcome, const MarketInstance& instance);

  std::uint64_t rounds() const noexcept { return round_; }
  std::size_t size() const noexcept { return pseudo_.size(); }
  bool tracing() const noexcept { return trace_; }

  /// Regret of `player` after round t. t = 0 is 0; t < rounds() needs trace mode.
  double cumulative_regret(Index player, std::uint64_t t,
                           RegretKind kind = RegretKind::Pseudo) const;
  double pseudo_regret(Index player) const { return pseudo_.at(player); }
  double realized_regret(Index player) const { return realized_.at(player); }
  double total_reward(Index player) const { return reward_.at(player); }

  /// Sum of rewards handed to collided players over the episode; zero by construction.
  double collision_reward() const noexcept { return collision_reward_; }
  std::uint64_t collisions(Index player) const { return collisions_.at(player); }

  /// CSV: round,player,proposal,matched_arm,collided,reward,pseudo_regret_cum,
  /// realized_regret_cum[,matching_is_core]. Indices are 1-based, blank for none.
  void write_trace_csv(std::ostream& os, const std::vector<bool>* matching_is_core = nullptr) const;

 private:
  struct Row {
    PlayerResult result;
    double pseudo_cum;
    double realized_cum;
  };

  bool trace_;
  std::uint64_t round_ = 0;
  std::vector<double> pseudo_;
  std::vector<double> realized_;
  std::vector<double> reward_;
  std::vector<std::uint64_t> collisions_;
  double collision_reward_ = 0.0;
  std::vector<std::vector<Row>> rows_;  // [round-1][player]
};

}  // namespace hmb
