#pragma once

// Anytime centralized learning: every player ranks arms by an optimistic
// index, a platform runs TTC on the submitted rankings each round and players
// pull what they are assigned. Nothing here depends on the horizon.

#include <cstdint>
#include <span>
#include <vector>

#include "hmbandit/env.hpp"
#include "hmbandit/market.hpp"

namespace hmb {

/// +inf when count == 0, else mean + sqrt(3 ln t / (2 count)). `count` is
/// the number of pulls before round t.
double ucb_index(double mean, std::uint64_t count, std::uint64_t t);

/// Descending by index; ties (including several +inf) go to the lower arm index.
PreferenceRanking rank_by_index(std::span<const double> indices);

struct IndexState {
  std::vector<double> mean;
  std::vector<std::uint64_t> count;

  explicit IndexState(std::size_t arms = 0) : mean(arms, 0.0), count(arms, 0) {}
  std::vector<double> indices(std::uint64_t t) const;
  void update(Index arm, double reward);
};

class CentralizedUcb {
 public:
  explicit CentralizedUcb(std::size_t n);

  /// Collects every player's index ranking and returns TTC on them.
  Matching assign(std::uint64_t t) const;

  /// Folds matched rewards into the per-player estimates.
  void observe(const RoundOutcome& outcome);

  std::span<const IndexState> states() const noexcept { return states_; }
  const IndexState& state(Index i) const { return states_.at(i); }

 private:
  std::vector<IndexState> states_;
};

/// One platform step: rank, match, pull, update. Returns the matching used.
Matching platform_round(CentralizedUcb& platform, const MarketInstance& instance,
                        const EpisodeRng& rng, std::uint64_t t, RoundOutcome* outcome = nullptr);

}  // namespace hmb
