#include "hmbandit/centralized.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace hmb {

double ucb_index(double mean, std::uint64_t count, std::uint64_t t) {
  if (t == 0) throw Error(ErrorCode::InvalidParameter, "rounds are numbered from 1");
  if (count == 0) return std::numeric_limits<double>::infinity();
  return mean + std::sqrt(3.0 * std::log(static_cast<double>(t)) / (2.0 * static_cast<double>(count)));
}

PreferenceRanking rank_by_index(std::span<const double> indices) {
  // stable_sort keeps ascending arm order among equal keys.
  return ranking_from_row(indices);
}

std::vector<double> IndexState::indices(std::uint64_t t) const {
  std::vector<double> out(mean.size());
  for (Index j = 0; j < mean.size(); ++j) out[j] = ucb_index(mean[j], count[j], t);
  return out;
}

void IndexState::update(Index arm, double reward) {
  const auto c = static_cast<double>(count[arm]);
  mean[arm] = (mean[arm] * c + reward) / (c + 1.0);
  ++count[arm];
}

CentralizedUcb::CentralizedUcb(std::size_t n) : states_(n, IndexState(n)) {}

Matching CentralizedUcb::assign(std::uint64_t t) const {
  std::vector<PreferenceRanking> submitted;
  submitted.reserve(states_.size());
  for (const auto& s : states_) {
    const auto idx = s.indices(t);
    submitted.push_back(rank_by_index(idx));
  }
  return ttc(submitted);
}

void CentralizedUcb::observe(const RoundOutcome& outcome) {
  for (Index i = 0; i < states_.size(); ++i) {
    const auto& r = outcome.player(i);
    if (r.matched) states_[i].update(*r.matched, r.reward);
  }
}

Matching platform_round(CentralizedUcb& platform, const MarketInstance& instance,
                        const EpisodeRng& rng, std::uint64_t t, RoundOutcome* outcome) {
  Matching mu = platform.assign(t);
  std::vector<Proposal> proposals(mu.arm_of.begin(), mu.arm_of.end());
  RoundOutcome result = resolve_round(proposals, instance, rng, t);
  platform.observe(result);
  if (outcome) *outcome = std::move(result);
  return mu;
}

}  // namespace hmb
