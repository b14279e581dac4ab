#include "hmbandit/env.hpp"

#include <ostream>
#include <string>

namespace hmb {

SplitMix64::result_type SplitMix64::operator()() noexcept {
  std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

SplitMix64 EpisodeRng::stream(Index player, std::uint64_t round) const noexcept {
  SplitMix64 mix(seed_);
  std::uint64_t key = mix();
  key ^= SplitMix64(static_cast<std::uint64_t>(player) * 0xD1B54A32D192ED03ULL + 1)();
  key ^= SplitMix64(round * 0x8CB92BA72F3D8DD7ULL + 7)();
  return SplitMix64(key);
}

RoundOutcome::RoundOutcome(std::vector<PlayerResult> players,
                           std::vector<std::vector<Index>> applicants)
    : players_(std::move(players)), applicants_(std::move(applicants)) {}

RoundOutcome resolve_round(std::span<const Proposal> proposals, const MarketInstance& instance,
                           const EpisodeRng& rng, std::uint64_t round) {
  const std::size_t n = instance.size();
  if (proposals.size() != n) {
    throw Error(ErrorCode::InvalidParameter, "expected " + std::to_string(n) + " proposals, got " +
                                                 std::to_string(proposals.size()));
  }
  std::vector<std::vector<Index>> applicants(n);
  for (Index i = 0; i < n; ++i) {
    if (proposals[i]) {
      if (*proposals[i] >= n) throw Error(ErrorCode::InvalidParameter, "proposal to unknown arm");
      applicants[*proposals[i]].push_back(i);
    }
  }

  std::vector<PlayerResult> results(n);
  for (Index i = 0; i < n; ++i) {
    PlayerResult& r = results[i];
    r.proposal = proposals[i];
    if (!r.proposal) continue;
    const Index arm = *r.proposal;
    if (applicants[arm].size() == 1) {
      r.matched = arm;
      auto gen = rng.stream(i, round);
      r.reward = sample_reward(instance.reward_family(), instance.utility(i, arm), gen);
    } else {
      r.collided = true;
    }
  }
  return RoundOutcome(std::move(results), std::move(applicants));
}

RegretLedger::RegretLedger(std::size_t players, bool trace)
    : trace_(trace),
      pseudo_(players, 0.0),
      realized_(players, 0.0),
      reward_(players, 0.0),
      collisions_(players, 0) {}

void RegretLedger::record(const RoundOutcome& outcome, const MarketInstance& instance) {
  ++round_;
  const std::size_t n = pseudo_.size();
  std::vector<Row> row;
  if (trace_) row.reserve(n);
  for (Index i = 0; i < n; ++i) {
    const PlayerResult& r = outcome.player(i);
    const double best = instance.core_utility(i);
    const double got_mean = r.matched ? instance.utility(i, *r.matched) : 0.0;
    pseudo_[i] += best - got_mean;
    realized_[i] += best - r.reward;
    reward_[i] += r.reward;
    if (r.collided) {
      ++collisions_[i];
      collision_reward_ += r.reward;
    }
    if (trace_) row.push_back({r, pseudo_[i], realized_[i]});
  }
  if (trace_) rows_.push_back(std::move(row));
}

double RegretLedger::cumulative_regret(Index player, std::uint64_t t, RegretKind kind) const {
  if (player >= pseudo_.size()) throw Error(ErrorCode::InvalidParameter, "player out of range");
  if (t > round_) {
    throw Error(ErrorCode::RoundOutOfRange,
                "round " + std::to_string(t) + " not yet played (at " + std::to_string(round_) + ")");
  }
  if (t == 0) return 0.0;
  if (t == round_) return kind == RegretKind::Pseudo ? pseudo_[player] : realized_[player];
  if (!trace_) {
    throw Error(ErrorCode::RoundOutOfRange, "mid-episode query requires trace mode");
  }
  const Row& r = rows_[t - 1][player];
  return kind == RegretKind::Pseudo ? r.pseudo_cum : r.realized_cum;
}

void RegretLedger::write_trace_csv(std::ostream& os, const std::vector<bool>* matching_is_core) const {
  const bool core_col = matching_is_core != nullptr;
  os << "round,player,proposal,matched_arm,collided,reward,pseudo_regret_cum,realized_regret_cum";
  if (core_col) os << ",matching_is_core";
  os << '\n';
  const auto old_precision = os.precision(17);
  for (std::size_t t = 0; t < rows_.size(); ++t) {
    for (Index i = 0; i < rows_[t].size(); ++i) {
      const Row& r = rows_[t][i];
      os << t + 1 << ',' << i + 1 << ',';
      if (r.result.proposal) os << *r.result.proposal + 1;
      os << ',';
      if (r.result.matched) os << *r.result.matched + 1;
      os << ',' << (r.result.collided ? 1 : 0) << ',' << r.result.reward << ',' << r.pseudo_cum
         << ',' << r.realized_cum;
      if (core_col) os << ',' << (t < matching_is_core->size() && (*matching_is_core)[t] ? 1 : 0);
      os << '\n';
    }
  }
  os.precision(old_precision);
}

}  // namespace hmb
