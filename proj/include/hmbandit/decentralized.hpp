#pragma once

// Decentralized explore-then-commit for housing markets. Each player runs
// its own state machine: round-robin exploration in doubling sub-phases,
// status broadcast over its endowed arm, then a request-chain version of
// YRMH-IGYT driven only by collisions, owner views and the public
// availability flags.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "hmbandit/env.hpp"
#include "hmbandit/market.hpp"

namespace hmb {

enum class Stage { Explore, Communicate };

/// Position of a phase-1 round. Sub-phase `subphase` spans 2^subphase
/// exploration rounds followed by N communication rounds; `offset` is 1-based
/// within the stage.
struct Schedule {
  std::uint64_t subphase = 1;
  Stage stage = Stage::Explore;
  std::uint64_t offset = 1;

  friend bool operator==(const Schedule&, const Schedule&) = default;
};

Schedule schedule_of(std::uint64_t t, std::size_t n);

/// Last round of sub-phase `subphase`: sum over l' <= subphase of (2^l' + N).
std::uint64_t subphase_end(std::uint64_t subphase, std::size_t n);

/// Smallest l with 2 + 4 + ... + 2^l >= 96 N ln T / delta_min^2.
std::uint64_t max_exploration_subphase(std::uint64_t horizon, std::size_t n, double delta_min);

/// subphase_end(max_exploration_subphase(...)): the latest phase-2 entry
/// round when every confidence interval holds its mean.
std::uint64_t exploration_length_bound(std::uint64_t horizon, std::size_t n, double delta_min);

struct ConfidenceInterval {
  double lcb = 0.0;
  double ucb = 0.0;
};

/// mean -/+ sqrt(6 ln T / max(count, 1)). Requires T >= 2.
ConfidenceInterval confidence_bounds(double mean, std::uint64_t count, std::uint64_t horizon);

struct ExplorationStats {
  std::vector<double> mean;
  std::vector<std::uint64_t> count;

  explicit ExplorationStats(std::size_t arms = 0) : mean(arms, 0.0), count(arms, 0) {}
  std::size_t size() const noexcept { return mean.size(); }

  /// Incremental mean update after one matched pull.
  void update(Index arm, double reward);
};

/// Sort arms by empirical mean; accept the order only if each arm's LCB
/// strictly exceeds the UCB of the next one.
std::optional<PreferenceRanking> try_extract_ranking(const ExplorationStats& stats,
                                                     std::uint64_t horizon);

/// Common-knowledge flags F: available[i] is true while a_i is still unallocated.
struct AvailabilityBoard {
  std::vector<bool> available;

  explicit AvailabilityBoard(std::size_t n = 0) : available(n, true) {}
  bool operator[](Index i) const { return available[i]; }
  bool any() const;
  std::optional<Index> leader() const;  // smallest index with F true
  friend bool operator==(const AvailabilityBoard&, const AvailabilityBoard&) = default;
};

class EtcPlayer {
 public:
  EtcPlayer(Index id, std::size_t n, std::uint64_t horizon);

  /// Action for round t. `board` holds the flags as of the start of round t.
  Proposal act(std::uint64_t t, const AvailabilityBoard& board);

  /// Feedback for round t: own result plus the owner view of its endowed arm.
  void observe(std::uint64_t t, const PlayerResult& own, std::span<const Index> own_arm_applicants,
               const AvailabilityBoard& board);

  Index id() const noexcept { return id_; }
  std::uint64_t horizon() const noexcept { return horizon_; }
  const ExplorationStats& stats() const noexcept { return stats_; }
  bool ranking_certified() const noexcept { return p_flag_; }
  const std::optional<PreferenceRanking>& sigma() const noexcept { return sigma_; }
  /// Round at which phase 1 ends, once known.
  std::optional<std::uint64_t> phase1_end() const noexcept { return t1_; }
  bool in_phase2(std::uint64_t t) const noexcept { return t1_ && t > *t1_; }
  bool available() const noexcept { return available_; }
  std::optional<Index> committed_arm() const noexcept { return committed_; }
  std::optional<std::uint64_t> commit_round() const noexcept { return commit_round_; }
  std::uint64_t epoch() const noexcept { return epoch_; }
  bool proposed_this_epoch() const noexcept { return propose_flag_; }
  std::optional<Index> predecessor() const noexcept { return predecessor_; }

 private:
  Proposal phase1_action(std::uint64_t t) const;
  Proposal phase2_action(std::uint64_t t, const AvailabilityBoard& board);
  void observe_phase1(std::uint64_t t, const PlayerResult& own,
                      std::span<const Index> own_arm_applicants);
  void observe_phase2(std::uint64_t t, std::span<const Index> own_arm_applicants,
                      const AvailabilityBoard& board);
  Index best_available(const AvailabilityBoard& board) const;

  Index id_;
  std::size_t n_;
  std::uint64_t horizon_;

  ExplorationStats stats_;
  bool p_flag_ = false;
  std::optional<PreferenceRanking> sigma_;
  std::optional<std::uint64_t> t1_;

  // Phase 2.
  bool available_ = true;
  std::uint64_t epoch_ = 0;
  bool epoch_start_ = false;
  bool cycle_closing_ = false;
  AvailabilityBoard last_board_;
  bool propose_flag_ = false;
  std::optional<Index> predecessor_;
  std::optional<Index> pending_request_;
  std::optional<Index> target_;
  std::optional<Index> committed_;
  std::optional<std::uint64_t> commit_round_;
};

/// Runs all N player state machines against one environment and maintains
/// the public availability board between rounds.
class DecentralizedEtc {
 public:
  DecentralizedEtc(std::size_t n, std::uint64_t horizon);

  std::vector<Proposal> act(std::uint64_t t);
  void observe(std::uint64_t t, const RoundOutcome& outcome);

  std::span<const EtcPlayer> players() const noexcept { return players_; }
  const EtcPlayer& player(Index i) const { return players_.at(i); }
  const AvailabilityBoard& board() const noexcept { return board_; }
  bool all_committed() const;

 private:
  std::vector<EtcPlayer> players_;
  AvailabilityBoard board_;
};

}  // namespace hmb
