#include "hmbandit/decentralized.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace hmb {

namespace {

constexpr std::uint64_t kMaxSubphase = 62;

std::uint64_t pow2(std::uint64_t l) { return std::uint64_t{1} << l; }

}  // namespace

Schedule schedule_of(std::uint64_t t, std::size_t n) {
  if (t == 0) throw Error(ErrorCode::InvalidParameter, "rounds are numbered from 1");
  if (n == 0) throw Error(ErrorCode::InvalidParameter, "market must be non-empty");
  std::uint64_t start = 0;  // rounds consumed by earlier sub-phases
  for (std::uint64_t l = 1; l <= kMaxSubphase; ++l) {
    const std::uint64_t explore = pow2(l);
    if (t <= start + explore) return {l, Stage::Explore, t - start};
    if (t <= start + explore + n) return {l, Stage::Communicate, t - start - explore};
    start += explore + n;
  }
  throw Error(ErrorCode::RoundOutOfRange, "round beyond the representable schedule");
}

std::uint64_t subphase_end(std::uint64_t subphase, std::size_t n) {
  if (subphase > kMaxSubphase) return std::numeric_limits<std::uint64_t>::max();
  // sum_{l'=1}^{l} 2^{l'} = 2^{l+1} - 2
  return (pow2(subphase + 1) - 2) + subphase * n;
}

std::uint64_t max_exploration_subphase(std::uint64_t horizon, std::size_t n, double delta_min) {
  const double need = 96.0 * static_cast<double>(n) * std::log(static_cast<double>(horizon)) /
                      (delta_min * delta_min);
  for (std::uint64_t l = 1; l <= kMaxSubphase; ++l) {
    if (static_cast<double>(pow2(l + 1) - 2) >= need) return l;
  }
  return kMaxSubphase + 1;
}

std::uint64_t exploration_length_bound(std::uint64_t horizon, std::size_t n, double delta_min) {
  return subphase_end(max_exploration_subphase(horizon, n, delta_min), n);
}

ConfidenceInterval confidence_bounds(double mean, std::uint64_t count, std::uint64_t horizon) {
  if (horizon < 2) throw Error(ErrorCode::InvalidParameter, "horizon must be at least 2");
  const double radius = std::sqrt(6.0 * std::log(static_cast<double>(horizon)) /
                                  static_cast<double>(std::max<std::uint64_t>(count, 1)));
  return {mean - radius, mean + radius};
}

void ExplorationStats::update(Index arm, double reward) {
  const auto c = static_cast<double>(count[arm]);
  mean[arm] = (mean[arm] * c + reward) / (c + 1.0);
  ++count[arm];
}

std::optional<PreferenceRanking> try_extract_ranking(const ExplorationStats& stats,
                                                     std::uint64_t horizon) {
  PreferenceRanking r = ranking_from_row(stats.mean);
  for (std::size_t k = 0; k + 1 < r.size(); ++k) {
    const Index hi = r[k];
    const Index lo = r[k + 1];
    const auto upper = confidence_bounds(stats.mean[hi], stats.count[hi], horizon);
    const auto lower = confidence_bounds(stats.mean[lo], stats.count[lo], horizon);
    if (!(upper.lcb > lower.ucb)) return std::nullopt;
  }
  return r;
}

bool AvailabilityBoard::any() const {
  return std::find(available.begin(), available.end(), true) != available.end();
}

std::optional<Index> AvailabilityBoard::leader() const {
  auto it = std::find(available.begin(), available.end(), true);
  if (it == available.end()) return std::nullopt;
  return static_cast<Index>(it - available.begin());
}

EtcPlayer::EtcPlayer(Index id, std::size_t n, std::uint64_t horizon)
    : id_(id), n_(n), horizon_(horizon), stats_(n), last_board_(n) {
  if (id >= n) throw Error(ErrorCode::InvalidParameter, "player id out of range");
  if (horizon < 2) throw Error(ErrorCode::InvalidParameter, "horizon must be at least 2");
}

Proposal EtcPlayer::act(std::uint64_t t, const AvailabilityBoard& board) {
  if (in_phase2(t)) return phase2_action(t, board);
  return phase1_action(t);
}

Proposal EtcPlayer::phase1_action(std::uint64_t t) const {
  const Schedule s = schedule_of(t, n_);
  if (s.stage == Stage::Explore) {
    // a_{(i + t - 1) % N + 1} with 1-based i; distinct players never share an arm.
    return static_cast<Index>((id_ + t) % n_);
  }
  if (p_flag_) return static_cast<Index>(s.offset - 1);
  return kAbstain;
}

Index EtcPlayer::best_available(const AvailabilityBoard& board) const {
  for (Index a : sigma_->order) {
    if (board[a]) return a;
  }
  throw Error(ErrorCode::Desync, "no available arm for an unallocated player");
}

Proposal EtcPlayer::phase2_action(std::uint64_t t, const AvailabilityBoard& board) {
  if (committed_) return *committed_;
  if (!available_) return kAbstain;

  // Epoch bookkeeping from the public board only, so every player agrees.
  // A closed cycle drains one member per round; the next epoch starts after
  // the first round in which the board stays unchanged.
  if (t == *t1_ + 1) {
    epoch_ = 1;
    epoch_start_ = true;
    cycle_closing_ = false;
  } else if (board != last_board_) {
    cycle_closing_ = true;
    epoch_start_ = false;
  } else if (cycle_closing_) {
    cycle_closing_ = false;
    epoch_start_ = true;
    ++epoch_;
    propose_flag_ = false;
    predecessor_.reset();
    pending_request_.reset();
    target_.reset();
  } else {
    epoch_start_ = false;
  }
  last_board_ = board;

  if (epoch_start_) {
    if (board.leader() == id_) {
      target_ = best_available(board);
      propose_flag_ = true;
      return *target_;
    }
    return kAbstain;
  }
  if (pending_request_) {
    predecessor_ = *pending_request_;
    pending_request_.reset();
    target_ = best_available(board);
    propose_flag_ = true;
    return *target_;
  }
  return kAbstain;
}

void EtcPlayer::observe(std::uint64_t t, const PlayerResult& own,
                        std::span<const Index> own_arm_applicants, const AvailabilityBoard& board) {
  if (own_arm_applicants.size() > n_) throw Error(ErrorCode::Desync, "more applicants than players");
  if (in_phase2(t)) {
    observe_phase2(t, own_arm_applicants, board);
  } else {
    observe_phase1(t, own, own_arm_applicants);
  }
}

void EtcPlayer::observe_phase1(std::uint64_t t, const PlayerResult& own,
                               std::span<const Index> own_arm_applicants) {
  const Schedule s = schedule_of(t, n_);
  if (s.stage == Stage::Explore) {
    const Index expected = static_cast<Index>((id_ + t) % n_);
    if (own.proposal != expected || own.matched != expected) {
      throw Error(ErrorCode::Desync, "player " + std::to_string(id_ + 1) +
                                         " was not matched to its round-robin arm in round " +
                                         std::to_string(t));
    }
    stats_.update(expected, own.reward);
    if (s.offset == pow2(s.subphase)) {
      auto ranking = try_extract_ranking(stats_, horizon_);
      p_flag_ = ranking.has_value();
      if (ranking) sigma_ = std::move(ranking);
    }
    return;
  }
  // Communicate: rewards are not folded into the estimates.
  if (s.offset == id_ + 1 && own_arm_applicants.size() == n_ && !t1_) {
    if (!p_flag_ || !sigma_) {
      throw Error(ErrorCode::Desync, "full broadcast received without a certified ranking");
    }
    t1_ = subphase_end(s.subphase, n_);
  }
}

void EtcPlayer::observe_phase2(std::uint64_t t, std::span<const Index> own_arm_applicants,
                               const AvailabilityBoard& board) {
  if (committed_ || !available_) return;
  const bool requested = !own_arm_applicants.empty();
  const bool closes = (propose_flag_ && requested) || (predecessor_ && !board[*predecessor_]);
  if (closes) {
    if (!target_) throw Error(ErrorCode::Desync, "cycle closed without an own proposal");
    available_ = false;
    committed_ = target_;
    commit_round_ = t;
    return;
  }
  if (requested) {
    if (own_arm_applicants.size() != 1) {
      throw Error(ErrorCode::Desync, "request chain delivered more than one proposal");
    }
    pending_request_ = own_arm_applicants.front();
  }
}

DecentralizedEtc::DecentralizedEtc(std::size_t n, std::uint64_t horizon) : board_(n) {
  players_.reserve(n);
  for (Index i = 0; i < n; ++i) players_.emplace_back(i, n, horizon);
}

std::vector<Proposal> DecentralizedEtc::act(std::uint64_t t) {
  std::vector<Proposal> proposals;
  proposals.reserve(players_.size());
  for (auto& p : players_) proposals.push_back(p.act(t, board_));
  return proposals;
}

void DecentralizedEtc::observe(std::uint64_t t, const RoundOutcome& outcome) {
  for (Index i = 0; i < players_.size(); ++i) {
    if (players_[i].in_phase2(t) && outcome.player(i).collided) {
      throw Error(ErrorCode::Desync, "collision during phase 2 in round " + std::to_string(t));
    }
  }
  for (Index i = 0; i < players_.size(); ++i) {
    players_[i].observe(t, outcome.player(i), outcome.owner_view(i), board_);
  }
  for (Index i = 0; i < players_.size(); ++i) board_.available[i] = players_[i].available();
}

bool DecentralizedEtc::all_committed() const {
  return std::all_of(players_.begin(), players_.end(),
                     [](const EtcPlayer& p) { return p.committed_arm().has_value(); });
}

}  // namespace hmb
