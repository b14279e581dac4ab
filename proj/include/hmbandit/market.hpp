#pragma once

// Ground-truth housing market: utilities, strict preference rankings, the
// core matching, and the full-information mechanisms (TTC, YRMH-IGYT) plus an
// exhaustive core verifier used as a test oracle.
//
// Indices are 0-based in the API. File formats and CLI output are 1-based.

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "hmbandit/error.hpp"

namespace hmb {

using Index = std::size_t;

enum class RewardFamily {
  Gaussian,       // mean + N(0, 1)
  Bernoulli,      // 1 w.p. mean
  Deterministic,  // exactly the mean; noise-free runs
};

std::string_view to_string(RewardFamily family) noexcept;
RewardFamily reward_family_from_string(std::string_view name);

/// Square matrix of player-over-arm utilities, row-major.
class UtilityMatrix {
 public:
  UtilityMatrix() = default;

  /// Copies `rows` without validation; see validate_instance for checks.
  static UtilityMatrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t size() const noexcept { return n_; }
  double operator()(Index player, Index arm) const noexcept { return data_[player * n_ + arm]; }
  std::span<const double> row(Index player) const noexcept {
    return {data_.data() + player * n_, n_};
  }
  std::vector<std::vector<double>> rows() const;

  friend bool operator==(const UtilityMatrix&, const UtilityMatrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

/// Arms ordered most-preferred first.
struct PreferenceRanking {
  std::vector<Index> order;

  std::size_t size() const noexcept { return order.size(); }
  Index operator[](std::size_t k) const noexcept { return order[k]; }
  friend bool operator==(const PreferenceRanking&, const PreferenceRanking&) = default;
};

/// Total assignment player -> arm. A valid final matching is a bijection.
struct Matching {
  std::vector<Index> arm_of;

  static Matching identity(std::size_t n);

  std::size_t size() const noexcept { return arm_of.size(); }
  Index operator[](Index player) const noexcept { return arm_of[player]; }
  bool is_bijection() const;
  friend bool operator==(const Matching&, const Matching&) = default;
};

/// A set of players together with a reallocation of their own endowments.
struct Coalition {
  std::vector<Index> members;
  std::vector<Index> reallocation;  // reallocation[k] is the arm given to members[k]
};

class MarketInstance {
 public:
  const UtilityMatrix& utilities() const noexcept { return utilities_; }
  RewardFamily reward_family() const noexcept { return family_; }
  std::size_t size() const noexcept { return utilities_.size(); }
  const std::vector<PreferenceRanking>& rankings() const noexcept { return rankings_; }
  const PreferenceRanking& ranking(Index player) const { return rankings_.at(player); }
  double delta_min() const noexcept { return delta_min_; }
  const Matching& core() const noexcept { return core_; }

  double utility(Index player, Index arm) const noexcept { return utilities_(player, arm); }
  /// U(i, mu*(p_i)).
  double core_utility(Index player) const noexcept { return utilities_(player, core_[player]); }

  /// Same utilities under a different reward model.
  MarketInstance with_reward_family(RewardFamily family) const;

 private:
  friend MarketInstance validate_instance(const std::vector<std::vector<double>>&, RewardFamily);

  UtilityMatrix utilities_;
  RewardFamily family_ = RewardFamily::Gaussian;
  std::vector<PreferenceRanking> rankings_;
  double delta_min_ = std::numeric_limits<double>::infinity();
  Matching core_;
};

inline constexpr std::size_t kDefaultOracleLimit = 8;

/// Checks squareness, range [0,1] and strictness of every row, then derives
/// rankings, the minimum preference gap and the core matching.
MarketInstance validate_instance(const std::vector<std::vector<double>>& utilities,
                                 RewardFamily family = RewardFamily::Gaussian);

PreferenceRanking ranking_from_utilities(const MarketInstance& instance, Index player);
PreferenceRanking ranking_from_row(std::span<const double> row);

/// Smallest gap between adjacently ranked arms over all players; +inf for N = 1.
double min_gap(const MarketInstance& instance);

/// Top trading cycles. All cycles present in an iteration are removed together.
Matching ttc(std::span<const PreferenceRanking> rankings);

struct TtcTrace {
  Matching matching;
  std::size_t iterations = 0;
};
TtcTrace ttc_traced(std::span<const PreferenceRanking> rankings);

struct YrmhEpoch {
  Index leader = 0;
  std::vector<Index> request_path;  // proposers in order
  Index first_repeated = 0;         // the player who received the repeat proposal
  std::vector<Index> cycle;         // players removed this epoch, in chain order
};

struct YrmhResult {
  Matching matching;
  std::size_t epochs = 0;
  std::size_t rounds = 0;  // one round per proposal
  std::vector<YrmhEpoch> trace;
};

/// Sequential "you request my house, I get your turn" with a leader-driven
/// request chain; each epoch removes the cycle closed by the first repeat.
YrmhResult yrmh_igyt(std::span<const PreferenceRanking> rankings);

/// Returns a coalition that can reallocate its own endowments so that no
/// member is worse off and at least one is strictly better, or nullopt if
/// `matching` is unblocked. Under strict preferences only the core is unblocked.
std::optional<Coalition> find_blocking_coalition(const Matching& matching,
                                                 const MarketInstance& instance,
                                                 std::size_t oracle_limit = kDefaultOracleLimit);

/// Enumerates all N! bijections and returns the single unblocked one.
Matching core_oracle_bruteforce(const MarketInstance& instance,
                                std::size_t oracle_limit = kDefaultOracleLimit);

/// Throws MalformedRanking unless every ranking is a permutation of 0..N-1.
void check_rankings(std::span<const PreferenceRanking> rankings);

}  // namespace hmb
