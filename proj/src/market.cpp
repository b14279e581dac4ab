#include "hmbandit/market.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <sstream>
#include <string>

namespace hmb {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NonSquare: return "NonSquare";
    case ErrorCode::EntryOutOfRange: return "EntryOutOfRange";
    case ErrorCode::TiedPreference: return "TiedPreference";
    case ErrorCode::MalformedRanking: return "MalformedRanking";
    case ErrorCode::OracleTooLarge: return "OracleTooLarge";
    case ErrorCode::NonUniqueCore: return "NonUniqueCore";
    case ErrorCode::EmptyCore: return "EmptyCore";
    case ErrorCode::MeanOutOfRange: return "MeanOutOfRange";
    case ErrorCode::RoundOutOfRange: return "RoundOutOfRange";
    case ErrorCode::Desync: return "DesyncError";
    case ErrorCode::InfeasibleGapFloor: return "InfeasibleGapFloor";
    case ErrorCode::InfeasibleDelta: return "InfeasibleDelta";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::Io: return "IoError";
  }
  return "Unknown";
}

bool Error::is_validation() const noexcept {
  switch (code_) {
    case ErrorCode::NonSquare:
    case ErrorCode::EntryOutOfRange:
    case ErrorCode::TiedPreference:
    case ErrorCode::MalformedRanking:
    case ErrorCode::OracleTooLarge:
    case ErrorCode::MeanOutOfRange:
    case ErrorCode::InfeasibleGapFloor:
    case ErrorCode::InfeasibleDelta:
    case ErrorCode::InvalidParameter:
    case ErrorCode::ConfigInvalid:
      return true;
    default:
      return false;
  }
}

std::string_view to_string(RewardFamily family) noexcept {
  switch (family) {
    case RewardFamily::Gaussian: return "gaussian";
    case RewardFamily::Bernoulli: return "bernoulli";
    case RewardFamily::Deterministic: return "deterministic";
  }
  return "gaussian";
}

RewardFamily reward_family_from_string(std::string_view name) {
  if (name == "gaussian") return RewardFamily::Gaussian;
  if (name == "bernoulli") return RewardFamily::Bernoulli;
  if (name == "deterministic") return RewardFamily::Deterministic;
  throw Error(ErrorCode::ConfigInvalid, "unknown reward model '" + std::string(name) + "'");
}

UtilityMatrix UtilityMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  UtilityMatrix m;
  m.n_ = rows.size();
  m.data_.reserve(m.n_ * m.n_);
  for (const auto& r : rows) {
    if (r.size() != m.n_) {
      throw Error(ErrorCode::NonSquare, "expected " + std::to_string(m.n_) + " columns, got " +
                                            std::to_string(r.size()));
    }
    m.data_.insert(m.data_.end(), r.begin(), r.end());
  }
  return m;
}

std::vector<std::vector<double>> UtilityMatrix::rows() const {
  std::vector<std::vector<double>> out(n_);
  for (Index i = 0; i < n_; ++i) out[i].assign(row(i).begin(), row(i).end());
  return out;
}

Matching Matching::identity(std::size_t n) {
  Matching m;
  m.arm_of.resize(n);
  std::iota(m.arm_of.begin(), m.arm_of.end(), Index{0});
  return m;
}

bool Matching::is_bijection() const {
  std::vector<bool> seen(arm_of.size(), false);
  for (Index a : arm_of) {
    if (a >= arm_of.size() || seen[a]) return false;
    seen[a] = true;
  }
  return true;
}

void check_rankings(std::span<const PreferenceRanking> rankings) {
  const std::size_t n = rankings.size();
  for (Index i = 0; i < n; ++i) {
    const auto& order = rankings[i].order;
    if (order.size() != n) {
      throw Error(ErrorCode::MalformedRanking,
                  "ranking of player " + std::to_string(i + 1) + " has " +
                      std::to_string(order.size()) + " entries, expected " + std::to_string(n));
    }
    std::vector<bool> seen(n, false);
    for (Index a : order) {
      if (a >= n || seen[a]) {
        throw Error(ErrorCode::MalformedRanking,
                    "ranking of player " + std::to_string(i + 1) + " is not a permutation");
      }
      seen[a] = true;
    }
  }
}

PreferenceRanking ranking_from_row(std::span<const double> row) {
  PreferenceRanking r;
  r.order.resize(row.size());
  std::iota(r.order.begin(), r.order.end(), Index{0});
  std::stable_sort(r.order.begin(), r.order.end(),
                   [&](Index a, Index b) { return row[a] > row[b]; });
  return r;
}

PreferenceRanking ranking_from_utilities(const MarketInstance& instance, Index player) {
  if (player >= instance.size()) {
    throw Error(ErrorCode::InvalidParameter, "player index out of range");
  }
  return ranking_from_row(instance.utilities().row(player));
}

namespace {

double min_gap_of(const UtilityMatrix& u, std::span<const PreferenceRanking> rankings) {
  double gap = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < u.size(); ++i) {
    const auto& order = rankings[i].order;
    for (std::size_t k = 0; k + 1 < order.size(); ++k) {
      gap = std::min(gap, u(i, order[k]) - u(i, order[k + 1]));
    }
  }
  return gap;
}

}  // namespace

double min_gap(const MarketInstance& instance) {
  return min_gap_of(instance.utilities(), instance.rankings());
}

MarketInstance validate_instance(const std::vector<std::vector<double>>& utilities,
                                 RewardFamily family) {
  const std::size_t n = utilities.size();
  if (n == 0) throw Error(ErrorCode::NonSquare, "market must have at least one player");
  for (Index i = 0; i < n; ++i) {
    if (utilities[i].size() != n) {
      throw Error(ErrorCode::NonSquare, "row " + std::to_string(i + 1) + " has " +
                                            std::to_string(utilities[i].size()) +
                                            " entries, expected " + std::to_string(n));
    }
    for (Index j = 0; j < n; ++j) {
      const double v = utilities[i][j];
      if (!(v >= 0.0 && v <= 1.0)) {
        std::ostringstream os;
        os << "U(" << i + 1 << "," << j + 1 << ") = " << v << " is outside [0,1]";
        throw Error(ErrorCode::EntryOutOfRange, os.str());
      }
    }
    for (Index j = 0; j < n; ++j) {
      for (Index k = j + 1; k < n; ++k) {
        if (utilities[i][j] == utilities[i][k]) {
          throw Error(ErrorCode::TiedPreference, "row " + std::to_string(i + 1) +
                                                     ": columns " + std::to_string(j + 1) +
                                                     " and " + std::to_string(k + 1) +
                                                     " are equal");
        }
      }
    }
  }

  MarketInstance inst;
  inst.utilities_ = UtilityMatrix::from_rows(utilities);
  inst.family_ = family;
  inst.rankings_.reserve(n);
  for (Index i = 0; i < n; ++i) inst.rankings_.push_back(ranking_from_row(inst.utilities_.row(i)));
  inst.delta_min_ = min_gap_of(inst.utilities_, inst.rankings_);
  inst.core_ = ttc(inst.rankings_);
  return inst;
}

MarketInstance MarketInstance::with_reward_family(RewardFamily family) const {
  MarketInstance copy = *this;
  copy.family_ = family;
  return copy;
}

TtcTrace ttc_traced(std::span<const PreferenceRanking> rankings) {
  check_rankings(rankings);
  const std::size_t n = rankings.size();
  TtcTrace out;
  out.matching.arm_of.assign(n, n);

  std::vector<bool> remaining(n, true);
  std::vector<std::size_t> cursor(n, 0);  // position in each ranking of the top remaining arm
  std::vector<Index> points_to(n);
  std::size_t left = n;

  while (left > 0) {
    ++out.iterations;
    for (Index i = 0; i < n; ++i) {
      if (!remaining[i]) continue;
      while (!remaining[rankings[i][cursor[i]]]) ++cursor[i];
      // Arm a_j is owned by player p_j, so pointing at the arm is pointing at its owner.
      points_to[i] = rankings[i][cursor[i]];
    }

    // Every node of the functional graph has out-degree one, so walking from
    // each unvisited node ends either in a fresh cycle or in an explored path.
    std::vector<int> state(n, 0);  // 0 unvisited, 1 on current walk, 2 finished
    std::vector<Index> on_cycle;
    for (Index start = 0; start < n; ++start) {
      if (!remaining[start] || state[start] != 0) continue;
      std::vector<Index> walk;
      Index v = start;
      while (state[v] == 0) {
        state[v] = 1;
        walk.push_back(v);
        v = points_to[v];
      }
      if (state[v] == 1) {
        for (auto it = std::find(walk.begin(), walk.end(), v); it != walk.end(); ++it) {
          on_cycle.push_back(*it);
        }
      }
      for (Index w : walk) state[w] = 2;
    }

    for (Index i : on_cycle) out.matching.arm_of[i] = points_to[i];
    for (Index i : on_cycle) remaining[i] = false;
    left -= on_cycle.size();
  }
  return out;
}

Matching ttc(std::span<const PreferenceRanking> rankings) { return ttc_traced(rankings).matching; }

YrmhResult yrmh_igyt(std::span<const PreferenceRanking> rankings) {
  check_rankings(rankings);
  const std::size_t n = rankings.size();
  YrmhResult out;
  out.matching.arm_of.assign(n, n);

  std::vector<bool> remaining(n, true);
  std::size_t left = n;

  auto best_remaining = [&](Index i) {
    for (Index a : rankings[i].order) {
      if (remaining[a]) return a;
    }
    return n;  // unreachable while i itself remains
  };

  while (left > 0) {
    YrmhEpoch epoch;
    epoch.leader = static_cast<Index>(std::find(remaining.begin(), remaining.end(), true) -
                                      remaining.begin());
    std::vector<Index> target(n, n);
    std::vector<bool> proposed(n, false);

    Index proposer = epoch.leader;
    while (true) {
      const Index arm = best_remaining(proposer);
      target[proposer] = arm;
      proposed[proposer] = true;
      epoch.request_path.push_back(proposer);
      ++out.rounds;
      const Index recipient = arm;  // owner of a_j is p_j
      if (proposed[recipient]) {
        epoch.first_repeated = recipient;
        break;
      }
      proposer = recipient;
    }

    auto first = std::find(epoch.request_path.begin(), epoch.request_path.end(),
                           epoch.first_repeated);
    epoch.cycle.assign(first, epoch.request_path.end());
    for (Index i : epoch.cycle) {
      out.matching.arm_of[i] = target[i];
      remaining[i] = false;
    }
    left -= epoch.cycle.size();
    out.trace.push_back(std::move(epoch));
    ++out.epochs;
  }
  return out;
}

std::optional<Coalition> find_blocking_coalition(const Matching& matching,
                                                 const MarketInstance& instance,
                                                 std::size_t oracle_limit) {
  const std::size_t n = instance.size();
  if (n > oracle_limit) {
    throw Error(ErrorCode::OracleTooLarge, "N = " + std::to_string(n) + " exceeds oracle limit " +
                                               std::to_string(oracle_limit));
  }
  if (matching.size() != n || !matching.is_bijection()) {
    throw Error(ErrorCode::InvalidParameter, "matching is not a bijection over the market");
  }
  const auto& u = instance.utilities();

  // p_i -> p_j whenever p_i weakly prefers p_j's endowment to its current arm
  // (the only indifferent edge leads to the owner of the arm it holds). A
  // coalition trading its own endowments so that nobody loses and somebody
  // gains exists iff some cycle in this graph uses a strict edge.
  //
  // Requiring every member to gain strictly would admit several unblocked
  // matchings in some markets; weak domination is what makes the core unique.
  auto weakly = [&](Index i, Index j) { return j == matching[i] || u(i, j) > u(i, matching[i]); };

  std::vector<Index> parent(n);
  std::deque<Index> queue;
  for (Index from = 0; from < n; ++from) {
    for (Index to = 0; to < n; ++to) {
      if (!(u(from, to) > u(from, matching[from]))) continue;
      // Close the strict edge from -> to with a weak path to -> ... -> from.
      std::fill(parent.begin(), parent.end(), n);
      parent[to] = to;
      queue.assign(1, to);
      while (!queue.empty() && parent[from] == n) {
        const Index v = queue.front();
        queue.pop_front();
        for (Index w = 0; w < n; ++w) {
          if (parent[w] == n && weakly(v, w)) {
            parent[w] = v;
            queue.push_back(w);
          }
        }
      }
      if (parent[from] == n) continue;
      Coalition c;
      for (Index x = from;; x = parent[x]) {
        c.members.push_back(x);
        if (x == to) break;
      }
      std::reverse(c.members.begin(), c.members.end());  // to ... from
      for (std::size_t k = 0; k < c.members.size(); ++k) {
        c.reallocation.push_back(c.members[(k + 1) % c.members.size()]);
      }
      return c;
    }
  }
  return std::nullopt;
}

Matching core_oracle_bruteforce(const MarketInstance& instance, std::size_t oracle_limit) {
  const std::size_t n = instance.size();
  if (n > oracle_limit) {
    throw Error(ErrorCode::OracleTooLarge, "N = " + std::to_string(n) + " exceeds oracle limit " +
                                               std::to_string(oracle_limit));
  }
  Matching candidate = Matching::identity(n);
  std::optional<Matching> found;
  std::size_t unblocked = 0;
  do {
    if (!find_blocking_coalition(candidate, instance, oracle_limit)) {
      ++unblocked;
      if (!found) found = candidate;
    }
  } while (std::next_permutation(candidate.arm_of.begin(), candidate.arm_of.end()));

  if (unblocked == 0) throw Error(ErrorCode::EmptyCore, "no unblocked matching found");
  if (unblocked > 1) {
    throw Error(ErrorCode::NonUniqueCore, std::to_string(unblocked) + " unblocked matchings");
  }
  return *found;
}

}  // namespace hmb
