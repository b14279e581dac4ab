#pragma once

// Test-only reference implementations. These deliberately avoid the library's
// algorithms so they can serve as independent checks.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "hmbandit/market.hpp"

namespace hmb::testing {

/// Uniform utilities in [0,1]; ties have probability zero.
inline std::vector<std::vector<double>> random_utilities(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<std::vector<double>> u(n, std::vector<double>(n));
  for (auto& row : u) {
    for (auto& v : row) v = unif(rng);
  }
  return u;
}

/// Definition-level blocking check: try every non-empty subset S and every
/// bijection of S's endowments onto S, looking for one where nobody loses and
/// somebody gains.
inline bool blocked_by_enumeration(const Matching& mu, const UtilityMatrix& u) {
  const std::size_t n = u.size();
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    std::vector<Index> members;
    for (Index i = 0; i < n; ++i) {
      if (mask & (1u << i)) members.push_back(i);
    }
    std::vector<Index> arms = members;  // endowments of S, sorted
    do {
      bool no_loss = true, gain = false;
      for (std::size_t k = 0; k < members.size() && no_loss; ++k) {
        const double now = u(members[k], mu[members[k]]), after = u(members[k], arms[k]);
        no_loss = after >= now;
        gain = gain || after > now;
      }
      if (no_loss && gain) return true;
    } while (std::next_permutation(arms.begin(), arms.end()));
  }
  return false;
}

/// Core by exhaustive enumeration of bijections with the definition-level check.
inline std::vector<Matching> unblocked_by_enumeration(const UtilityMatrix& u) {
  std::vector<Matching> out;
  Matching mu = Matching::identity(u.size());
  do {
    if (!blocked_by_enumeration(mu, u)) out.push_back(mu);
  } while (std::next_permutation(mu.arm_of.begin(), mu.arm_of.end()));
  return out;
}

/// Applies the theoretical round-robin pull count for one player over the
/// explore rounds up to and including global round t (for schedule checks).
inline std::uint64_t prefix_rounds(std::uint64_t l, std::size_t n) {
  std::uint64_t s = 0;
  for (std::uint64_t k = 1; k <= l; ++k) s += (std::uint64_t{1} << k) + n;
  return s;
}

}  // namespace hmb::testing
