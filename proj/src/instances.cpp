#include "hmbandit/instances.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>

namespace hmb {

std::string_view to_string(GeneratorFamily family) noexcept {
  switch (family) {
    case GeneratorFamily::Random: return "random";
    case GeneratorFamily::Sttcb: return "sttcb";
    case GeneratorFamily::LowerBound: return "lower-bound";
  }
  return "random";
}

GeneratorFamily generator_family_from_string(std::string_view name) {
  if (name == "random") return GeneratorFamily::Random;
  if (name == "sttcb") return GeneratorFamily::Sttcb;
  if (name == "lower-bound" || name == "lower_bound") return GeneratorFamily::LowerBound;
  throw Error(ErrorCode::ConfigInvalid, "unknown generator family '" + std::string(name) + "'");
}

MarketInstance random_instance(const GeneratorConfig& config, std::mt19937_64& rng) {
  const std::size_t n = config.n;
  if (n == 0) throw Error(ErrorCode::InvalidParameter, "n must be at least 1");
  if (!(config.delta_floor > 0.0) || config.delta_floor * static_cast<double>(n) > 1.0) {
    throw Error(ErrorCode::InfeasibleGapFloor,
                "delta_floor must be positive with delta_floor * n <= 1");
  }
  const double slack = 1.0 - config.delta_floor * static_cast<double>(n - 1);
  std::uniform_real_distribution<double> unif(0.0, slack);

  std::vector<std::vector<double>> rows(n, std::vector<double>(n));
  std::vector<double> draws(n);
  std::vector<Index> arms(n);
  for (auto& row : rows) {
    // Sorted uniforms on [0, slack] shifted by k * floor keep every adjacent
    // gap at least the floor and every value inside [0, 1].
    for (auto& d : draws) d = unif(rng);
    std::sort(draws.begin(), draws.end());
    std::iota(arms.begin(), arms.end(), Index{0});
    std::shuffle(arms.begin(), arms.end(), rng);
    for (std::size_t k = 0; k < n; ++k) {
      row[arms[k]] = std::min(1.0, draws[k] + config.delta_floor * static_cast<double>(k));
    }
  }
  return validate_instance(rows, config.reward);
}

MarketInstance sttcb_instance(std::size_t n, double delta, std::mt19937_64& rng,
                              RewardFamily reward) {
  if (n < 2) throw Error(ErrorCode::InvalidParameter, "STTCB instances need n >= 2");
  if (!(delta > 0.0) || delta * static_cast<double>(n - 1) >= 1.0) {
    throw Error(ErrorCode::InfeasibleDelta, "delta must lie in (0, 1/(n-1))");
  }
  std::vector<std::vector<double>> rows(n, std::vector<double>(n));
  std::vector<Index> others;
  for (Index i = 0; i < n; ++i) {
    const Index top = (i + 1) % n;
    others.clear();
    for (Index j = 0; j < n; ++j) {
      if (j != top) others.push_back(j);
    }
    std::shuffle(others.begin(), others.end(), rng);
    rows[i][top] = 1.0;
    for (std::size_t k = 0; k < others.size(); ++k) {
      rows[i][others[k]] = 1.0 - delta * static_cast<double>(k + 1);
    }
  }
  return validate_instance(rows, reward);
}

MarketInstance lower_bound_instance(std::size_t n, double delta, Index distinguished) {
  if (n < 2) throw Error(ErrorCode::InvalidParameter, "lower-bound instances need n >= 2");
  if (!(delta > 0.0 && delta <= 0.25)) {
    throw Error(ErrorCode::InfeasibleDelta, "delta must lie in (0, 1/4]");
  }
  if (distinguished >= n) throw Error(ErrorCode::InvalidParameter, "distinguished player out of range");

  std::vector<std::vector<double>> rows(n, std::vector<double>(n));
  for (Index i = 0; i < n; ++i) {
    const Index top = (i + 1) % n;
    const double rest = (i == distinguished) ? 0.25 : 0.5 - delta;
    std::size_t k = 0;
    for (Index j = 0; j < n; ++j) {
      if (j == top) {
        rows[i][j] = 0.5;
      } else {
        rows[i][j] = rest - kTieBreakEpsilon * static_cast<double>(k++);
      }
    }
  }
  return validate_instance(rows, RewardFamily::Bernoulli);
}

MarketInstance generate(const GeneratorConfig& config) {
  std::mt19937_64 rng(config.seed);
  switch (config.family) {
    case GeneratorFamily::Random: return random_instance(config, rng);
    case GeneratorFamily::Sttcb: return sttcb_instance(config.n, config.delta, rng, config.reward);
    case GeneratorFamily::LowerBound:
      return lower_bound_instance(config.n, config.delta, config.distinguished);
  }
  throw Error(ErrorCode::ConfigInvalid, "unknown generator family");
}

bool is_sttcb(const MarketInstance& instance) {
  const std::size_t n = instance.size();
  const Matching& core = instance.core();
  for (Index i = 0; i < n; ++i) {
    if (instance.ranking(i)[0] != core[i]) return false;
  }
  // Single cycle: following p -> owner of its core arm from p_1 visits everyone.
  Index v = 0;
  for (std::size_t steps = 1; steps <= n; ++steps) {
    v = core[v];
    if (v == 0) return steps == n;
  }
  return false;
}

std::vector<double> core_gaps(const MarketInstance& instance, Index player) {
  const double best = instance.core_utility(player);
  std::vector<double> gaps(instance.size());
  for (Index j = 0; j < gaps.size(); ++j) gaps[j] = best - instance.utility(player, j);
  return gaps;
}

double core_margin(const MarketInstance& instance, Index player) {
  const Index mine = instance.core()[player];
  double second = -std::numeric_limits<double>::infinity();
  for (Index j = 0; j < instance.size(); ++j) {
    if (j != mine) second = std::max(second, instance.utility(player, j));
  }
  return instance.core_utility(player) - second;
}

}  // namespace hmb
