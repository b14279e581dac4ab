#pragma once

// Instance generators: random markets with a floor on adjacent preference
// gaps, single-top-trading-cycle (STTCB) markets and the Bernoulli
// lower-bound construction.

#include <cstdint>
#include <random>

#include "hmbandit/market.hpp"

namespace hmb {

enum class GeneratorFamily { Random, Sttcb, LowerBound };

std::string_view to_string(GeneratorFamily family) noexcept;
GeneratorFamily generator_family_from_string(std::string_view name);

struct GeneratorConfig {
  std::size_t n = 2;
  GeneratorFamily family = GeneratorFamily::Random;
  double delta_floor = 0.1;  // Random: minimum adjacent gap
  double delta = 0.2;        // Sttcb / LowerBound gap parameter
  Index distinguished = 0;   // LowerBound: 0-based index of the distinguished player
  RewardFamily reward = RewardFamily::Gaussian;  // ignored by LowerBound (always Bernoulli)
  std::uint64_t seed = 0;
};

/// Tie-break spacing used to make the lower-bound rows strict.
inline constexpr double kTieBreakEpsilon = 1e-6;

MarketInstance random_instance(const GeneratorConfig& config, std::mt19937_64& rng);

/// Core is the single cycle p_i -> a_{i+1 mod n}; each player's top arm is its
/// core arm and every adjacent gap in every row is at least delta.
MarketInstance sttcb_instance(std::size_t n, double delta, std::mt19937_64& rng,
                              RewardFamily reward = RewardFamily::Gaussian);

/// Optimal arm of p_i is a_{i+1}, worth 1/2. Other arms are worth 1/2 - delta,
/// or 1/4 for the distinguished player, with duplicates pushed down by
/// multiples of kTieBreakEpsilon. Bernoulli rewards.
MarketInstance lower_bound_instance(std::size_t n, double delta, Index distinguished);

MarketInstance generate(const GeneratorConfig& config);

/// Top arm of every player is its core arm and the core is one n-cycle.
bool is_sttcb(const MarketInstance& instance);

/// U(i, mu*(p_i)) - U(i, j) for every arm j; may be negative outside STTCB.
std::vector<double> core_gaps(const MarketInstance& instance, Index player);

/// Gap between p_i's core arm and its best other arm.
double core_margin(const MarketInstance& instance, Index player);

}  // namespace hmb
