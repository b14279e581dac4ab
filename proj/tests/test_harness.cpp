#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "hmbandit/harness.hpp"
#include "hmbandit/instances.hpp"
#include "oracles.hpp"

using namespace hmb;

namespace {

ExperimentConfig config_for(const MarketInstance& inst, Algorithm algo, std::uint64_t horizon) {
  ExperimentConfig cfg;
  cfg.instance = inst;
  cfg.algorithm = algo;
  cfg.horizon = horizon;
  return cfg;
}

std::string trace_csv(const EpisodeTrace& e) {
  std::ostringstream os;
  e.ledger.write_trace_csv(os, &e.matching_is_core);
  return os.str();
}

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("config validation") {
  const auto inst = validate_instance({{0.3, 0.7}, {0.6, 0.4}});
  auto cfg = config_for(inst, Algorithm::DecentralizedEtc, 1);
  CHECK_THROWS_AS(validate(cfg), Error);
  cfg.horizon = 100;
  cfg.seeds.clear();
  CHECK_THROWS_AS(validate(cfg), Error);
  cfg.seeds = {1};
  cfg.checkpoints = {101};
  CHECK_THROWS_AS(validate(cfg), Error);
  cfg.checkpoints = {1, 100};
  CHECK_NOTHROW(validate(cfg));
  CHECK(algorithm_from_string("ucb") == Algorithm::CentralizedUcb);
  CHECK(algorithm_from_string("decentralized-etc") == Algorithm::DecentralizedEtc);
  CHECK(algorithm_from_string("oracle-fixed") == Algorithm::OracleFixed);
  CHECK_THROWS_AS(algorithm_from_string("greedy"), Error);
}

TEST_CASE("default checkpoints") {
  CHECK(default_checkpoints(50).empty());
  CHECK(default_checkpoints(100) == std::vector<std::uint64_t>{100});
  CHECK(default_checkpoints(99999) == std::vector<std::uint64_t>{100, 1000, 10000});
  CHECK(default_checkpoints(1000000) == std::vector<std::uint64_t>{100, 1000, 10000, 100000});
}

TEST_CASE("oracle-fixed has zero pseudo-regret") {
  std::mt19937_64 gen(1);
  const auto inst = validate_instance(testing::random_utilities(4, gen));
  auto cfg = config_for(inst, Algorithm::OracleFixed, 2000);
  cfg.trace = true;
  const auto e = run_episode(cfg, 7);
  for (Index i = 0; i < 4; ++i) {
    CHECK(e.final_pseudo[i] == 0.0);
    for (std::uint64_t t = 0; t <= 2000; t += 97) CHECK(e.ledger.cumulative_regret(i, t) == 0.0);
  }
  CHECK(e.collisions == 0);
  CHECK(std::all_of(e.matching_is_core.begin(), e.matching_is_core.end(), [](bool b) { return b; }));
}

TEST_CASE("episodes are deterministic in the seed") {
  const auto inst = validate_instance({{0.2, 0.9, 0.5}, {0.9, 0.2, 0.5}, {0.1, 0.5, 0.9}});
  for (auto algo : {Algorithm::CentralizedUcb, Algorithm::DecentralizedEtc}) {
    auto cfg = config_for(inst, algo, 3000);
    cfg.trace = true;
    const auto a = run_episode(cfg, 42);
    const auto b = run_episode(cfg, 42);
    const auto c = run_episode(cfg, 43);
    CHECK(trace_csv(a) == trace_csv(b));
    CHECK(trace_csv(a) != trace_csv(c));
    CHECK(a.final_realized == b.final_realized);
  }
}

TEST_CASE("zero-noise decentralized regret flatlines after phase 2") {
  const auto inst =
      validate_instance({{0.2, 0.9, 0.5}, {0.9, 0.2, 0.5}, {0.1, 0.5, 0.9}}, RewardFamily::Deterministic);
  auto cfg = config_for(inst, Algorithm::DecentralizedEtc, 60000);
  cfg.trace = true;
  const auto e = run_episode(cfg, 3);
  REQUIRE(e.common_phase1_end().has_value());
  CHECK(e.synchronized_entry);
  const std::uint64_t t1 = *e.common_phase1_end();
  for (Index i = 0; i < 3; ++i) {
    CHECK(e.last_regret_round[i] <= t1 + 9);
    CHECK(e.committed_arm[i] == inst.core()[i]);
  }
  CHECK(e.post_commit_rounds > 0);
  CHECK(e.post_commit_core_matches == e.post_commit_rounds);
}

TEST_CASE("zero-noise centralized regret eventually stops growing per round") {
  const auto inst =
      validate_instance({{0.2, 0.9, 0.5}, {0.9, 0.2, 0.5}, {0.1, 0.5, 0.9}}, RewardFamily::Deterministic);
  const auto e = run_episode(config_for(inst, Algorithm::CentralizedUcb, 50000), 3);
  std::uint64_t late_misses = 0;
  for (std::uint64_t t = 25000; t < 50000; ++t) late_misses += !e.matching_is_core[t];
  CHECK(late_misses < 250);
}

TEST_CASE("theoretical bounds") {
  // The worked number: N = 5, delta_min = 0.2, T = 1e5, U(i, mu*) = 0.5.
  const double e02 = 192.0 * 5 * std::log(1e5) / 0.04;
  CHECK((e02 + 5 * std::log(e02) + 75) * 0.5 == doctest::Approx(1.382e5).epsilon(1e-3));

  std::mt19937_64 gen(5);
  const auto five = sttcb_instance(5, 0.2, gen);
  const double d = five.delta_min();
  const double ex = 192.0 * 5 * std::log(1e5) / (d * d);
  const auto bf = theoretical_bounds(five, 100000, Algorithm::DecentralizedEtc);
  CHECK_FALSE(bf.exploration_term_dropped);
  for (Index i = 0; i < 5; ++i) {
    CHECK(bf.per_player[i] == doctest::Approx((ex + 5 * std::log(ex) + 75) * five.core_utility(i)));
  }

  const auto single = validate_instance({{0.4}});
  const auto s1 = theoretical_bounds(single, 1000, Algorithm::DecentralizedEtc);
  CHECK(s1.exploration_term_dropped);
  CHECK(s1.per_player[0] == doctest::Approx(3 * 0.4));
  CHECK(theoretical_bounds(single, 1000, Algorithm::CentralizedUcb).per_player[0] == 0.0);

  const auto swap = validate_instance({{0.3, 0.7}, {0.6, 0.4}});
  const auto c = theoretical_bounds(swap, 1000, Algorithm::CentralizedUcb);
  CHECK(c.per_player[0] == doctest::Approx(0.4 * (20 + 24 * std::log(1000.0) / 0.04)));
  CHECK(c.per_player[1] == doctest::Approx(0.2 * (20 + 24 * std::log(1000.0) / 0.04)));

  double prev = 0.0;
  for (std::uint64_t t : {10ull, 100ull, 1000ull, 100000ull}) {
    const double v = theoretical_bounds(swap, t, Algorithm::CentralizedUcb).per_player[0];
    CHECK(v > prev);
    prev = v;
  }
  CHECK(theoretical_bounds(swap, 1000, Algorithm::OracleFixed).per_player[0] == 0.0);
}

TEST_CASE("monte carlo aggregation and export") {
  const auto inst = validate_instance({{0.2, 0.9, 0.5}, {0.9, 0.2, 0.5}, {0.1, 0.5, 0.9}});
  auto cfg = config_for(inst, Algorithm::CentralizedUcb, 10000);
  cfg.seeds = {1, 2, 3, 4, 5};
  cfg.threads = 2;
  const auto rep = monte_carlo(cfg);
  REQUIRE(rep.players() == 3);
  CHECK(rep.checkpoints == std::vector<std::uint64_t>{100, 1000, 10000});
  for (Index i = 0; i < 3; ++i) {
    double sum = 0.0;
    for (const auto& e : rep.episodes) sum += e.checkpoint_regret[i][2];
    CHECK(rep.mean[i][2] == doctest::Approx(sum / 5));
    CHECK(rep.std_error[i][2] >= 0.0);
    CHECK(rep.bound[i][2] ==
          doctest::Approx(theoretical_bounds(inst, 10000, Algorithm::CentralizedUcb).per_player[i]));
  }
  for (std::size_t k = 0; k < 5; ++k) CHECK(rep.episodes[k].seed == cfg.seeds[k]);

  // Thread count does not change the result.
  cfg.threads = 1;
  const auto serial = monte_carlo(cfg);
  std::ostringstream a, b;
  write_report_csv(a, rep);
  write_report_csv(b, serial);
  CHECK(a.str() == b.str());

  std::istringstream lines(a.str());
  std::string line;
  std::size_t rows = 0;
  std::getline(lines, line);
  CHECK(line == "algorithm,instance_id,seed_count,player,checkpoint_t,mean_regret,stderr,bound");
  while (std::getline(lines, line)) ++rows;
  CHECK(rows == 9);

  const auto dir = std::filesystem::temp_directory_path() / "hmb_test_harness";
  std::filesystem::create_directories(dir);
  const std::string prefix = (dir / "report").string();
  export_report(rep, prefix);
  const auto csv1 = slurp(prefix + ".csv"), json1 = slurp(prefix + ".json");
  export_report(rep, prefix);
  CHECK(slurp(prefix + ".csv") == csv1);
  CHECK(slurp(prefix + ".json") == json1);
  CHECK(csv1 == a.str());
  CHECK_THROWS_AS(export_report(rep, (dir / "missing" / "x").string()), Error);

  cfg.seeds = {1};
  CHECK_THROWS_AS(monte_carlo(cfg), Error);
}

TEST_CASE("report with no checkpoints is header only") {
  const auto inst = validate_instance({{0.3, 0.7}, {0.6, 0.4}});
  auto cfg = config_for(inst, Algorithm::CentralizedUcb, 50);
  cfg.seeds = {1, 2};
  const auto rep = monte_carlo(cfg);
  std::ostringstream os;
  write_report_csv(os, rep);
  CHECK(os.str() == "algorithm,instance_id,seed_count,player,checkpoint_t,mean_regret,stderr,bound\n");
}

TEST_CASE("checkpoint means are non-decreasing on STTCB markets") {
  std::mt19937_64 gen(12);
  const auto inst = sttcb_instance(4, 0.2, gen);
  auto cfg = config_for(inst, Algorithm::CentralizedUcb, 10000);
  cfg.seeds = {1, 2, 3, 4};
  cfg.checkpoints = {10, 100, 1000, 5000, 10000};
  const auto rep = monte_carlo(cfg);
  for (Index i = 0; i < 4; ++i) {
    for (std::size_t c = 0; c + 1 < rep.checkpoints.size(); ++c) CHECK(rep.mean[i][c] <= rep.mean[i][c + 1]);
  }
}

TEST_CASE("doubling the seed count halves the estimator variance") {
  std::mt19937_64 gen(6);
  const auto inst = validate_instance(testing::random_utilities(3, gen));
  auto cfg = config_for(inst, Algorithm::CentralizedUcb, 1000);
  cfg.checkpoints = {1000};
  cfg.threads = 1;
  cfg.seeds.clear();
  for (std::uint64_t s = 0; s < 200; ++s) cfg.seeds.push_back(s);
  const auto small = monte_carlo(cfg);
  cfg.seeds.clear();
  for (std::uint64_t s = 200; s < 600; ++s) cfg.seeds.push_back(s);
  const auto large = monte_carlo(cfg);
  for (Index i = 0; i < 3; ++i) {
    const double ratio = std::pow(small.std_error[i][0], 2) / std::pow(large.std_error[i][0], 2);
    CHECK(ratio >= 1.5);
    CHECK(ratio <= 3.0);
  }
}

TEST_CASE("confidence tracking on a well-separated market") {
  const auto inst = validate_instance({{0.1, 0.9}, {0.9, 0.1}});
  auto cfg = config_for(inst, Algorithm::DecentralizedEtc, 5000);
  cfg.track_confidence = true;
  const auto e = run_episode(cfg, 11);
  CHECK_FALSE(e.confidence_violation);
}
