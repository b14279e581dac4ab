#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "hmbandit/io.hpp"

using namespace hmb;
using nlohmann::json;

namespace {

std::filesystem::path scratch() {
  auto dir = std::filesystem::temp_directory_path() / "hmb_test_io";
  std::filesystem::create_directories(dir);
  return dir;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an hmb::Error");
  return ErrorCode::Io;
}

}  // namespace

TEST_CASE("instance JSON round trip") {
  const auto inst = validate_instance({{0.3, 0.7}, {0.6, 0.4}}, RewardFamily::Bernoulli);
  const auto j = instance_to_json(inst);
  CHECK(j["n"] == 2);
  CHECK(j["reward_model"] == "bernoulli");
  CHECK(j["utilities"][0][1] == 0.7);
  const auto back = instance_from_json(json::parse(j.dump()));
  CHECK(back.utilities() == inst.utilities());
  CHECK(back.reward_family() == RewardFamily::Bernoulli);

  const auto path = (scratch() / "swap.json").string();
  save_instance(inst, path);
  CHECK(load_instance(path).utilities() == inst.utilities());
}

TEST_CASE("instance JSON errors") {
  CHECK(code_of([] { instance_from_json(json::parse(R"({"n": 2, "utilities": [[0.1, 0.2]]})")); }) ==
        ErrorCode::NonSquare);
  CHECK(code_of([] { instance_from_json(json::parse(R"({"n": 1, "utilities": [[0.1]], "reward_model": "cauchy"})")); }) ==
        ErrorCode::ConfigInvalid);
  CHECK(code_of([] { instance_from_json(json::parse(R"({"n": 2})")); }) == ErrorCode::ConfigInvalid);
  CHECK(code_of([] { instance_from_json(json::parse(R"({"n": 2, "utilities": [[0.5, 0.5], [0.1, 0.2]]})")); }) ==
        ErrorCode::TiedPreference);
  CHECK(code_of([] { load_instance("/nonexistent/instance.json"); }) == ErrorCode::Io);

  const auto bad = (scratch() / "bad.json").string();
  std::ofstream(bad) << "{ not json";
  CHECK(code_of([&] { load_instance(bad); }) == ErrorCode::ConfigInvalid);

  // Reward model defaults to Gaussian when absent.
  CHECK(instance_from_json(json::parse(R"({"n": 1, "utilities": [[0.1]]})")).reward_family() ==
        RewardFamily::Gaussian);
}

TEST_CASE("matchings are 1-based in files") {
  const Matching m{{1, 0, 2}};
  CHECK(matching_to_json(m) == json::parse("[2, 1, 3]"));
  CHECK(matching_from_json(json::parse("[2, 1, 3]")) == m);
  CHECK(code_of([] { matching_from_json(json::parse("[0, 1]")); }) == ErrorCode::ConfigInvalid);
  CHECK(code_of([] { matching_from_json(json::parse(R"(["a"])")); }) == ErrorCode::ConfigInvalid);
}

TEST_CASE("experiment files") {
  const auto dir = scratch();
  save_instance(validate_instance({{0.3, 0.7}, {0.6, 0.4}}), (dir / "pair.json").string());

  const auto f = experiment_from_json(
      json::parse(R"({"instance": "pair.json", "algorithm": "centralized-ucb", "horizon": 500,
                      "seeds": [3, 4], "trace": "t.csv", "checkpoints": [100], "out": "res"})"),
      dir.string());
  CHECK(f.config.instance.size() == 2);
  CHECK(f.config.instance_id == "pair");
  CHECK(f.config.algorithm == Algorithm::CentralizedUcb);
  CHECK(f.config.seeds == std::vector<std::uint64_t>{3, 4});
  CHECK(f.config.trace);
  CHECK(f.trace_path == "t.csv");
  CHECK(f.out == "res");

  const auto g = experiment_from_json(json::parse(
      R"({"instance": {"generator": {"n": 4, "family": "lower-bound", "delta": 0.1, "distinguished": 2}},
          "algorithm": "oracle-fixed", "horizon": 10})"));
  CHECK(g.config.instance.utilities() == lower_bound_instance(4, 0.1, 1).utilities());

  const auto inline_inst = experiment_from_json(json::parse(
      R"({"instance": {"n": 1, "utilities": [[0.2]]}, "algorithm": "etc", "horizon": 10,
          "reward_model": "deterministic"})"));
  CHECK(inline_inst.config.instance.reward_family() == RewardFamily::Deterministic);

  CHECK(code_of([] { experiment_from_json(json::parse(R"({"algorithm": "etc", "horizon": 10})")); }) ==
        ErrorCode::ConfigInvalid);
  CHECK(code_of([] {
          experiment_from_json(json::parse(R"({"instance": {"n": 1, "utilities": [[0.2]]}, "algorithm": "etc", "horizon": 1})"));
        }) == ErrorCode::ConfigInvalid);
  CHECK(code_of([] {
          experiment_from_json(json::parse(R"({"instance": {"n": 1, "utilities": [[0.2]]}, "algorithm": "etc", "horizon": "long"})"));
        }) == ErrorCode::ConfigInvalid);
}

TEST_CASE("player snapshot") {
  DecentralizedEtc etc(2, 100);
  const auto inst = validate_instance({{0.1, 0.9}, {0.9, 0.1}}, RewardFamily::Deterministic);
  for (std::uint64_t t = 1; t <= 2; ++t) etc.observe(t, resolve_round(etc.act(t), inst, EpisodeRng(1), t));
  const auto j = snapshot_json(etc.player(0), 2);
  CHECK(j["player"] == 1);
  CHECK(j["phase"] == 1);
  CHECK(j["subphase"] == 1);
  CHECK(j["stage"] == "explore");
  CHECK(j["counts"] == json::parse("[1, 1]"));
  CHECK(j["sigma"].is_null());
  CHECK(j["committed_arm"].is_null());
}
