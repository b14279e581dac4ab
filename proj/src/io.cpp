#include "hmbandit/io.hpp"

#include <filesystem>
#include <fstream>

namespace hmb {

namespace {

template <class T>
T field(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) throw Error(ErrorCode::ConfigInvalid, std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigInvalid, std::string("field '") + key + "': " + e.what());
  }
}

}  // namespace

nlohmann::ordered_json instance_to_json(const MarketInstance& instance) {
  nlohmann::ordered_json j;
  j["n"] = instance.size();
  j["utilities"] = instance.utilities().rows();
  j["reward_model"] = std::string(to_string(instance.reward_family()));
  return j;
}

MarketInstance instance_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::ConfigInvalid, "instance must be a JSON object");
  const auto rows = field<std::vector<std::vector<double>>>(j, "utilities");
  if (j.contains("n") && field<std::size_t>(j, "n") != rows.size()) {
    throw Error(ErrorCode::NonSquare, "field 'n' disagrees with the number of utility rows");
  }
  const RewardFamily family = j.contains("reward_model")
                                  ? reward_family_from_string(field<std::string>(j, "reward_model"))
                                  : RewardFamily::Gaussian;
  return validate_instance(rows, family);
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(f);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigInvalid, "'" + path + "': " + e.what());
  }
}

MarketInstance load_instance(const std::string& path) { return instance_from_json(read_json_file(path)); }

void save_instance(const MarketInstance& instance, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::Io, "cannot open '" + path + "' for writing");
  f << instance_to_json(instance).dump(2) << '\n';
  if (!f) throw Error(ErrorCode::Io, "failed writing '" + path + "'");
}

nlohmann::json matching_to_json(const Matching& matching) {
  auto j = nlohmann::json::array();
  for (Index a : matching.arm_of) j.push_back(a + 1);
  return j;
}

Matching matching_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw Error(ErrorCode::ConfigInvalid, "matching must be a JSON array");
  Matching m;
  for (const auto& v : j) {
    if (!v.is_number_integer()) throw Error(ErrorCode::ConfigInvalid, "arm indices must be integers");
    const auto a = v.get<long long>();
    if (a < 1) throw Error(ErrorCode::ConfigInvalid, "arm indices are 1-based");
    m.arm_of.push_back(static_cast<Index>(a - 1));
  }
  return m;
}

GeneratorConfig generator_from_json(const nlohmann::json& j) {
  GeneratorConfig g;
  g.n = field<std::size_t>(j, "n");
  if (j.contains("family")) g.family = generator_family_from_string(field<std::string>(j, "family"));
  if (j.contains("delta_floor")) g.delta_floor = field<double>(j, "delta_floor");
  if (j.contains("delta")) g.delta = field<double>(j, "delta");
  if (j.contains("distinguished")) {
    const auto d = field<std::size_t>(j, "distinguished");
    if (d < 1) throw Error(ErrorCode::ConfigInvalid, "distinguished player is 1-based");
    g.distinguished = d - 1;
  }
  if (j.contains("reward_model")) g.reward = reward_family_from_string(field<std::string>(j, "reward_model"));
  if (j.contains("seed")) g.seed = field<std::uint64_t>(j, "seed");
  return g;
}

ExperimentFile experiment_from_json(const nlohmann::json& j, const std::string& base_dir) {
  namespace fs = std::filesystem;
  ExperimentFile out;
  auto& c = out.config;
  if (!j.is_object() || !j.contains("instance")) {
    throw Error(ErrorCode::ConfigInvalid, "missing field 'instance'");
  }
  const auto& src = j.at("instance");
  if (src.is_string()) {
    fs::path p = src.get<std::string>();
    if (p.is_relative()) p = fs::path(base_dir) / p;
    c.instance = load_instance(p.string());
    c.instance_id = fs::path(src.get<std::string>()).stem().string();
  } else if (src.is_object() && src.contains("generator")) {
    const auto g = generator_from_json(src.at("generator"));
    c.instance = generate(g);
    c.instance_id = std::string(to_string(g.family)) + "-n" + std::to_string(g.n);
  } else {
    c.instance = instance_from_json(src);
  }
  if (j.contains("instance_id")) c.instance_id = field<std::string>(j, "instance_id");
  if (j.contains("reward_model")) {
    c.instance = c.instance.with_reward_family(reward_family_from_string(field<std::string>(j, "reward_model")));
  }
  c.algorithm = algorithm_from_string(field<std::string>(j, "algorithm"));
  c.horizon = field<std::uint64_t>(j, "horizon");
  if (j.contains("seeds")) c.seeds = field<std::vector<std::uint64_t>>(j, "seeds");
  if (j.contains("trace")) {
    const auto& t = j.at("trace");
    if (t.is_boolean()) {
      c.trace = t.get<bool>();
    } else {
      if (!t.is_string()) throw Error(ErrorCode::ConfigInvalid, "field 'trace' must be a flag or a path");
      c.trace = true;
      out.trace_path = t.get<std::string>();
    }
  }
  if (j.contains("checkpoints")) c.checkpoints = field<std::vector<std::uint64_t>>(j, "checkpoints");
  if (j.contains("threads")) c.threads = field<unsigned>(j, "threads");
  if (j.contains("out")) out.out = field<std::string>(j, "out");
  validate(c);
  return out;
}

nlohmann::ordered_json snapshot_json(const EtcPlayer& p, std::uint64_t t) {
  nlohmann::ordered_json j;
  j["player"] = p.id() + 1;
  j["round"] = t;
  const bool phase2 = p.in_phase2(t);
  j["phase"] = phase2 ? 2 : 1;
  if (!phase2 && t >= 1) {
    const Schedule s = schedule_of(t, p.stats().size());
    j["subphase"] = s.subphase;
    j["stage"] = s.stage == Stage::Explore ? "explore" : "communicate";
    j["offset"] = s.offset;
  }
  j["means"] = p.stats().mean;
  j["counts"] = p.stats().count;
  j["ranking_certified"] = p.ranking_certified();
  if (p.sigma()) {
    std::vector<Index> order;
    for (Index a : p.sigma()->order) order.push_back(a + 1);
    j["sigma"] = order;
  } else {
    j["sigma"] = nullptr;
  }
  j["phase1_end"] = p.phase1_end() ? nlohmann::ordered_json(*p.phase1_end()) : nlohmann::ordered_json();
  j["available"] = p.available();
  j["epoch"] = p.epoch();
  j["proposed_this_epoch"] = p.proposed_this_epoch();
  j["predecessor"] = p.predecessor() ? nlohmann::ordered_json(*p.predecessor() + 1) : nlohmann::ordered_json();
  j["committed_arm"] =
      p.committed_arm() ? nlohmann::ordered_json(*p.committed_arm() + 1) : nlohmann::ordered_json();
  return j;
}

}  // namespace hmb
