#include <fstream>
#include <iostream>

#include <json.hpp>

#include "dgforge/autotune.hpp"

namespace dgforge {

using nlohmann::json;

std::string record_to_json(const TuningRecord& r) {
  json j;
  j["stage"] = stage_name(r.key.stage);
  j["N"] = r.key.order;
  j["precision"] = precision_name(r.key.precision);
  j["backend"] = r.key.backend;
  j["granule"] = r.key.granule;
  j["K_M"] = r.key.km;
  j["system"] = r.key.system;
  j["plan"] = r.plan.id();
  j["median_seconds"] = r.median_seconds;
  j["flops"] = r.flops;
  j["timestamp"] = r.timestamp;
  return j.dump();
}

TuningRecord record_from_json(const std::string& line) {
  try {
    const json j = json::parse(line);
    TuningRecord r;
    r.key.stage = parse_stage(j.at("stage").get<std::string>());
    r.key.order = j.at("N").get<int>();
    r.key.precision = parse_precision(j.at("precision").get<std::string>());
    r.key.backend = j.at("backend").get<std::string>();
    r.key.granule = j.at("granule").get<int>();
    r.key.km = j.at("K_M").get<int>();
    r.key.system = j.at("system").get<std::string>();
    r.plan = KernelPlan::parse(j.at("plan").get<std::string>());
    r.median_seconds = j.at("median_seconds").get<double>();
    r.flops = j.at("flops").get<std::int64_t>();
    r.timestamp = j.at("timestamp").get<std::string>();
    if (r.plan.stage != r.key.stage || r.plan.order != r.key.order || r.plan.precision != r.key.precision) {
      throw Error("plan does not match its key");
    }
    if (!(r.median_seconds > 0)) throw Error("non-positive median_seconds");
    return r;
  } catch (const json::exception& e) {
    throw Error(std::string("bad tuning record: ") + e.what());
  }
}

void cache_store(const std::string& path, const TuningRecord& record) {
  std::ofstream out(path, std::ios::app);
  if (!out) throw Error("cannot write tuning cache " + path);
  out << record_to_json(record) << "\n";
  if (!out) throw Error("cannot write tuning cache " + path);
}

std::optional<TuningRecord> cache_load(const std::string& path, const TuningKey& key, std::ostream* warnings) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  std::ostream& warn = warnings ? *warnings : std::cerr;
  std::optional<TuningRecord> found;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      TuningRecord r = record_from_json(line);
      if (r.key == key) found = r;
    } catch (const Error& e) {
      warn << "warning: " << path << ":" << n << ": skipping corrupt tuning record (" << e.what() << ")\n";
    }
  }
  return found;
}

}  // namespace dgforge
