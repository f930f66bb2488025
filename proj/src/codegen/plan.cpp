#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dgforge/codegen.hpp"
#include "dgforge/hash.hpp"

namespace dgforge {

const char* stage_name(Stage s) {
  switch (s) {
    case Stage::differentiation: return "differentiation";
    case Stage::lift: return "lift";
    case Stage::gather: return "gather";
    case Stage::assembly: return "assembly";
  }
  return "?";
}

const char* storage_name(Storage s) {
  switch (s) {
    case Storage::stream_all: return "stream_all";
    case Storage::matrix_in_shared: return "matrix_in_shared";
    case Storage::fields_in_shared: return "fields_in_shared";
    case Storage::row_partition_in_shared: return "row_partition_in_shared";
    case Storage::mixed: return "mixed";
  }
  return "?";
}

const char* precision_name(Precision p) { return p == Precision::f32 ? "f32" : "f64"; }

Stage parse_stage(const std::string& s) {
  for (Stage v : {Stage::differentiation, Stage::lift, Stage::gather, Stage::assembly}) {
    if (s == stage_name(v)) return v;
  }
  throw Error("unknown stage '" + s + "'");
}

Storage parse_storage(const std::string& s) {
  for (Storage v : {Storage::stream_all, Storage::matrix_in_shared, Storage::fields_in_shared,
                    Storage::row_partition_in_shared, Storage::mixed}) {
    if (s == storage_name(v)) return v;
  }
  throw Error("unknown storage strategy '" + s + "'");
}

Precision parse_precision(const std::string& s) {
  if (s == "f32" || s == "single") return Precision::f32;
  if (s == "f64" || s == "double") return Precision::f64;
  throw Error("unknown precision '" + s + "' (expected f32 or f64)");
}

std::string KernelPlan::id() const {
  std::ostringstream s;
  s << stage_name(stage) << "/N" << order << "/" << precision_name(precision) << "/F" << fields;
  if (stage == Stage::differentiation || stage == Stage::lift) {
    s << "/ws" << decomposition.ws << ".wi" << decomposition.wi << ".wp" << decomposition.wp << "/"
      << storage_name(storage) << "/" << (unroll ? "unrolled" : "loop");
  } else if (stage == Stage::gather) {
    s << "/fpb" << faces_per_block;
  }
  return s.str();
}

KernelPlan KernelPlan::parse(const std::string& id) {
  std::vector<std::string> parts;
  std::stringstream in(id);
  for (std::string p; std::getline(in, p, '/');) parts.push_back(p);
  auto fail = [&]() -> KernelPlan { throw Error("malformed plan id '" + id + "'"); };
  if (parts.size() < 4 || parts[1].size() < 2 || parts[3].size() < 2) return fail();
  KernelPlan plan;
  try {
    plan.stage = parse_stage(parts[0]);
    plan.order = std::stoi(parts[1].substr(1));
    plan.precision = parse_precision(parts[2]);
    plan.fields = std::stoi(parts[3].substr(1));
    if (plan.stage == Stage::differentiation || plan.stage == Stage::lift) {
      if (parts.size() != 7) return fail();
      auto& d = plan.decomposition;
      if (std::sscanf(parts[4].c_str(), "ws%d.wi%d.wp%d", &d.ws, &d.wi, &d.wp) != 3) return fail();
      plan.storage = parse_storage(parts[5]);
      if (parts[6] != "unrolled" && parts[6] != "loop") return fail();
      plan.unroll = parts[6] == "unrolled";
    } else if (plan.stage == Stage::gather) {
      if (parts.size() != 5 || parts[4].rfind("fpb", 0) != 0) return fail();
      plan.faces_per_block = std::stoi(parts[4].substr(3));
    } else if (parts.size() != 4) {
      return fail();
    }
  } catch (const std::invalid_argument&) {
    return fail();
  } catch (const std::out_of_range&) {
    return fail();
  }
  if (plan.id() != id) return fail();
  return plan;
}

KernelPlan degenerate_plan(Stage stage, int order, Precision precision, int fields) {
  KernelPlan p;
  p.stage = stage;
  p.order = order;
  p.precision = precision;
  p.fields = fields;
  return p;
}

namespace {

// Words each lane's element row reads from the input vector (np or 4*nfp) and matrix count.
int input_width(const KernelPlan& plan) {
  return plan.stage == Stage::lift ? 4 * face_node_count(plan.order) : volume_node_count(plan.order);
}

int matrix_count(const KernelPlan& plan) { return plan.stage == Stage::differentiation ? 3 : 1; }

}  // namespace

std::int64_t estimate_onchip(const KernelPlan& plan, const MicroblockLayout& layout) {
  if (plan.stage != Stage::differentiation && plan.stage != Stage::lift) return 0;
  const std::int64_t w = word_bytes(plan.precision);
  const std::int64_t np = volume_node_count(plan.order);
  const std::int64_t width = input_width(plan);
  const std::int64_t mats = matrix_count(plan);
  const std::int64_t staged = static_cast<std::int64_t>(plan.fields) * layout.elements_per_block *
                              plan.decomposition.wp * plan.decomposition.wi * width * w;
  switch (plan.storage) {
    case Storage::stream_all: return 0;
    case Storage::matrix_in_shared: return mats * np * width * w;
    case Storage::fields_in_shared: return staged;
    case Storage::row_partition_in_shared: return mats * row_partition_rows(np) * width * w;
    case Storage::mixed: return mats * row_partition_rows(np) * width * w + staged;
  }
  return 0;
}

int plan_lanes(const KernelPlan& plan, const MicroblockLayout& layout) {
  switch (plan.stage) {
    case Stage::differentiation:
    case Stage::lift: return plan.decomposition.wp * layout.elements_per_block * volume_node_count(plan.order);
    case Stage::gather: return plan.faces_per_block * face_node_count(plan.order);
    case Stage::assembly: return kAssemblyLanes;
  }
  return 1;
}

std::int64_t plan_groups(const KernelPlan& plan, const MicroblockLayout& layout, std::int64_t face_slots) {
  switch (plan.stage) {
    case Stage::differentiation:
    case Stage::lift: {
      const std::int64_t per = plan.decomposition.microblocks();
      return (layout.num_microblocks + per - 1) / per;
    }
    case Stage::gather: return (face_slots + plan.faces_per_block - 1) / plan.faces_per_block;
    case Stage::assembly: return (layout.total_words() + kAssemblyLanes - 1) / kAssemblyLanes;
  }
  return 0;
}

std::vector<KernelPlan> enumerate_plans(Stage stage, int order, Precision precision, int fields,
                                        const MicroblockLayout& layout, const PlanLimits& limits) {
  std::vector<KernelPlan> plans;
  const KernelPlan base = degenerate_plan(stage, order, precision, fields);
  if (stage == Stage::differentiation || stage == Stage::lift) {
    std::vector<Storage> storages{Storage::stream_all, Storage::matrix_in_shared, Storage::fields_in_shared,
                                  Storage::row_partition_in_shared};
    if (limits.include_mixed) storages.push_back(Storage::mixed);
    for (Storage storage : storages) {
      for (bool unroll : limits.unroll_values) {
        for (int ws : limits.ws_values) {
          for (int wi : limits.wi_values) {
            for (int wp : limits.wp_values) {
              KernelPlan p = base;
              p.storage = storage;
              p.unroll = unroll;
              p.decomposition = {ws, wi, wp};
              if (p == base) continue;
              if (ws * wi * wp > limits.max_microblocks) continue;
              if (plan_lanes(p, layout) > limits.max_lanes) continue;
              if (estimate_onchip(p, layout) > limits.onchip_bytes) continue;
              plans.push_back(p);
            }
          }
        }
      }
    }
  } else if (stage == Stage::gather) {
    for (int fpb : limits.faces_per_block) {
      KernelPlan p = base;
      p.faces_per_block = fpb;
      if (p == base) continue;
      if (plan_lanes(p, layout) > limits.max_lanes) continue;
      plans.push_back(p);
    }
  }
  plans.insert(plans.begin(), base);
  return plans;
}

std::string dump_kernel(const KernelSource& source, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::string path = dir + "/" + source.entry + "-" + hex64(fnv1a64(source.text)) + ".dgk";
  std::ofstream out(path);
  out << source.text;
  if (!out) throw Error("cannot write " + path);
  return path;
}

}  // namespace dgforge
