#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dgforge/codegen.hpp"
#include "dgforge/physics.hpp"

namespace dgforge {

/// What a tuned plan may be reused for. `system` keeps Maxwell and
/// advection plans apart since their field counts differ.
struct TuningKey {
  Stage stage = Stage::differentiation;
  int order = 1;
  Precision precision = Precision::f64;
  std::string backend;
  int granule = kDefaultGranule;
  int km = 1;
  std::string system;

  std::string str() const;
  bool operator==(const TuningKey&) const = default;
};

struct TuningRecord {
  TuningKey key;
  KernelPlan plan;
  double median_seconds = 0.0;
  std::int64_t flops = 0;
  std::string timestamp;

  bool operator==(const TuningRecord&) const = default;
};

/// One row of a tuning study.
struct PlanMeasurement {
  KernelPlan plan;
  bool passed = false;
  double max_rel_error = 0.0;
  double median_seconds = 0.0;   // 0 for disqualified plans
  std::string failure;
};

struct TuningStudy {
  TuningRecord best;
  std::vector<PlanMeasurement> rows;  // enumeration order
};

/// Seconds charged to a plan instead of measuring it.
using FakeClock = std::function<double(const KernelPlan&)>;

/// DGFORGE_FAKE_CLOCK: "hash" gives each plan a pseudo-time derived from its
/// id; any other value names a file of "plan_id seconds" lines (plans not
/// listed fall back to the hash time). Unset: empty.
FakeClock fake_clock_from_env();
FakeClock fake_clock_from_file(const std::string& path);
double hash_seconds(const KernelPlan& plan);

struct TuneOptions {
  int warmup = 2;
  int repetitions = 5;
  FakeClock fake_clock;
  std::function<void(const KernelPlan&, KernelSource&)> source_hook;
  unsigned seed = 1;
};

/// Fixed amount of one stage's work on random fields over `disc`; every
/// plan of the stage computes the same thing.
class StageWorkload {
 public:
  StageWorkload(Backend& backend, const Discretization& disc, const SystemDefinition& system, Stage stage,
                Precision precision, unsigned seed = 1);

  /// Stage output of one launch with `plan`.
  std::vector<std::vector<double>> run(const KernelPlan& plan, const TuneOptions& options);
  /// Median seconds of the stage launch with `plan` (fake clock if set).
  double time(const KernelPlan& plan, const TuneOptions& options);

  Stage stage() const { return stage_; }
  std::int64_t flops() const;

 private:
  DgOperator make_operator(const KernelPlan& plan, const TuneOptions& options);

  Backend& backend_;
  const Discretization& disc_;
  SystemDefinition system_;
  Stage stage_;
  Precision precision_;
  std::vector<std::vector<double>> input_;
};

/// Correctness gate (against the degenerate plan) then timing.
PlanMeasurement benchmark_plan(const KernelPlan& plan, StageWorkload& workload,
                               const std::vector<std::vector<double>>& reference, const TuneOptions& options);

/// Exhaustive search: argmin median time over plans passing the gate, ties
/// to the smallest plan id.
TuningStudy autotune(const TuningKey& key, const std::vector<KernelPlan>& plans, StageWorkload& workload,
                     const TuneOptions& options = {});

/// Relative tolerance of the correctness gate.
double gate_tolerance(Precision precision);

/// Tuning mesh: the problem mesh truncated to at most 512 microblocks.
Mesh tuning_mesh(const Mesh& mesh, int elements_per_block);
inline constexpr int kTuningMicroblocks = 512;

TuningKey tuning_key(Stage stage, const Discretization& disc, const SystemDefinition& system, Precision precision,
                     const std::string& backend);

// Cache: one JSON record per line, latest record per key wins.
inline const std::string kDefaultTuneCache = ".dgforge-tune";

void cache_store(const std::string& path, const TuningRecord& record);
/// Corrupt lines are skipped with a message on `warnings` (stderr if null).
std::optional<TuningRecord> cache_load(const std::string& path, const TuningKey& key, std::ostream* warnings = nullptr);

std::string record_to_json(const TuningRecord& record);
TuningRecord record_from_json(const std::string& line);

/// Study rows with plan parameters and median_seconds, header first.
void write_study_csv(std::ostream& out, const std::vector<TuningStudy>& studies);

}  // namespace dgforge
