#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>

#include "dgforge/autotune.hpp"
#include "dgforge/hash.hpp"

namespace dgforge {

std::string TuningKey::str() const {
  std::ostringstream s;
  s << stage_name(stage) << "/N" << order << "/" << precision_name(precision) << "/" << backend << "/g" << granule
    << "/km" << km << "/" << system;
  return s.str();
}

double hash_seconds(const KernelPlan& plan) {
  return 1e-3 * (1.0 + static_cast<double>(fnv1a64(plan.id()) % 1000) / 1000.0);
}

FakeClock fake_clock_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read fake clock file " + path);
  std::map<std::string, double> table;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (auto c = line.find('#'); c != std::string::npos) line.erase(c);
    std::istringstream ls(line);
    std::string id;
    double seconds;
    if (!(ls >> id)) continue;
    if (!(ls >> seconds) || !(seconds > 0)) throw ParseError("bad fake clock entry", n);
    table[id] = seconds;
  }
  return [table](const KernelPlan& plan) {
    auto it = table.find(plan.id());
    return it != table.end() ? it->second : hash_seconds(plan);
  };
}

FakeClock fake_clock_from_env() {
  const char* v = std::getenv("DGFORGE_FAKE_CLOCK");
  if (!v || !*v) return {};
  if (std::string(v) == "hash") return hash_seconds;
  return fake_clock_from_file(v);
}

double gate_tolerance(Precision precision) { return precision == Precision::f64 ? 1e-12 : 1e-6; }

StageWorkload::StageWorkload(Backend& backend, const Discretization& disc, const SystemDefinition& system, Stage stage,
                             Precision precision, unsigned seed)
    : backend_(backend), disc_(disc), system_(system), stage_(stage), precision_(precision) {
  if (stage == Stage::assembly) throw Error("assembly has a single plan and is not tuned");
  std::uint64_t state = seed * 0x9E3779B97F4A7C15ULL + 1;
  auto next = [&] {
    state ^= state << 13;
    state ^= state >> 7;
    state ^= state << 17;
    return static_cast<double>(state >> 11) / 9007199254740992.0 * 2.0 - 1.0;
  };
  for (int c = 0; c < system.num_fields(); ++c) {
    std::vector<double> v(disc.layout.total_words());
    for (auto& x : v) x = next();
    input_.push_back(std::move(v));
  }
}

DgOperator StageWorkload::make_operator(const KernelPlan& plan, const TuneOptions& options) {
  const int F = system_.num_fields();
  const int N = disc_.order();
  StagePlans plans{degenerate_plan(Stage::differentiation, N, precision_, F),
                   degenerate_plan(Stage::lift, N, precision_, F), degenerate_plan(Stage::gather, N, precision_, F)};
  if (stage_ == Stage::differentiation) plans.differentiation = plan;
  if (stage_ == Stage::lift) plans.lift = plan;
  if (stage_ == Stage::gather) plans.gather = plan;
  OperatorOptions oo;
  oo.precision = precision_;
  if (options.source_hook) {
    const Stage target = stage_;
    oo.source_hook = [hook = options.source_hook, target](const KernelPlan& p, KernelSource& s) {
      if (p.stage == target) hook(p, s);
    };
  }
  return DgOperator(backend_, disc_, system_, plans, oo);
}

std::vector<std::vector<double>> StageWorkload::run(const KernelPlan& plan, const TuneOptions& options) {
  DgOperator op = make_operator(plan, options);
  FieldState u = op.allocate_state(), out = op.allocate_state();
  op.upload(u, input_);
  if (stage_ == Stage::lift) {
    op.run_stage(Stage::differentiation, u, out);
    op.run_stage(Stage::gather, u, out);
  }
  op.run_stage(stage_, u, out);
  return stage_ == Stage::lift ? op.download(out) : op.stage_buffers(stage_);
}

double StageWorkload::time(const KernelPlan& plan, const TuneOptions& options) {
  if (options.fake_clock) return options.fake_clock(plan);
  DgOperator op = make_operator(plan, options);
  FieldState u = op.allocate_state(), out = op.allocate_state();
  op.upload(u, input_);
  if (stage_ == Stage::lift) {
    op.run_stage(Stage::differentiation, u, out);
    op.run_stage(Stage::gather, u, out);
  }
  return time_repeated(backend_, [&] { op.run_stage(stage_, u, out); }, options.warmup, options.repetitions).median;
}

std::int64_t StageWorkload::flops() const {
  const WorkModel m = work_model(disc_, system_, precision_);
  switch (stage_) {
    case Stage::differentiation: return static_cast<std::int64_t>(m.diff_flops);
    case Stage::lift: return static_cast<std::int64_t>(m.lift_flops);
    case Stage::gather: return static_cast<std::int64_t>(m.gather_flops);
    case Stage::assembly: return static_cast<std::int64_t>(m.assembly_flops);
  }
  return 0;
}

namespace {

double stage_rel_error(const std::vector<std::vector<double>>& a, const std::vector<std::vector<double>>& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t c = 0; c < b.size(); ++c) {
    for (std::size_t i = 0; i < b[c].size(); ++i) {
      const double d = std::abs(a[c][i] - b[c][i]);
      if (std::isnan(d)) return INFINITY;
      num = std::max(num, d);
      den = std::max(den, std::abs(b[c][i]));
    }
  }
  return den > 0 ? num / den : num;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

PlanMeasurement benchmark_plan(const KernelPlan& plan, StageWorkload& workload,
                               const std::vector<std::vector<double>>& reference, const TuneOptions& options) {
  PlanMeasurement m;
  m.plan = plan;
  try {
    m.max_rel_error = stage_rel_error(workload.run(plan, options), reference);
  } catch (const Error& e) {
    m.failure = e.what();
    return m;
  }
  if (!(m.max_rel_error <= gate_tolerance(plan.precision))) {
    std::ostringstream s;
    s << "relative error " << m.max_rel_error << " against the degenerate plan";
    m.failure = s.str();
    return m;
  }
  m.median_seconds = workload.time(plan, options);
  m.passed = m.median_seconds > 0.0;
  if (!m.passed) m.failure = "non-positive time";
  return m;
}

TuningStudy autotune(const TuningKey& key, const std::vector<KernelPlan>& plans, StageWorkload& workload,
                     const TuneOptions& options) {
  if (plans.empty()) throw Error("autotune: empty plan space");
  TuneOptions clean = options;
  clean.source_hook = nullptr;
  const KernelPlan base = degenerate_plan(key.stage, key.order, key.precision, plans.front().fields);
  const auto reference = workload.run(base, clean);

  TuningStudy study;
  const PlanMeasurement* best = nullptr;
  for (const auto& plan : plans) study.rows.push_back(benchmark_plan(plan, workload, reference, options));
  for (const auto& row : study.rows) {
    if (!row.passed) continue;
    if (!best || row.median_seconds < best->median_seconds ||
        (row.median_seconds == best->median_seconds && row.plan.id() < best->plan.id())) {
      best = &row;
    }
  }
  if (!best) throw Error("autotune: every plan failed the correctness gate for " + key.str());
  study.best = {key, best->plan, best->median_seconds, workload.flops(), utc_timestamp()};
  return study;
}

Mesh tuning_mesh(const Mesh& mesh, int elements_per_block) {
  const std::size_t limit = static_cast<std::size_t>(kTuningMicroblocks) * elements_per_block;
  if (mesh.tets.size() <= limit) return mesh;
  Mesh m;
  m.vertices = mesh.vertices;
  m.tets.assign(mesh.tets.begin(), mesh.tets.begin() + static_cast<std::ptrdiff_t>(limit));
  return m;
}

TuningKey tuning_key(Stage stage, const Discretization& disc, const SystemDefinition& system, Precision precision,
                     const std::string& backend) {
  return {stage, disc.order(), precision, backend, disc.layout.granule, disc.layout.elements_per_block, system.name};
}

void write_study_csv(std::ostream& out, const std::vector<TuningStudy>& studies) {
  out << "stage,plan,N,precision,fields,ws,wi,wp,storage,unroll,faces_per_block,passed,max_rel_error,median_seconds\n";
  for (const auto& study : studies) {
    for (const auto& r : study.rows) {
      const auto& p = r.plan;
      const bool local = p.stage == Stage::differentiation || p.stage == Stage::lift;
      char err[32], sec[32];
      std::snprintf(err, sizeof err, "%.6e", r.max_rel_error);
      std::snprintf(sec, sizeof sec, "%.9e", r.median_seconds);
      out << stage_name(p.stage) << "," << p.id() << "," << p.order << "," << precision_name(p.precision) << ","
          << p.fields << "," << p.decomposition.ws << "," << p.decomposition.wi << "," << p.decomposition.wp << ","
          << (local ? storage_name(p.storage) : "") << "," << (p.unroll ? 1 : 0) << ","
          << (local ? 0 : p.faces_per_block) << "," << (r.passed ? 1 : 0) << "," << err << "," << sec << "\n";
    }
  }
}

}  // namespace dgforge
