#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "cli.hpp"
#include "dgforge/autotune.hpp"
#include "dgforge/physics.hpp"

namespace dgforge::cli {

namespace {

// Problem description shared by run, bench and tune.
struct ProblemFlags {
  std::string case_name = "maxwell-cavity-101";
  int order = 3;
  std::string mesh = "box:4";
  double alpha = 1.0;
  std::string precision = "f64";
  std::string backend;
  std::string tune_cache = kDefaultTuneCache;
  std::string dump_kernels;
  int granule = kDefaultGranule;
  int km_max = kDefaultMicroblockMax;
};

struct RunFlags : ProblemFlags {
  std::optional<int> steps;
  std::optional<double> t_final;
  double dt_factor = 0.25;
  bool tune = false;
  bool no_tune = false;
  std::string plan_diff, plan_lift, plan_gather;
  bool poison = false;
  std::string out = "dgforge-out";
};

void add_problem_flags(CLI::App* app, ProblemFlags& f) {
  app->add_option("--case", f.case_name, "Test problem")
      ->check(CLI::IsMember(solution_names()))
      ->capture_default_str();
  app->add_option("--order", f.order, "Polynomial order N")->check(CLI::Range(kMinOrder, kMaxOrder))->capture_default_str();
  app->add_option("--mesh", f.mesh, "box:N, box:NXxNYxNZ or a mesh file")->capture_default_str();
  app->add_option("--alpha", f.alpha, "Flux upwinding, 0 central to 1 upwind")->capture_default_str();
  app->add_option("--precision", f.precision, "f32 or f64")->check(CLI::IsMember({"f32", "f64"}))->capture_default_str();
  app->add_option("--backend", f.backend, "cpu, interp or device (default: DGFORGE_BACKEND or cpu)")
      ->check(CLI::IsMember({"cpu", "interp", "device"}));
  app->add_option("--tune-cache", f.tune_cache, "Tuning cache file")->capture_default_str();
  app->add_option("--dump-kernels", f.dump_kernels, "Write every generated kernel to this directory");
  app->add_option("--granule", f.granule, "Microblock alignment in words")->check(CLI::PositiveNumber)->capture_default_str();
  app->add_option("--km-max", f.km_max, "Largest elements-per-microblock")->check(CLI::PositiveNumber)->capture_default_str();
}

void add_run_flags(CLI::App* app, RunFlags& f) {
  add_problem_flags(app, f);
  auto* steps = app->add_option("--steps", f.steps, "Number of RK4 steps")->check(CLI::NonNegativeNumber);
  auto* tf = app->add_option("--t-final", f.t_final, "Final time")->check(CLI::PositiveNumber);
  steps->excludes(tf);
  app->add_option("--dt-factor", f.dt_factor, "CFL factor C in dt = C h_min / N^2")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  auto* tune = app->add_flag("--tune", f.tune, "Tune stages missing from the cache");
  auto* no_tune = app->add_flag("--no-tune", f.no_tune, "Ignore the cache, run degenerate plans");
  tune->excludes(no_tune);
  app->add_option("--plan-differentiation", f.plan_diff, "Explicit differentiation plan id");
  app->add_option("--plan-lift", f.plan_lift, "Explicit lift plan id");
  app->add_option("--plan-gather", f.plan_gather, "Explicit gather plan id");
  app->add_flag("--poison-padding", f.poison, "Fill padding with NaN and verify it afterwards");
  app->add_option("--out", f.out, "Output directory")->capture_default_str();
  // Expanded before parsing, see expand_config.
  app->add_option("--config", "Read options from a config.txt written by run");
}

// Replaces "--config FILE" with the file's "key = value" lines as flags,
// placed before the remaining arguments so that those take precedence.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  if (args.empty() || (args[0] != "run" && args[0] != "bench")) return args;
  std::vector<std::string> rest;
  std::string path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (path.empty()) return args;
  std::ifstream in(path);
  if (!in) throw CLI::ValidationError("--config", "cannot read " + path);
  std::vector<std::string> out{args[0]};
  std::string line;
  while (std::getline(in, line)) {
    if (auto c = line.find('#'); c != std::string::npos) line.erase(c);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      if (line.find_first_not_of(" \t\r") != std::string::npos) {
        throw CLI::ValidationError("--config", "malformed line '" + line + "' in " + path);
      }
      continue;
    }
    auto trim = [](std::string v) {
      const auto b = v.find_first_not_of(" \t\r");
      const auto e = v.find_last_not_of(" \t\r");
      v = b == std::string::npos ? "" : v.substr(b, e - b + 1);
      if (v.size() >= 2 && v.front() == '"' && v.back() == '"') v = v.substr(1, v.size() - 2);
      return v;
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (value == "false") continue;
    out.push_back("--" + key);
    if (value != "true") out.push_back(value);
  }
  out.insert(out.end(), rest.begin(), rest.end());
  return out;
}

Mesh resolve_mesh(const std::string& spec) {
  if (spec.rfind("box:", 0) == 0) {
    const std::string dims = spec.substr(4);
    int nx = 0, ny = 0, nz = 0;
    char x1 = 0, x2 = 0;
    std::istringstream in(dims);
    if (dims.find('x') == std::string::npos) {
      in >> nx;
      ny = nz = nx;
    } else {
      in >> nx >> x1 >> ny >> x2 >> nz;
    }
    if (!in || !in.eof() || nx < 1 || ny < 1 || nz < 1 || (x1 && (x1 != 'x' || x2 != 'x'))) {
      throw CLI::ValidationError("--mesh", "expected box:N or box:NXxNYxNZ, got '" + spec + "'");
    }
    return generate_box_mesh(nx, ny, nz);
  }
  return load_mesh(spec);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string sci(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9e", v);
  return buf;
}

// Everything a command needs once the flags are parsed.
struct Problem {
  Solution solution;
  Precision precision;
  std::string backend_name;
  std::unique_ptr<Backend> backend;
  Mesh mesh;
  std::unique_ptr<Discretization> disc;
  std::unique_ptr<Discretization> tuning_disc;
  const ProblemFlags* flags;

  explicit Problem(const ProblemFlags& f)
      : solution(make_solution(f.case_name, f.alpha)),
        precision(parse_precision(f.precision)),
        backend_name(f.backend.empty() ? default_backend_name() : f.backend),
        backend(make_backend(backend_name)),
        mesh(resolve_mesh(f.mesh)),
        flags(&f) {
    disc = std::make_unique<Discretization>(discretize(mesh, f.order, f.granule, f.km_max));
  }

  const Discretization& tuning() {
    if (!tuning_disc) {
      const Mesh m = tuning_mesh(mesh, disc->layout.elements_per_block);
      tuning_disc = std::make_unique<Discretization>(discretize(m, flags->order, flags->granule, flags->km_max));
    }
    return *tuning_disc;
  }

  TuningKey key(Stage stage) const {
    return tuning_key(stage, *disc, solution.system, precision, backend_name);
  }

  TuningStudy tune(Stage stage, const TuneOptions& options) {
    const auto& td = tuning();
    StageWorkload workload(*backend, td, solution.system, stage, precision);
    const auto plans =
        enumerate_plans(stage, flags->order, precision, solution.system.num_fields(), td.layout);
    TuningStudy study = autotune(key(stage), plans, workload, options);
    cache_store(flags->tune_cache, study.best);
    return study;
  }
};

constexpr Stage kTunedStages[] = {Stage::differentiation, Stage::lift, Stage::gather};

StagePlans resolve_plans(Problem& p, const RunFlags& f, std::ostream& log) {
  StagePlans plans;
  TuneOptions options;
  options.fake_clock = fake_clock_from_env();
  for (Stage stage : kTunedStages) {
    const std::string& explicit_id = stage == Stage::differentiation ? f.plan_diff
                                     : stage == Stage::lift           ? f.plan_lift
                                                                      : f.plan_gather;
    std::optional<KernelPlan> plan;
    if (!explicit_id.empty()) {
      plan = KernelPlan::parse(explicit_id);
      if (plan->stage != stage) throw Error("plan " + explicit_id + " is not a " + stage_name(stage) + " plan");
    } else if (!f.no_tune) {
      if (auto rec = cache_load(f.tune_cache, p.key(stage))) {
        plan = rec->plan;
      } else if (f.tune) {
        plan = p.tune(stage, options).best.plan;
        log << "tuned " << stage_name(stage) << ": " << plan->id() << "\n";
      }
    }
    if (stage == Stage::differentiation) plans.differentiation = plan;
    if (stage == Stage::lift) plans.lift = plan;
    if (stage == Stage::gather) plans.gather = plan;
  }
  return plans;
}

struct RunResult {
  int steps = 0;
  double dt = 0.0;
  double wall_seconds = 0.0;
  std::map<Stage, StageCounts> counts;
};

void write_config(const std::string& path, const RunFlags& f, const Problem& p, const DgOperator& op, int steps,
                  double dt) {
  std::ofstream out(path);
  out << "# dgforge run configuration; rerun with: dgforge run --config " << path << "\n";
  out << "case = \"" << f.case_name << "\"\n";
  out << "order = " << f.order << "\n";
  out << "mesh = \"" << f.mesh << "\"\n";
  if (f.t_final) out << "t-final = " << fmt(*f.t_final) << "\n";
  else out << "steps = " << steps << "\n";
  out << "dt-factor = " << fmt(f.dt_factor) << "\n";
  out << "alpha = " << fmt(f.alpha) << "\n";
  out << "precision = \"" << f.precision << "\"\n";
  out << "backend = \"" << p.backend_name << "\"\n";
  out << "granule = " << f.granule << "\n";
  out << "km-max = " << f.km_max << "\n";
  out << "plan-differentiation = \"" << op.plan(Stage::differentiation).id() << "\"\n";
  out << "plan-lift = \"" << op.plan(Stage::lift).id() << "\"\n";
  out << "plan-gather = \"" << op.plan(Stage::gather).id() << "\"\n";
  out << "poison-padding = " << (f.poison ? "true" : "false") << "\n";
  out << "out = \"" << f.out << "\"\n";
  const auto& d = op.discretization();
  out << "# resolved: K = " << d.mesh.num_elements() << ", Np = " << d.refel.np << ", K_M = "
      << d.layout.elements_per_block << ", padded microblock = " << d.layout.padded_size << " words\n";
  out << "# resolved: h_min = " << fmt(d.h_min) << ", dt = " << fmt(dt) << ", steps = " << steps << "\n";
  if (!out) throw Error("cannot write " + path);
}

void write_perf(std::ostream& out, const RunResult& r) {
  out << "stage,launches,flops,bytes,seconds,gflops_per_s,gbytes_per_s\n";
  std::uint64_t flops = 0, bytes = 0, launches = 0;
  auto row = [&](const std::string& name, std::uint64_t l, std::uint64_t fl, std::uint64_t by, double s) {
    const double gf = s > 0 ? static_cast<double>(fl) / s / 1e9 : 0.0;
    const double gb = s > 0 ? static_cast<double>(by) / s / 1e9 : 0.0;
    out << name << "," << l << "," << fl << "," << by << "," << sci(s) << "," << sci(gf) << "," << sci(gb) << "\n";
  };
  for (const auto& [stage, c] : r.counts) {
    row(stage_name(stage), c.launches, c.flops, c.bytes, c.seconds);
    flops += c.flops;
    bytes += c.bytes;
    launches += c.launches;
  }
  row("total", launches, flops, bytes, r.wall_seconds);
}

// Shared by run and bench; `series` receives timeseries rows when non-null.
RunResult simulate(Problem& p, const RunFlags& f, std::ostream& log, std::ostream* series, bool write_cfg) {
  const StagePlans plans = resolve_plans(p, f, log);
  OperatorOptions oo;
  oo.precision = p.precision;
  oo.dump_dir = f.dump_kernels;
  oo.poison_padding = f.poison;
  oo.profile_stages = true;
  DgOperator op(*p.backend, *p.disc, p.solution.system, plans, oo, p.solution.exact);

  const StepController sc = StepController::make(*p.disc, f.dt_factor);
  RunResult r;
  if (f.t_final) {
    r.steps = std::max(1, static_cast<int>(std::ceil(*f.t_final / sc.dt - 1e-9)));
    r.dt = *f.t_final / r.steps;
  } else {
    r.steps = f.steps.value_or(10);
    r.dt = sc.dt;
  }
  if (write_cfg) write_config(f.out + "/config.txt", f, p, op, r.steps, r.dt);

  FieldState u = op.allocate_state();
  op.upload(u, op.interpolate(p.solution.exact, 0.0));
  auto row = [&](int step) {
    if (!series) return;
    *series << step << "," << fmt(u.t) << "," << fmt(op.energy(u)) << "," << fmt(op.l2_error(u, p.solution.exact, u.t))
            << "\n";
  };
  if (series) *series << "step,t,energy,l2_error\n";
  row(0);
  Rk4Workspace work = Rk4Workspace::make(op);
  op.reset_counts();
  for (int s = 1; s <= r.steps; ++s) {
    const auto t0 = std::chrono::steady_clock::now();
    rk4_step(op, u, r.dt, work);
    op.backend().synchronize();
    r.wall_seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!state_is_finite(op, u)) throw Error("NaN detected in state at step " + std::to_string(s));
    row(s);
  }
  if (f.poison && !op.padding_intact()) throw Error("padding words were overwritten");
  r.counts = op.counts();
  return r;
}

int cmd_run(const RunFlags& f, std::ostream& out) {
  std::filesystem::create_directories(f.out);
  Problem p(f);
  std::ofstream series(f.out + "/timeseries.csv");
  RunResult r = simulate(p, f, out, &series, true);
  series.close();
  std::ofstream perf(f.out + "/perf.csv");
  write_perf(perf, r);
  if (!series || !perf) throw Error("cannot write outputs in " + f.out);
  out << "run: " << f.case_name << " N=" << f.order << " K=" << p.disc->mesh.num_elements() << " steps=" << r.steps
      << " dt=" << fmt(r.dt) << " wall=" << sci(r.wall_seconds) << " s\n";
  out << "wrote " << f.out << "/timeseries.csv, perf.csv, config.txt\n";
  return kExitOk;
}

int cmd_bench(RunFlags f, std::ostream& out) {
  if (!f.steps && !f.t_final) f.steps = 100;
  Problem p(f);
  RunResult r = simulate(p, f, out, nullptr, false);
  std::ostringstream table;
  write_perf(table, r);
  out << "bench: " << f.case_name << " N=" << f.order << " K=" << p.disc->mesh.num_elements() << " steps=" << r.steps
      << " backend=" << p.backend_name << " precision=" << f.precision << "\n";
  out << table.str();
  if (!f.out.empty()) {
    std::filesystem::create_directories(f.out);
    std::ofstream perf(f.out + "/perf.csv");
    perf << table.str();
    if (!perf) throw Error("cannot write " + f.out + "/perf.csv");
  }
  return kExitOk;
}

struct TuneFlags : ProblemFlags {
  std::vector<std::string> stages{"differentiation", "lift", "gather"};
  std::string out = ".";
  int warmup = 2;
  int repetitions = 5;
};

int cmd_tune(const TuneFlags& f, std::ostream& out) {
  Problem p(f);
  TuneOptions options;
  options.fake_clock = fake_clock_from_env();
  options.warmup = f.warmup;
  options.repetitions = f.repetitions;
  std::vector<TuningStudy> studies;
  for (const auto& name : f.stages) {
    const Stage stage = parse_stage(name);
    studies.push_back(p.tune(stage, options));
    const auto& s = studies.back();
    int passed = 0;
    double lo = INFINITY, hi = 0;
    for (const auto& r : s.rows) {
      if (!r.passed) continue;
      ++passed;
      lo = std::min(lo, r.median_seconds);
      hi = std::max(hi, r.median_seconds);
    }
    out << name << ": " << s.rows.size() << " plans, " << passed << " passed, best " << s.best.plan.id() << " ("
        << sci(s.best.median_seconds) << " s), max/min time " << fmt(hi / lo) << "\n";
  }
  std::filesystem::create_directories(f.out);
  std::ofstream csv(f.out + "/tuning_study.csv");
  write_study_csv(csv, studies);
  if (!csv) throw Error("cannot write " + f.out + "/tuning_study.csv");
  out << "wrote " << f.out << "/tuning_study.csv; cache " << f.tune_cache << "\n";
  return kExitOk;
}

struct PartitionFlags {
  std::string mesh = "box:4";
  std::vector<int> capacities;
  std::string out;
};

int cmd_partition_stats(const PartitionFlags& f, std::ostream& out) {
  const Mesh mesh = resolve_mesh(f.mesh);
  const auto refel = build_reference_element(1);
  const auto conn = build_connectivity(mesh, refel);
  const int K = mesh.num_elements();
  std::vector<int> caps = f.capacities;
  if (caps.empty()) {
    for (int c : {1, 2, 4, 8, 16, 24, 32, 64}) {
      if (c < K) caps.push_back(c);
    }
    caps.push_back(K);
  }
  std::ostringstream table;
  table << "capacity,blocks,greedy_interior_ratio,contiguous_interior_ratio\n";
  for (int c : caps) {
    if (c < 1) throw CLI::ValidationError("--capacities", "capacities must be positive");
    const auto g = greedy_partition(conn, K, c);
    const auto b = contiguous_partition(conn, K, c);
    table << c << "," << g.blocks.size() << "," << fmt(g.interior_ratio) << "," << fmt(b.interior_ratio) << "\n";
  }
  out << table.str();
  if (!f.out.empty()) {
    std::ofstream file(f.out);
    file << table.str();
    if (!file) throw Error("cannot write " + f.out);
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"dgforge: nodal DG solver with run-time kernel generation and autotuning", "dgforge"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  RunFlags run_flags;
  auto* run_cmd = app.add_subcommand("run", "Run a test case; writes timeseries.csv, perf.csv, config.txt");
  add_run_flags(run_cmd, run_flags);

  RunFlags bench_flags;
  bench_flags.out.clear();
  auto* bench_cmd = app.add_subcommand("bench", "Timed run (100 steps by default) with per-stage rates");
  add_run_flags(bench_cmd, bench_flags);

  TuneFlags tune_flags;
  auto* tune_cmd = app.add_subcommand("tune", "Exhaustive plan study per stage; writes tuning_study.csv");
  add_problem_flags(tune_cmd, tune_flags);
  tune_cmd->add_option("--stages", tune_flags.stages, "Stages to tune")
      ->check(CLI::IsMember({"differentiation", "lift", "gather"}))
      ->capture_default_str();
  tune_cmd->add_option("--out", tune_flags.out, "Directory for tuning_study.csv")->capture_default_str();
  tune_cmd->add_option("--warmup", tune_flags.warmup, "Untimed runs per plan")->check(CLI::NonNegativeNumber);
  tune_cmd->add_option("--repetitions", tune_flags.repetitions, "Timed runs per plan")->check(CLI::PositiveNumber);

  PartitionFlags part_flags;
  auto* part_cmd = app.add_subcommand("partition-stats", "Interior-face ratio of gather partitions by capacity");
  part_cmd->add_option("--mesh", part_flags.mesh, "box:N or a mesh file")->capture_default_str();
  part_cmd->add_option("--capacities", part_flags.capacities, "Block capacities")->delimiter(',');
  part_cmd->add_option("--out", part_flags.out, "Also write the table to this CSV file");

  int refel_order = 3;
  std::string refel_out = "refelem.txt";
  auto* refel_cmd = app.add_subcommand("refelem", "Dump the reference-element matrices");
  refel_cmd->add_option("--order", refel_order, "Polynomial order N")->check(CLI::Range(kMinOrder, kMaxOrder));
  refel_cmd->add_option("--out", refel_out, "Output file")->capture_default_str();

  std::string flux_case = "maxwell-cavity-101";
  double flux_alpha = 1.0;
  auto* flux_cmd = app.add_subcommand("flux", "Print the lowered flux assignments of a case");
  flux_cmd->add_option("--case", flux_case, "Test problem")->check(CLI::IsMember(solution_names()));
  flux_cmd->add_option("--alpha", flux_alpha, "Flux upwinding");

  try {
    std::vector<std::string> argv_store{"dgforge"};
    const auto expanded = expand_config(args);
    argv_store.insert(argv_store.end(), expanded.begin(), expanded.end());
    std::vector<char*> argv;
    for (auto& a : argv_store) argv.push_back(a.data());
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (*run_cmd) return cmd_run(run_flags, out);
    if (*bench_cmd) return cmd_bench(bench_flags, out);
    if (*tune_cmd) return cmd_tune(tune_flags, out);
    if (*part_cmd) return cmd_partition_stats(part_flags, out);
    if (*refel_cmd) {
      dump_reference_element(build_reference_element(refel_order), refel_out);
      out << "wrote " << refel_out << "\n";
      return kExitOk;
    }
    if (*flux_cmd) {
      const auto lowered = flux::lower(make_solution(flux_case, flux_alpha).system.flux);
      out << flux::dump(lowered);
      out << "# " << lowered.outputs.size() << " outputs, " << lowered.temporaries.size() << " temporaries, "
          << lowered.flop_count() << " flops per evaluation\n";
      return kExitOk;
    }
  } catch (const CLI::ValidationError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace dgforge::cli
