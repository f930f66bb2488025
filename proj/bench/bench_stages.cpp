// Stage throughput: generated kernels on the OpenMP backend vs the serial
// interpreter vs a plain host loop (differentiation only).

#include <benchmark/benchmark.h>

#include "dgforge/physics.hpp"

using namespace dgforge;

namespace {

struct Setup {
  Discretization disc;
  std::unique_ptr<Backend> backend;
  std::unique_ptr<DgOperator> op;
  FieldState u, out;

  Setup(const std::string& backend_name, int order, int n)
      : disc(discretize(generate_box_mesh(n, n, n), order)), backend(make_backend(backend_name)) {
    auto sol = make_solution("maxwell-cavity-101");
    op = std::make_unique<DgOperator>(*backend, disc, sol.system, StagePlans{}, OperatorOptions{}, sol.exact);
    u = op->allocate_state();
    out = op->allocate_state();
    op->upload(u, op->interpolate(sol.exact, 0.1));
  }
};

std::uint64_t stage_flops(const WorkModel& m, Stage s) {
  switch (s) {
    case Stage::differentiation: return m.diff_flops;
    case Stage::lift: return m.lift_flops;
    case Stage::gather: return m.gather_flops;
    default: return 0;
  }
}

void run_stage(benchmark::State& state, const std::string& backend) {
  const auto stage = static_cast<Stage>(state.range(0));
  Setup s(backend, static_cast<int>(state.range(1)), static_cast<int>(state.range(2)));
  // lift reads the buffers the other two stages fill
  s.op->run_stage(Stage::differentiation, s.u, s.out);
  s.op->run_stage(Stage::gather, s.u, s.out);
  s.backend->synchronize();
  for (auto _ : state) {
    s.op->run_stage(stage, s.u, s.out);
    s.backend->synchronize();
  }
  state.SetLabel(stage_name(stage));
  state.counters["flops"] = benchmark::Counter(static_cast<double>(stage_flops(s.op->model(), stage)),
                                               benchmark::Counter::kIsIterationInvariantRate);
}

void BM_Native(benchmark::State& state) { run_stage(state, "cpu"); }
void BM_Interp(benchmark::State& state) { run_stage(state, "interp"); }

// Differentiation with Eigen on the host: same arithmetic, no generated code.
void BM_HostDifferentiation(benchmark::State& state) {
  const int order = static_cast<int>(state.range(1)), n = static_cast<int>(state.range(2));
  Setup s("cpu", order, n);
  const auto& disc = s.disc;
  const auto& terms = s.op->system().volume_terms;
  const int np = disc.refel.np, K = disc.layout.num_elements;
  auto host = s.op->download(s.u);
  std::vector<std::vector<double>> out(host.size(), std::vector<double>(host[0].size()));
  Vector dr(np);
  for (auto _ : state) {
    for (auto& o : out) std::fill(o.begin(), o.end(), 0.0);
    for (int k = 0; k < K; ++k) {
      const auto off = disc.layout.dof_index(k, 0);
      const auto& g = disc.geo.drdx[k];
      for (const auto& t : terms) {
        Eigen::Map<const Vector> uk(host[t.field].data() + off, np);
        Eigen::Map<Vector> ok(out[t.out].data() + off, np);
        dr.setZero();
        for (int mu = 0; mu < 3; ++mu) dr += g[3 * mu + t.axis] * (disc.refel.diff[mu] * uk);
        ok += t.coef * dr;
      }
    }
    benchmark::DoNotOptimize(out.data());
  }
  state.SetLabel("host differentiation");
}

const int kDiff = static_cast<int>(Stage::differentiation), kLift = static_cast<int>(Stage::lift),
          kGather = static_cast<int>(Stage::gather);

}  // namespace

// args: stage, order, box cells per side
BENCHMARK(BM_Native)->ArgsProduct({{kDiff, kLift, kGather}, {2, 4}, {4}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Interp)->ArgsProduct({{kDiff, kLift, kGather}, {2}, {2}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Native)->ArgsProduct({{kDiff, kLift, kGather}, {2}, {2}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_HostDifferentiation)->ArgsProduct({{kDiff}, {2, 4}, {2, 4}})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
