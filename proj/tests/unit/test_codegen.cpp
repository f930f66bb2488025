#include <set>

#include "doctest.h"
#include "support.hpp"

using namespace dgforge;

namespace {

MicroblockLayout layout_for(const ReferenceElement& refel, int elements) {
  return choose_microblock(refel.np, kDefaultGranule, kDefaultMicroblockMax, elements);
}

// Host oracle: out[o] = sum of coef * sum_mu drdx[3mu+nu] * (D^mu u_f).
std::vector<std::vector<double>> host_differentiation(const ReferenceElement& refel, const MicroblockLayout& layout,
                                                      const LocalKernelSpec& spec,
                                                      const std::vector<std::vector<double>>& u,
                                                      const std::vector<double>& geo) {
  std::vector<std::vector<double>> out(spec.num_outputs, std::vector<double>(layout.total_words(), 0.0));
  for (int k = 0; k < layout.num_elements; ++k) {
    for (const auto& t : spec.terms) {
      Eigen::VectorXd uk(refel.np);
      for (int i = 0; i < refel.np; ++i) uk[i] = u[t.field][layout.dof_index(k, i)];
      Eigen::VectorXd d = Eigen::VectorXd::Zero(refel.np);
      for (int mu = 0; mu < 3; ++mu) d += geo[9 * k + 3 * mu + t.axis] * (refel.diff[mu] * uk);
      for (int i = 0; i < refel.np; ++i) out[t.out][layout.dof_index(k, i)] += t.coef * d[i];
    }
  }
  return out;
}

struct DiffRun {
  std::vector<std::vector<double>> out;
  std::uint64_t flops = 0;
};

DiffRun run_differentiation(Backend& be, const KernelPlan& plan, const ReferenceElement& refel,
                            const MicroblockLayout& layout, const LocalKernelSpec& spec,
                            const std::vector<std::vector<double>>& u, const std::vector<double>& geo) {
  const ScalarType st = scalar_type(plan.precision);
  KernelSource src = generate_local_kernel(plan, refel, layout, spec);
  auto kernel = be.compile(src);
  std::vector<KernelArg> args;
  std::vector<BufferPtr> outs;
  for (const auto& f : u) {
    auto b = be.allocate(st, f.size());
    be.write(b, f);
    args.push_back(b);
  }
  for (int o = 0; o < spec.num_outputs; ++o) {
    auto b = be.allocate(st, layout.total_words());
    be.write(b, std::vector<double>(layout.total_words(), 0.0));
    outs.push_back(b);
    args.push_back(b);
  }
  auto g = be.allocate(st, geo.size());
  be.write(g, geo);
  args.push_back(g);
  if (!plan.unroll) {
    auto words = local_matrix_words(Stage::differentiation, refel, spec);
    auto m = be.allocate(st, words.size());
    be.write(m, words);
    args.push_back(m);
    args.push_back(std::int64_t{refel.np});
  }
  args.push_back(std::int64_t{layout.num_elements});
  be.reset_flops();
  be.launch(kernel, plan_groups(plan, layout), args);
  be.synchronize();
  DiffRun r;
  r.flops = be.flops();
  for (auto& b : outs) r.out.push_back(be.read(b));
  return r;
}

}  // namespace

TEST_CASE("differentiation plans match the host oracle") {
  const int order = 3;
  auto refel = build_reference_element(order);
  const int K = 13;
  auto layout = layout_for(refel, K);
  LocalKernelSpec spec;
  spec.num_inputs = 2;
  spec.num_outputs = 2;
  spec.terms = {{0, 1, 2, 1.0}, {0, 0, 1, -1.0}, {1, 0, 0, 0.5}};
  std::vector<std::vector<double>> u{test::random_field(layout, 1), test::random_field(layout, 2)};
  auto geo = test::random_vector(9 * K, 3);
  auto expect = host_differentiation(refel, layout, spec, u, geo);

  auto interp = make_interp_backend();
  auto plans = enumerate_plans(Stage::differentiation, order, Precision::f64, 2, layout);
  CHECK(plans.size() > 10);
  for (const auto& plan : plans) {
    CAPTURE(plan.id());
    auto r = run_differentiation(*interp, plan, refel, layout, spec, u, geo);
    for (int o = 0; o < 2; ++o) CHECK(test::max_rel_diff(r.out[o], expect[o]) < 1e-12);
  }
}

namespace {

std::vector<std::vector<double>> run_lift(Backend& be, const KernelPlan& plan, const ReferenceElement& refel,
                                          const MicroblockLayout& layout, const LocalKernelSpec& spec,
                                          const std::vector<std::vector<double>>& facial,
                                          const std::vector<std::vector<double>>& vol, const std::vector<double>& invj) {
  const ScalarType st = scalar_type(plan.precision);
  auto kernel = be.compile(generate_local_kernel(plan, refel, layout, spec));
  std::vector<KernelArg> args;
  auto upload = [&](const std::vector<double>& v) {
    auto b = be.allocate(st, v.size());
    be.write(b, v);
    args.push_back(b);
    return b;
  };
  for (const auto& f : facial) upload(f);
  for (const auto& v : vol) upload(v);
  std::vector<BufferPtr> outs;
  for (std::size_t f = 0; f < facial.size(); ++f) outs.push_back(upload(std::vector<double>(layout.total_words(), 0.0)));
  upload(invj);
  if (!plan.unroll) {
    upload(local_matrix_words(Stage::lift, refel, spec));
    args.push_back(std::int64_t{refel.np});
    args.push_back(std::int64_t{4 * refel.nfp});
  }
  args.push_back(std::int64_t{layout.num_elements});
  be.launch(kernel, plan_groups(plan, layout), args);
  std::vector<std::vector<double>> r;
  for (auto& b : outs) r.push_back(be.read(b));
  return r;
}

}  // namespace

TEST_CASE("lift plans match the host oracle, including the mixed strategy") {
  const int order = 2;
  auto refel = build_reference_element(order);
  const int K = 11;
  auto layout = layout_for(refel, K);
  auto flayout = facial_layout(layout, refel.nfp);
  LocalKernelSpec spec;
  spec.num_inputs = 2;
  std::vector<std::vector<double>> facial{test::random_field(flayout, 4), test::random_field(flayout, 5)};
  std::vector<std::vector<double>> vol{test::random_field(layout, 6), test::random_field(layout, 7)};
  auto invj = test::random_vector(K, 8, 0.5, 2.0);

  std::vector<std::vector<double>> expect(2, std::vector<double>(layout.total_words(), 0.0));
  for (int f = 0; f < 2; ++f) {
    for (int k = 0; k < K; ++k) {
      Eigen::VectorXd fk(4 * refel.nfp);
      for (int j = 0; j < 4 * refel.nfp; ++j) fk[j] = facial[f][flayout.dof_index(k, j)];
      Eigen::VectorXd l = refel.lift * fk;
      for (int i = 0; i < refel.np; ++i) {
        const auto w = layout.dof_index(k, i);
        expect[f][w] = vol[f][w] + invj[k] * l[i];
      }
    }
  }

  PlanLimits limits;
  limits.include_mixed = true;
  auto interp = make_interp_backend();
  auto plans = enumerate_plans(Stage::lift, order, Precision::f64, 2, layout, limits);
  bool saw_mixed = false;
  for (const auto& plan : plans) {
    CAPTURE(plan.id());
    saw_mixed |= plan.storage == Storage::mixed;
    auto r = run_lift(*interp, plan, refel, layout, spec, facial, vol, invj);
    for (int f = 0; f < 2; ++f) CHECK(test::max_rel_diff(r[f], expect[f]) < 1e-12);
  }
  CHECK(saw_mixed);
}

TEST_CASE("single precision plans agree with the degenerate plan on the native backend") {
  const int order = 3;
  auto refel = build_reference_element(order);
  const int K = 2 * choose_microblock(refel.np).elements_per_block;
  auto layout = layout_for(refel, K);
  LocalKernelSpec spec;
  spec.terms = {{0, 0, 0, 1.0}, {0, 0, 2, -2.0}};
  std::vector<std::vector<double>> u{test::random_field(layout, 9)};
  auto geo = test::random_vector(9 * K, 10);
  auto cpu = make_native_backend();
  PlanLimits limits;
  limits.ws_values = {1, 2};
  limits.wi_values = {1, 2};
  limits.wp_values = {1, 2};
  auto plans = enumerate_plans(Stage::differentiation, order, Precision::f32, 1, layout, limits);
  auto base = run_differentiation(*cpu, plans.front(), refel, layout, spec, u, geo);
  for (const auto& plan : plans) {
    CAPTURE(plan.id());
    auto r = run_differentiation(*cpu, plan, refel, layout, spec, u, geo);
    CHECK(test::max_rel_diff(r.out[0], base.out[0]) < 1e-6);
  }
}

TEST_CASE("interpreter flop count matches the differentiation model") {
  const int order = 2;
  auto refel = build_reference_element(order);
  const int K = 3;
  auto layout = layout_for(refel, K);
  LocalKernelSpec spec;
  spec.num_inputs = 2;
  spec.num_outputs = 2;
  spec.terms = {{0, 1, 2, 1.0}, {0, 1, 1, -1.0}, {1, 0, 0, 0.5}};
  std::vector<std::vector<double>> u{test::random_field(layout, 1), test::random_field(layout, 2)};
  auto geo = test::random_vector(9 * K, 3);
  auto interp = make_interp_backend();
  // 6 Np^2 per field, 5 per node per (field, axis) pair, 1 per +-1 term and 2 otherwise.
  const std::uint64_t per_element = 2 * 6 * refel.np * refel.np + refel.np * (3 * 5 + 1 + 1 + 2);
  for (const auto& plan : enumerate_plans(Stage::differentiation, order, Precision::f64, 2, layout)) {
    CAPTURE(plan.id());
    CHECK(run_differentiation(*interp, plan, refel, layout, spec, u, geo).flops == per_element * K);
  }
}

TEST_CASE("unrolled kernels have no loop over the node count for N <= 5") {
  for (int order = 1; order <= 6; ++order) {
    auto refel = build_reference_element(order);
    auto layout = layout_for(refel, 10);
    LocalKernelSpec spec;
    spec.terms = {{0, 0, 0, 1.0}};
    KernelPlan plan = degenerate_plan(Stage::differentiation, order, Precision::f64, 1);
    plan.unroll = true;
    auto text = generate_local_kernel(plan, refel, layout, spec).text;
    const bool has_loop = text.find("for (int j") != std::string::npos;
    CHECK(has_loop == (order > 5));
    plan.unroll = false;
    CHECK(generate_local_kernel(plan, refel, layout, spec).text.find("for (int j") != std::string::npos);
  }
}

TEST_CASE("identity matrices reproduce the input") {
  const int order = 2;
  auto refel = build_reference_element(order);
  const int K = 7;
  auto layout = layout_for(refel, K);
  LocalKernelSpec spec;
  spec.terms = {{0, 0, 0, 1.0}};
  spec.diff_override = std::array<Matrix, 3>{Matrix::Identity(refel.np, refel.np), Matrix::Zero(refel.np, refel.np),
                                             Matrix::Zero(refel.np, refel.np)};
  std::vector<double> geo(9 * K, 0.0);
  for (int k = 0; k < K; ++k) geo[9 * k] = 1.0;
  std::vector<std::vector<double>> u{test::random_field(layout, 11)};
  auto interp = make_interp_backend();
  for (const auto& plan : enumerate_plans(Stage::differentiation, order, Precision::f64, 1, layout)) {
    CAPTURE(plan.id());
    CHECK(run_differentiation(*interp, plan, refel, layout, spec, u, geo).out[0] == u[0]);
  }
}

TEST_CASE("generated source is deterministic and the compile cache hits") {
  auto refel = build_reference_element(3);
  auto layout = layout_for(refel, 20);
  LocalKernelSpec spec;
  spec.terms = {{0, 0, 1, 1.0}};
  KernelPlan plan = degenerate_plan(Stage::differentiation, 3, Precision::f64, 1);
  plan.storage = Storage::fields_in_shared;
  plan.decomposition = {2, 2, 2};
  auto a = generate_local_kernel(plan, refel, layout, spec);
  auto b = generate_local_kernel(plan, refel, layout, spec);
  CHECK(a.text == b.text);
  CHECK(KernelPlan::parse(plan.id()) == plan);
  auto cpu = make_native_backend();
  cpu->compile(a);
  auto second = cpu->compile(b);
  CHECK(second->cache_hit);
}

TEST_CASE("on-chip estimates") {
  auto refel = build_reference_element(4);
  auto layout = choose_microblock(refel.np);
  KernelPlan lift = degenerate_plan(Stage::lift, 4, Precision::f32, 1);
  lift.storage = Storage::matrix_in_shared;
  CHECK(estimate_onchip(lift, layout) == 8400);
  KernelPlan diff = degenerate_plan(Stage::differentiation, 4, Precision::f32, 1);
  diff.storage = Storage::matrix_in_shared;
  CHECK(estimate_onchip(diff, layout) == 14700);
  diff.storage = Storage::stream_all;
  CHECK(estimate_onchip(diff, layout) == 0);
  for (const auto& p : enumerate_plans(Stage::differentiation, 4, Precision::f64, 6, layout)) {
    CHECK(estimate_onchip(p, layout) <= 48 * 1024);
    CHECK(plan_lanes(p, layout) <= 1024);
  }
  PlanLimits tight;
  tight.onchip_bytes = 0;
  tight.max_microblocks = 1;
  auto only = enumerate_plans(Stage::differentiation, 4, Precision::f64, 6, layout, tight);
  REQUIRE(only.size() >= 1);
  CHECK(only.front() == degenerate_plan(Stage::differentiation, 4, Precision::f64, 6));
  CHECK(enumerate_plans(Stage::lift, 4, Precision::f64, 6, layout) ==
        enumerate_plans(Stage::lift, 4, Precision::f64, 6, layout));
}
