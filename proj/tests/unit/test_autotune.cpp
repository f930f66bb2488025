#include <cstdio>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "dgforge/autotune.hpp"

using namespace dgforge;

namespace {

struct Fixture {
  std::unique_ptr<Backend> backend = make_backend("cpu");
  SystemDefinition system = advection_system({1, 0.5, 0.25});
  Discretization disc = discretize(generate_box_mesh(2, 1, 1), 2);

  std::vector<KernelPlan> plans(Stage stage, std::size_t n = 4) {
    auto all = enumerate_plans(stage, 2, Precision::f64, 1, disc.layout);
    if (all.size() > n) all.resize(n);
    return all;
  }
  TuningKey key(Stage stage) { return tuning_key(stage, disc, system, Precision::f64, "cpu"); }
};

FakeClock table_clock(std::map<std::string, double> t) {
  return [t](const KernelPlan& p) { return t.at(p.id()); };
}

std::string replace_all(std::string s, const std::string& a, const std::string& b) {
  for (auto pos = s.find(a); pos != std::string::npos; pos = s.find(a, pos + b.size())) s.replace(pos, a.size(), b);
  return s;
}

}  // namespace

TEST_CASE("measurement") {
  Fixture fx;
  StageWorkload w(*fx.backend, fx.disc, fx.system, Stage::differentiation, Precision::f64);
  TuneOptions opt;
  opt.warmup = 1;
  opt.repetitions = 3;
  auto base = degenerate_plan(Stage::differentiation, 2, Precision::f64, 1);
  double t = w.time(base, opt);
  CHECK(std::isfinite(t));
  CHECK(t > 0.0);

  auto p = fx.plans(Stage::differentiation, 2);
  opt.fake_clock = table_clock({{p[0].id(), 2.0}, {p[1].id(), 1.0}});
  CHECK(w.time(p[0], opt) == 2.0);
  CHECK(w.time(p[1], opt) == 1.0);
}

TEST_CASE("argmin and tie-break") {
  Fixture fx;
  StageWorkload w(*fx.backend, fx.disc, fx.system, Stage::lift, Precision::f64);
  auto p = fx.plans(Stage::lift, 3);
  REQUIRE(p.size() == 3u);
  TuneOptions opt;
  opt.fake_clock = table_clock({{p[0].id(), 2e-3}, {p[1].id(), 1e-3}, {p[2].id(), 3e-3}});
  auto study = autotune(fx.key(Stage::lift), p, w, opt);
  CHECK(study.best.plan == p[1]);
  CHECK(study.best.median_seconds == 1e-3);
  CHECK(study.rows.size() == 3u);

  opt.fake_clock = table_clock({{p[0].id(), 1e-3}, {p[1].id(), 1e-3}, {p[2].id(), 1e-3}});
  auto tie = autotune(fx.key(Stage::lift), p, w, opt);
  auto first = std::min_element(p.begin(), p.end(), [](auto& a, auto& b) { return a.id() < b.id(); });
  CHECK(tie.best.plan == *first);
  // same answer regardless of enumeration order
  std::vector<KernelPlan> rev(p.rbegin(), p.rend());
  CHECK(autotune(fx.key(Stage::lift), rev, w, opt).best.plan == *first);
}

TEST_CASE("failing plans are never selected") {
  Fixture fx;
  StageWorkload w(*fx.backend, fx.disc, fx.system, Stage::differentiation, Precision::f64);
  auto p = fx.plans(Stage::differentiation, 4);
  const std::string wrong = p[1].id(), broken = p[2].id();
  TuneOptions opt;
  // sabotaged plans are the fastest by far
  opt.fake_clock = table_clock({{p[0].id(), 3e-3}, {wrong, 1e-6}, {broken, 1e-6}, {p[3].id(), 2e-3}});
  opt.source_hook = [&](const KernelPlan& plan, KernelSource& src) {
    if (plan.id() == wrong) src.text = replace_all(src.text, "] = ", "] = 0.5 * ");
    if (plan.id() == broken) src.text += "\nthis is not a kernel\n";
  };
  auto study = autotune(fx.key(Stage::differentiation), p, w, opt);
  CHECK(study.best.plan == p[3]);
  CHECK_FALSE(study.rows[1].passed);
  CHECK_FALSE(study.rows[2].passed);
  CHECK_MESSAGE(study.rows[1].failure.find("relative error") != std::string::npos, study.rows[1].failure);
  CHECK_FALSE(study.rows[2].failure.empty());
  CHECK(study.rows[1].median_seconds == 0.0);

  opt.source_hook = [](const KernelPlan&, KernelSource& src) { src.text += "\n}\n"; };
  CHECK_THROWS_AS(autotune(fx.key(Stage::differentiation), p, w, opt), Error);
}

TEST_CASE("fake clock sources") {
  auto plan = degenerate_plan(Stage::gather, 3, Precision::f32, 6);
  CHECK(hash_seconds(plan) == hash_seconds(plan));
  CHECK(hash_seconds(plan) >= 1e-3);
  CHECK(hash_seconds(plan) < 2e-3);

  const std::string path = "test_fake_clock.txt";
  {
    std::ofstream f(path);
    f << "# plan seconds\n" << plan.id() << " 0.25\n";
  }
  auto clock = fake_clock_from_file(path);
  CHECK(clock(plan) == 0.25);
  auto other = degenerate_plan(Stage::lift, 3, Precision::f32, 6);
  CHECK(clock(other) == hash_seconds(other));
  {
    std::ofstream f(path);
    f << plan.id() << " soon\n";
  }
  CHECK_THROWS_AS(fake_clock_from_file(path), ParseError);
  std::remove(path.c_str());
}

TEST_CASE("tuning cache") {
  const std::string path = "test_tune_cache.jsonl";
  std::remove(path.c_str());
  TuningKey key{Stage::lift, 4, Precision::f32, "cpu", 16, 5, "maxwell"};
  TuningRecord rec{key, KernelPlan::parse("lift/N4/f32/F6/ws2.wi1.wp4/matrix_in_shared/unrolled"), 1.2345678901234567e-4,
                   987654321, "2026-10-15T12:00:00Z"};
  CHECK_FALSE(cache_load(path, key).has_value());
  cache_store(path, rec);
  auto back = cache_load(path, key);
  REQUIRE(back.has_value());
  CHECK(*back == rec);

  auto other = key;
  other.order = 3;
  CHECK_FALSE(cache_load(path, other).has_value());

  // latest record wins
  auto newer = rec;
  newer.median_seconds = 5e-5;
  cache_store(path, newer);
  CHECK(cache_load(path, key)->median_seconds == 5e-5);

  {
    std::ofstream f(path, std::ios::app);
    f << "{\"stage\": \"lift\", \"N\": \n";
  }
  std::ostringstream warn;
  auto still = cache_load(path, key, &warn);
  REQUIRE(still.has_value());
  CHECK(*still == newer);
  CHECK(warn.str().find("skipping corrupt tuning record") != std::string::npos);
  CHECK(warn.str().find(":3:") != std::string::npos);
  std::remove(path.c_str());

  CHECK_THROWS_AS(cache_store("/nonexistent-dir/x/cache", rec), Error);
  CHECK(record_from_json(record_to_json(rec)) == rec);
}

TEST_CASE("study csv") {
  Fixture fx;
  StageWorkload w(*fx.backend, fx.disc, fx.system, Stage::gather, Precision::f64);
  auto p = enumerate_plans(Stage::gather, 2, Precision::f64, 1, fx.disc.layout);
  TuneOptions opt;
  opt.fake_clock = hash_seconds;
  auto study = autotune(fx.key(Stage::gather), p, w, opt);
  std::ostringstream out;
  write_study_csv(out, {study});
  std::istringstream in(out.str());
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) ++lines;
  CHECK(lines == static_cast<int>(p.size()) + 1);
}

TEST_CASE("tuning mesh and key") {
  auto m = generate_box_mesh(8, 8, 8);
  CHECK(tuning_mesh(m, 5).num_elements() == 512 * 5);
  CHECK(tuning_mesh(m, 8).num_elements() == m.num_elements());
  Fixture fx;
  auto k = fx.key(Stage::gather);
  CHECK(k.order == 2);
  CHECK(k.system == "advection");
  CHECK(k.str() == "gather/N2/f64/cpu/g16/km8/advection");
}
