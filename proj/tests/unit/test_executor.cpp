#include <chrono>
#include <random>

#include "doctest.h"
#include "dgforge/error.hpp"
#include "dgforge/executor.hpp"
#include "support.hpp"

using namespace dgforge;

namespace {

const char* kCopy = R"(
kernel copy lanes(32) (global const double* x, global double* y, int n) {
  int i = group_id() * 32 + lane_id();
  if (i < n) {
    y[i] = x[i];
  }
}
)";

// y = A x with A (n x n, row major); one row per lane, x staged in shared memory.
const char* kMatvec = R"(
kernel matvec lanes(16) (global const double* a, global const double* x, global double* y, int n) {
  shared double xs[64];
  int i = group_id() * 16 + lane_id();
  for (int c = lane_id(); c < n; c += 16) {
    xs[c] = x[c];
  }
  barrier();
  if (i < n) {
    double acc = 0.0;
    for (int j = 0; j < n; j += 1) {
      acc += a[i * n + j] * xs[j];
    }
    y[i] = acc;
  }
}
)";

const char* kScale = R"(
kernel scale lanes(8) (global double* y, double s, int n) {
  int i = group_id() * 8 + lane_id();
  if (i < n) {
    y[i] = s * y[i];
  }
}
)";

std::vector<std::string> backends() { return {"cpu", "interp"}; }

}  // namespace

TEST_CASE("copy kernel") {
  for (const auto& name : backends()) {
    CAPTURE(name);
    auto be = make_backend(name);
    auto k = be->compile(std::string(kCopy));
    CHECK(k->lanes == 32);
    CHECK(k->params.size() == 3u);
    auto x = be->allocate(ScalarType::f64, 100), y = be->allocate(ScalarType::f64, 100);
    auto v = test::random_vector(100, 1);
    be->write(x, v);
    be->launch(k, 4, {x, y, std::int64_t{100}});
    CHECK(be->read(y) == v);
  }
}

TEST_CASE("matvec matches host multiply") {
  const int n = 50;
  auto a = test::random_vector(n * n, 2), x = test::random_vector(n, 3);
  std::vector<double> ref(n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) ref[i] += a[i * n + j] * x[j];
  for (const auto& name : backends()) {
    CAPTURE(name);
    auto be = make_backend(name);
    auto k = be->compile(std::string(kMatvec));
    auto ba = be->allocate(ScalarType::f64, n * n), bx = be->allocate(ScalarType::f64, n),
         by = be->allocate(ScalarType::f64, n);
    be->write(ba, a);
    be->write(bx, x);
    be->launch(k, (n + 15) / 16, {ba, bx, by, std::int64_t{n}});
    auto y = be->read(by);
    CHECK(test::max_rel_diff(y, ref) < 1e-12);

    // same inputs again: bitwise identical
    be->launch(k, (n + 15) / 16, {ba, bx, by, std::int64_t{n}});
    CHECK(be->read(by) == y);
  }
}

TEST_CASE("queued launches complete at synchronize") {
  for (const auto& name : backends()) {
    auto be = make_backend(name);
    auto k = be->compile(std::string(kScale));
    auto a = be->allocate(ScalarType::f64, 10), b = be->allocate(ScalarType::f64, 10);
    be->write(a, std::vector<double>(10, 1.0));
    be->write(b, std::vector<double>(10, 2.0));
    be->launch(k, 2, {a, 3.0, std::int64_t{10}});
    be->launch(k, 2, {b, 5.0, std::int64_t{10}});
    be->synchronize();
    CHECK(be->read(a) == std::vector<double>(10, 3.0));
    CHECK(be->read(b) == std::vector<double>(10, 10.0));
  }
}

TEST_CASE("compile cache") {
  for (const auto& name : backends()) {
    CAPTURE(name);
    auto be = make_backend(name);
    // unique text so the first compile is cold
    std::string src = kScale;
    src.replace(src.find("scale"), 5, "scale_" + std::to_string(std::chrono::steady_clock::now().time_since_epoch().count()));
    auto first = be->compile(src);
    auto second = be->compile(src);
    CHECK_FALSE(first->cache_hit);
    CHECK(second->cache_hit);
    CHECK(second->hash == first->hash);
    CHECK(second->compile_seconds < 0.05);
  }
  // a fresh backend finds the compiled module on disk
  auto be = make_backend("cpu");
  be->compile(std::string(kCopy));
  auto again = make_backend("cpu")->compile(std::string(kCopy));
  CHECK(again->cache_hit);
}

TEST_CASE("invalid source reports its line") {
  for (const auto& name : backends()) {
    auto be = make_backend(name);
    try {
      be->compile(std::string("kernel bad lanes(4) (global double* y) {\n  y[0] = 1.0\n}\n"));
      FAIL("compiled");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
    }
    try {
      be->compile(std::string("kernel bad lanes(4) (global double* y) {\n  y[0] = q;\n}\n"));
      FAIL("compiled");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
    }
    // barrier under a lane-dependent branch
    CHECK_THROWS_AS(be->compile(std::string("kernel bad lanes(4) (global double* y) {\n"
                                            "  if (lane_id() < 2) {\n    barrier();\n  }\n}\n")),
                    ParseError);
    // writes to a const buffer
    CHECK_THROWS_AS(be->compile(std::string("kernel bad lanes(4) (global const double* y) {\n"
                                            "  y[lane_id()] = 1.0;\n}\n")),
                    ParseError);
  }
}

TEST_CASE("interpreter checks memory accesses") {
  auto be = make_interp_backend();
  auto k = be->compile(std::string(kCopy));
  auto x = be->allocate(ScalarType::f64, 10), y = be->allocate(ScalarType::f64, 10);
  be->launch(k, 1, {x, y, std::int64_t{20}});
  CHECK_THROWS_AS(be->synchronize(), Error);

  auto race = be->compile(std::string("kernel race lanes(4) (global double* y) {\n"
                                      "  shared double s[4];\n"
                                      "  s[0] = 1.0;\n"
                                      "  barrier();\n"
                                      "  y[lane_id()] = s[0];\n}\n"));
  auto out = be->allocate(ScalarType::f64, 4);
  be->launch(race, 1, {out});
  CHECK_THROWS_AS(be->synchronize(), Error);
}

TEST_CASE("interpreter counts real arithmetic") {
  auto be = make_interp_backend();
  REQUIRE(be->counts_flops());
  auto k = be->compile(std::string(kMatvec));
  const int n = 20;
  auto ba = be->allocate(ScalarType::f64, n * n), bx = be->allocate(ScalarType::f64, n),
       by = be->allocate(ScalarType::f64, n);
  be->reset_flops();
  be->launch(k, 2, {ba, bx, by, std::int64_t{n}});
  be->synchronize();
  CHECK(be->flops() == 2u * n * n);
}

TEST_CASE("device backend") {
  CHECK_THROWS_AS(make_backend("device"), Error);
  CHECK_THROWS_AS(make_backend("quantum"), Error);
}

TEST_CASE("timing") {
  auto be = make_backend("cpu");
  double empty = wall_time(*be, [] {});
  CHECK(empty >= 0.0);
  CHECK(empty < 1e-3);

  auto k = be->compile(std::string(kScale));
  auto y = be->allocate(ScalarType::f64, 4096);
  auto stats = time_repeated(*be, [&] { be->launch(k, 512, {y, 1.0, std::int64_t{4096}}); }, 1, 10);
  CHECK(stats.samples.size() == 10u);
  CHECK(stats.min <= stats.median);
  CHECK(stats.median <= stats.max);
  CHECK(stats.spread() >= 0.0);

  ManualClock clock(2e-3);
  auto fake = time_repeated(*be, [] {}, 2, 5, &clock);
  CHECK(fake.samples.size() == 5u);
  for (double x : fake.samples) CHECK(x == doctest::Approx(2e-3).epsilon(1e-9));
  CHECK(fake.median == doctest::Approx(2e-3).epsilon(1e-9));
}
