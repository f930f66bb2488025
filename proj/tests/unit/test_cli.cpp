#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "cli.hpp"
#include "doctest.h"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result dg(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  int code = dgforge::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::vector<std::string>> rows;
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> row;
    std::stringstream s(line);
    for (std::string cell; std::getline(s, cell, ',');) row.push_back(cell);
    rows.push_back(row);
  }
  return rows;
}

fs::path scratch(const std::string& name) {
  fs::path p = fs::current_path() / ("cli-" + name);
  fs::remove_all(p);
  return p;
}

double final_error(const fs::path& dir) {
  auto rows = read_csv(dir / "timeseries.csv");
  return std::stod(rows.back().at(3));
}

}  // namespace

TEST_CASE("run smoke") {
  auto dir = scratch("smoke");
  auto r = dg({"run", "--case", "advect-gauss", "--order", "2", "--mesh", "box:4", "--steps", "10", "--out", dir});
  CHECK_MESSAGE(r.code == 0, r.err);
  for (const char* f : {"timeseries.csv", "perf.csv", "config.txt"}) CHECK(fs::exists(dir / f));
  auto ts = read_csv(dir / "timeseries.csv");
  CHECK(ts.front() == std::vector<std::string>{"step", "t", "energy", "l2_error"});
  CHECK(ts.size() == 12u);
  auto perf = read_csv(dir / "perf.csv");
  CHECK(perf.front().at(0) == "stage");
  CHECK(perf.back().at(0) == "total");
}

TEST_CASE("usage errors") {
  CHECK(dg({"run", "--order", "99"}).code == dgforge::cli::kExitUsage);
  CHECK(dg({"run", "--steps", "3", "--t-final", "1"}).code == dgforge::cli::kExitUsage);
  CHECK(dg({"run", "--case", "nope"}).code == dgforge::cli::kExitUsage);
  CHECK(dg({"frobnicate"}).code == dgforge::cli::kExitUsage);
  CHECK(dg({"run", "--config", "/nonexistent/config.txt"}).code == dgforge::cli::kExitUsage);
  CHECK(dg({"run", "--mesh", "/nonexistent.mesh", "--steps", "1"}).code == dgforge::cli::kExitFailure);
  CHECK(dg({"run", "--backend", "device", "--steps", "1"}).code == dgforge::cli::kExitFailure);
}

TEST_CASE("higher order is more accurate") {
  auto d2 = scratch("cavity2"), d3 = scratch("cavity3");
  auto r2 = dg({"run", "--case", "maxwell-cavity-101", "--order", "2", "--mesh", "box:4", "--t-final", "1.0", "--out", d2});
  auto r3 = dg({"run", "--case", "maxwell-cavity-101", "--order", "3", "--mesh", "box:4", "--t-final", "1.0", "--out", d3});
  REQUIRE(r2.code == 0);
  REQUIRE(r3.code == 0);
  CHECK(final_error(d3) < final_error(d2));
}

TEST_CASE("config reproduces a run") {
  auto a = scratch("cfg-a"), b = scratch("cfg-b");
  REQUIRE(dg({"run", "--case", "advect-plane", "--order", "2", "--mesh", "box:2", "--steps", "4", "--alpha", "0.5",
              "--out", a})
              .code == 0);
  REQUIRE(dg({"run", "--config", (a / "config.txt").string(), "--out", b}).code == 0);
  std::ifstream fa(a / "timeseries.csv"), fb(b / "timeseries.csv");
  std::stringstream sa, sb;
  sa << fa.rdbuf();
  sb << fb.rdbuf();
  CHECK(sa.str() == sb.str());
}

TEST_CASE("tune with a fake clock") {
  auto dir = scratch("tune");
  auto cache = fs::current_path() / "cli-tune-cache.jsonl";
  fs::remove(cache);
  setenv("DGFORGE_FAKE_CLOCK", "hash", 1);
  auto args = std::vector<std::string>{"tune", "--case", "advect-gauss", "--order", "1", "--mesh", "box:1",
                                       "--stages", "gather", "--out", dir.string(), "--tune-cache", cache.string()};
  auto r1 = dg(args);
  auto r2 = dg(args);
  unsetenv("DGFORGE_FAKE_CLOCK");
  REQUIRE(r1.code == 0);
  REQUIRE(r2.code == 0);
  std::ifstream in(cache);
  std::vector<std::string> lines;
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  REQUIRE(lines.size() == 2u);
  // same winner both times; timestamps may differ
  auto plan = [](const std::string& l) {
    auto b = l.find("\"plan\":\"") + 8;
    return l.substr(b, l.find('"', b) - b);
  };
  CHECK(plan(lines[0]) == plan(lines[1]));
  auto rows = read_csv(dir / "tuning_study.csv");
  CHECK(rows.size() == 8u);  // header + 7 faces-per-block choices

  // run picks the cached plan
  auto run = scratch("tuned-run");
  auto r = dg({"run", "--case", "advect-gauss", "--order", "1", "--mesh", "box:1", "--steps", "1", "--tune-cache",
               cache.string(), "--out", run.string()});
  REQUIRE(r.code == 0);
  std::ifstream cfg(run / "config.txt");
  std::stringstream s;
  s << cfg.rdbuf();
  CHECK(s.str().find("plan-gather = \"" + plan(lines[0]) + "\"") != std::string::npos);
}

TEST_CASE("partition stats") {
  auto r = dg({"partition-stats", "--mesh", "box:4", "--capacities", "1,384"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("1,384,0,0") != std::string::npos);
  CHECK(r.out.find("384,1,1,1") != std::string::npos);
}

TEST_CASE("bench counts are deterministic") {
  auto a = scratch("bench-a"), b = scratch("bench-b");
  auto args = [](const fs::path& d) {
    return std::vector<std::string>{"bench", "--case", "maxwell-cavity-101", "--order", "2", "--mesh", "box:2",
                                    "--steps", "5", "--out", d.string()};
  };
  REQUIRE(dg(args(a)).code == 0);
  REQUIRE(dg(args(b)).code == 0);
  auto pa = read_csv(a / "perf.csv"), pb = read_csv(b / "perf.csv");
  REQUIRE(pa.size() == pb.size());
  for (size_t i = 1; i < pa.size(); ++i) {
    CHECK(pa[i][0] == pb[i][0]);
    CHECK(pa[i][1] == pb[i][1]);  // launches
    CHECK(pa[i][2] == pb[i][2]);  // flops
    CHECK(pa[i][3] == pb[i][3]);  // bytes
    // rate is the ratio of the logged columns
    const double flops = std::stod(pa[i][2]), secs = std::stod(pa[i][4]), rate = std::stod(pa[i][5]);
    if (secs > 0) CHECK(rate == doctest::Approx(flops / secs / 1e9).epsilon(1e-8));
  }
}

TEST_CASE("dump kernels") {
  auto dir = scratch("dump");
  auto out = scratch("dump-run");
  REQUIRE(dg({"run", "--case", "advect-gauss", "--order", "1", "--mesh", "box:1", "--steps", "1", "--dump-kernels",
              dir.string(), "--out", out.string()})
              .code == 0);
  std::set<std::string> stems;
  for (const auto& e : fs::directory_iterator(dir)) {
    CHECK(e.path().extension() == ".dgk");
    stems.insert(e.path().stem().string().substr(0, e.path().stem().string().find('-')));
  }
  CHECK(stems.count("dg_diff") == 1);
  CHECK(stems.count("dg_lift") == 1);
  CHECK(stems.count("dg_gather") == 1);
  CHECK(stems.count("dg_axpby") == 1);
}
