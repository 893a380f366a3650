#include <cmath>
#include <filesystem>
#include <map>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "pardpp/cli.hpp"

using namespace pardpp;

namespace {

const std::string kData = PARDPP_TEST_DATA;

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  Run r;
  r.code = run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::vector<nlohmann::json> records(const std::string& text) {
  std::vector<nlohmann::json> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) out.push_back(nlohmann::json::parse(line));
  return out;
}

std::string data(const std::string& name) { return kData + "/" + name; }

}  // namespace

TEST_CASE("count subcommand") {
  CHECK(run({"count", "--model", data("diag123_k2.json")}).out == "11\n");
  CHECK(run({"count", "--matrix", data("identity2.txt")}).out == "4\n");
  CHECK(run({"count", "--matrix", data("diag123.txt"), "--k", "2", "--given", "2"}).out ==
        "9\n");
  CHECK(run({"count", "--model", data("partition_i4.json"), "--given", "0,1"}).out == "0\n");
  CHECK(run({"count", "--matrix", data("diag123.txt"), "--given", "7"}).code == kExitUsage);
  CHECK(run({"count"}).code == kExitUsage);
  CHECK(run({"count", "--matrix", data("missing.txt")}).code == kExitRuntime);
  CHECK(run({"count", "--matrix", data("diag123.txt"), "--k", "4"}).code == kExitRuntime);
}

TEST_CASE("sample subcommand") {
  const Run r = run({"sample", "--model", data("diag123_k2.json"), "--sampler", "sequential",
                     "--samples", "10", "--seed", "3"});
  REQUIRE(r.code == kExitOk);
  const auto recs = records(r.out);
  REQUIRE(recs.size() == 10);
  for (std::size_t i = 0; i < recs.size(); ++i) {
    CHECK(recs[i]["index"] == i);
    CHECK(recs[i]["sample"].size() == 2);
    CHECK(recs[i]["status"] == "exact");
    CHECK(recs[i]["sampler"] == "sequential");
    CHECK(recs[i]["adaptive_rounds"] == 2);
    CHECK_FALSE(recs[i].contains("wall_time_ms"));
  }

  const Run ei = run({"sample", "--model", data("partition_i4.json"), "--sampler", "ei",
                      "--samples", "5"});
  for (const auto& rec : records(ei.out)) {
    CHECK(rec["status"] == "approximate");
    CHECK(rec["eps"] == 0.05);
  }

  const Run timed = run({"sample", "--matrix", data("npsd5.txt"), "--k", "2", "--timing"});
  REQUIRE(timed.code == kExitOk);
  CHECK(records(timed.out)[0].contains("wall_time_ms"));
  CHECK(records(timed.out)[0]["sampler"] == "ei");

  CHECK(run({"sample", "--model", data("diag123_k2.json"), "--sampler", "gibbs"}).code ==
        kExitUsage);
  CHECK(run({"sample", "--model", data("diag123_k2.json"), "--eps", "2"}).code == kExitUsage);
  CHECK(run({"sample", "--model", data("diag123_k2.json"), "--matrix", data("diag123.txt")})
            .code == kExitUsage);
  CHECK(run({"sample", "--matrix", data("npsd5.txt"), "--k", "2", "--sampler", "batched-sym"})
            .code == kExitRuntime);
  CHECK(run({"bogus"}).code == kExitUsage);
  CHECK(run({"sample", "--help"}).code == kExitOk);
}

TEST_CASE("batched records stay within the round bound") {
  const auto dir = std::filesystem::temp_directory_path() / "pardpp_cli_rounds";
  std::filesystem::create_directories(dir);
  {
    std::ofstream m(dir / "id.txt");
    m << 200 << '\n';
    for (int i = 0; i < 200; ++i) {
      for (int j = 0; j < 200; ++j) m << (i == j ? 1 : 0) << (j + 1 < 200 ? ' ' : '\n');
    }
  }
  const Run r = run({"sample", "--matrix", (dir / "id.txt").string(), "--k", "100", "--sampler",
                     "batched-sym", "--samples", "3"});
  REQUIRE(r.code == kExitOk);
  for (const auto& rec : records(r.out)) {
    CHECK(rec["adaptive_rounds"].get<int>() <= 20);
    CHECK(rec["sample"].size() == 100);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("tv subcommand") {
  const auto dir = std::filesystem::temp_directory_path() / "pardpp_cli_tv";
  std::filesystem::create_directories(dir);
  const std::string file = (dir / "s.jsonl").string();
  REQUIRE(run({"sample", "--model", data("diag123_k2.json"), "--sampler", "batched-sym",
               "--samples", "4000", "--out", file})
              .code == kExitOk);
  const Run good = run({"tv", "--model", data("diag123_k2.json"), "--samples-file", file});
  REQUIRE(good.code == kExitOk);
  const auto report = nlohmann::json::parse(good.out);
  CHECK(report["pass"] == true);
  CHECK(report["samples"] == 4000);
  CHECK(report["support"] == 3);

  // Scored against the uniform 2-DPP on four elements the exact gap is 1/2.
  const Run wrong = run({"tv", "--matrix", data("identity4.txt"), "--k", "2", "--samples-file",
                         file});
  const auto bad = nlohmann::json::parse(wrong.out);
  CHECK(bad["pass"] == false);
  CHECK(bad["measured"].get<double>() == doctest::Approx(0.5).epsilon(0.1));

  const Run wrong3 = run({"tv", "--matrix", data("diag123.txt"), "--samples-file", file});
  const auto b3 = nlohmann::json::parse(wrong3.out);
  // Exact TV between the 2-DPP and the full DPP on diag(1,2,3): 1 - 11/24.
  CHECK(b3["measured"].get<double>() == doctest::Approx(13.0 / 24).epsilon(0.05));

  std::ofstream(dir / "empty.jsonl") << "";
  CHECK(run({"tv", "--model", data("diag123_k2.json"), "--samples-file",
             (dir / "empty.jsonl").string()})
            .code == kExitUsage);
  std::filesystem::remove_all(dir);
}

TEST_CASE("planar subcommand") {
  CHECK(run({"planar", "--graph", data("cycle4.graph")}).out == "2\n");
  CHECK(run({"planar", "--graph", data("grid2x3.graph"), "--mode", "count"}).out == "3\n");
  CHECK(run({"planar", "--graph", data("path3.graph")}).code == kExitRuntime);
  const Run s = run({"planar", "--graph", data("grid2x3.graph"), "--mode", "sample",
                     "--samples", "3000", "--seed", "5"});
  REQUIRE(s.code == kExitOk);
  std::map<std::string, int> freq;
  for (const auto& rec : records(s.out)) freq[rec["edges"].dump()]++;
  CHECK(freq.size() == 3);
  for (const auto& [m, c] : freq) CHECK(std::abs(c / 3000.0 - 1.0 / 3) < 0.04);
  CHECK(run({"planar", "--graph", data("cycle4.graph"), "--mode", "draw"}).code == kExitUsage);
}

TEST_CASE("output is byte-identical across worker counts") {
  const std::vector<std::string> base = {"sample", "--matrix", data("npsd5.txt"), "--k", "3",
                                         "--samples", "20", "--seed", "11"};
  auto with = [&](const std::string& workers) {
    auto args = base;
    args.push_back("--workers");
    args.push_back(workers);
    return run(args).out;
  };
  const std::string one = with("1");
  CHECK(one == with("1"));
  CHECK(one == with("4"));
  CHECK(one == run(base).out);
  const std::vector<std::string> planar = {"planar", "--graph", data("grid2x3.graph"), "--mode",
                                           "sample", "--samples", "10"};
  auto p4 = planar;
  p4.push_back("--workers");
  p4.push_back("3");
  CHECK(run(planar).out == run(p4).out);
}
