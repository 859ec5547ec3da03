#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "rfimlab/experiment.hpp"
#include "rfimlab/snapshot.hpp"

using namespace rfimlab;

namespace {

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

// Data rows: everything after the comment block and the header line.
std::vector<std::vector<std::string>> rows_of(const std::string& csv) {
  std::vector<std::vector<std::string>> out;
  bool header_seen = false;
  for (const auto& line : lines_of(csv)) {
    if (line.rfind('#', 0) == 0) continue;
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    out.push_back(cells);
  }
  return out;
}

ExperimentConfig cfg(const std::string& engine, std::map<std::string, std::string> kv) {
  if (!kv.count("workers")) kv["workers"] = "1";
  return ExperimentConfig::resolve(engine, kv);
}

}  // namespace

TEST_SUITE("experiment") {
  TEST_CASE("config resolution") {
    CHECK_THROWS_AS(ExperimentConfig::resolve("glauber", {{"eps", "1"}}), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::resolve("glauber", {{"N", "8"}, {"eps", "1"}, {"bogus", "1"}}), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::resolve("nope", {}), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::resolve("glauber", {{"N", "8"}, {"eps", "x"}}), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::resolve("glauber", {{"N", "8"}, {"eps", "1"}, {"wrap", "maybe"}}),
                    ConfigError);

    const auto a = cfg("glauber", {{"N", "8"}, {"eps", "1.0"}, {"wrap", "yes"}, {"M-grid", "0.5, 1"}});
    const auto b = cfg("glauber", {{"N", " 8"}, {"eps", "1"}, {"wrap", "true"}, {"M-grid", "0.5,1.0"}});
    CHECK(a.to_ini() == b.to_ini());
    CHECK(a.hash() == b.hash());
    CHECK(a.hash_hex().size() == 16);
    CHECK(a.get_double("M-end") == INFINITY);
    CHECK(a.get_doubles("M-grid") == std::vector<double>{0.5, 1.0});
    CHECK(a.hash() != cfg("glauber", {{"N", "9"}, {"eps", "1"}}).hash());
    CHECK(a.to_ini().rfind("[glauber]\n", 0) == 0);

    const auto w = ExperimentConfig::resolve("glauber", {{"N", "8"}, {"eps", "1"}});
    CHECK(w.get_int("workers") >= 1);
  }

  TEST_CASE("seed lists and number formatting") {
    CHECK(parse_seed_list("3") == std::vector<std::uint64_t>{3});
    CHECK(parse_seed_list("1..4, 9,0x10") == std::vector<std::uint64_t>{1, 2, 3, 4, 9, 16});
    CHECK_THROWS(parse_seed_list("5..4"));
    CHECK_THROWS(parse_seed_list(""));
    for (double x : {0.1, 1.0 / 3.0, -2.5e-7, 1e300, 0.0}) CHECK(std::stod(format_double(x)) == x);
    CHECK(format_double(1.0) == "1");
    CHECK(format_double(-INFINITY) == "-inf");
  }

  TEST_CASE("clean ground-state sweep gives one full breakpoint") {
    const auto c = cfg("gs-evolve", {{"N", "4"}, {"eps", "0"}, {"seeds", "1"}});
    const auto a = run_experiment(c);
    CHECK(a.status == 0);
    const auto rows = rows_of(a.files.at("breakpoints.csv"));
    REQUIRE(rows.size() == 1);
    // seed,config_hash,N,index,M_lo,M_hi,size,components,merged
    CHECK(rows[0][0] == "1");
    CHECK(rows[0][1] == c.hash_hex());
    CHECK(rows[0][6] == "16");
    CHECK(std::abs(std::stod(rows[0][4])) <= c.get_double("tol"));
    CHECK(std::abs(std::stod(rows[0][5])) <= c.get_double("tol"));
    const auto lines = lines_of(a.files.at("events.jsonl"));
    REQUIRE(lines.size() == 2);
    CHECK(lines[0].find("\"format\":\"rfimlab/1\"") != std::string::npos);
    CHECK(lines[0].find("\"config_hash\":\"" + c.hash_hex() + "\"") != std::string::npos);
  }

  TEST_CASE("every row carries seed and config hash") {
    const auto c = cfg("bootstrap", {{"N", "24"}, {"p", "0.08"}, {"q", "0.01"}, {"seeds", "1..3"}});
    const auto a = run_experiment(c);
    for (const auto& name : {"clusters.csv", "summary.csv"}) {
      const auto& text = a.files.at(name);
      CHECK(text.find("# format=rfimlab/1 engine=bootstrap config_hash=" + c.hash_hex()) == 0);
      for (const auto& r : rows_of(text)) {
        REQUIRE(r.size() >= 2);
        CHECK((r[0] == "1" || r[0] == "2" || r[0] == "3"));
        CHECK(r[1] == c.hash_hex());
      }
    }
    CHECK(rows_of(a.files.at("summary.csv")).size() == 3);
    CHECK(a.files.count("final_2.snap") == 1);
  }

  TEST_CASE("output is independent of worker count apart from the hash") {
    auto strip = [](const std::string& csv) {
      auto rows = rows_of(csv);
      for (auto& r : rows) r.erase(r.begin() + 1);
      return rows;
    };
    for (const auto& [engine, kv] : std::vector<std::pair<std::string, std::map<std::string, std::string>>>{
             {"gs-evolve", {{"N", "4,5"}, {"eps", "1"}, {"seeds", "1..6"}}},
             {"glauber", {{"N", "12"}, {"eps", "1"}, {"seeds", "1..6"}, {"M-grid", "0,1,2"}}},
             {"renorm", {{"N", "60"}, {"eps", "1"}, {"M", "1.5"}, {"seeds", "1..4"}}}}) {
      auto one = kv, four = kv;
      one["workers"] = "1";
      four["workers"] = "4";
      const auto a = run_experiment(ExperimentConfig::resolve(engine, one));
      const auto b = run_experiment(ExperimentConfig::resolve(engine, four));
      const auto a2 = run_experiment(ExperimentConfig::resolve(engine, one));
      REQUIRE(a.files.size() == b.files.size());
      for (const auto& [name, content] : a.files) {
        CHECK(a2.files.at(name) == content);
        if (name.ends_with(".csv")) CHECK(strip(content) == strip(b.files.at(name)));
      }
    }
  }

  TEST_CASE("glauber nesting check passes over 50 seeds") {
    const auto a = run_experiment(
        cfg("glauber", {{"N", "12"}, {"eps", "1"}, {"seeds", "1..50"}, {"nesting-check", "true"}, {"events", "false"}}));
    CHECK(a.status == kExitOk);
    CHECK(a.violations.empty());
  }

  TEST_CASE("bootstrap golden fixture") {
    const std::string dir = RFIMLAB_FIXTURES_DIR;
    const auto ok = run_experiment(cfg("bootstrap", {{"input", dir + "/diagonal_input.snap"},
                                                     {"golden", dir + "/diagonal_golden.snap"}}));
    CHECK(ok.status == kExitOk);
    const auto snap = decode_snapshot(std::span(
        reinterpret_cast<const std::uint8_t*>(ok.files.at("final.snap").data()), ok.files.at("final.snap").size()));
    CHECK(snapshot_sites(snap).count(SiteState::Open) == 9);

    // A higher threshold leaves the diagonal alone, so the golden check must flag it.
    const auto bad = run_experiment(cfg("bootstrap", {{"input", dir + "/diagonal_input.snap"},
                                                      {"golden", dir + "/diagonal_golden.snap"},
                                                      {"r", "3"}}));
    CHECK(bad.status == kExitInvariant);
    CHECK_THROWS_AS(run_experiment(cfg("bootstrap", {{"input", dir + "/missing.snap"}})), ConfigError);
  }

  TEST_CASE("renorm and selftest report no violations") {
    const auto r = run_experiment(cfg("renorm", {{"N", "64"}, {"eps", "0.6"}, {"M", "1.5"}, {"seeds", "1,2"}}));
    CHECK(r.status == 0);
    for (const auto& row : rows_of(r.files.at("renorm.csv"))) CHECK(row.back() == "0");
    const auto pn = run_experiment(cfg("renorm", {{"mode", "pn"}, {"p", "0.1"}, {"q", "0"}, {"trials", "5"},
                                                  {"levels", "0"}}));
    CHECK(rows_of(pn.files.at("pn.csv")).size() == 1);
    const auto s = run_experiment(cfg("selftest", {{"seeds", "1..5"}}));
    CHECK(s.status == 0);
    CHECK(rows_of(s.files.at("selftest.csv")).size() == 5 * 6);
  }

  TEST_CASE("artifacts are written with the resolved config") {
    const auto dir = std::filesystem::temp_directory_path() / "rfimlab_experiment_test";
    std::filesystem::remove_all(dir);
    const auto c = cfg("glauber-t", {{"N", "6"}, {"eps", "1"}, {"T", "0.5"}, {"M-lo", "-1"}, {"M-hi", "3"}});
    const auto a = run_experiment(c);
    write_artifacts(dir.string(), c, a);
    std::ifstream f(dir / "config.ini");
    std::stringstream ss;
    ss << f.rdbuf();
    CHECK(ss.str() == c.to_ini());
    CHECK(std::filesystem::exists(dir / "run.json"));
    CHECK(std::filesystem::exists(dir / "magnetization.csv"));
    CHECK(rows_of(a.files.at("magnetization.csv")).size() == 21);
    std::filesystem::remove_all(dir);
  }
}
