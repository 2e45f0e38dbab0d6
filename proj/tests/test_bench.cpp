#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "runlen/bench.hpp"

using namespace runlen;
using bench::ExperimentConfig;
using bench::ReportTable;
using bench::RunOptions;
using Catch::Matchers::WithinAbs;

namespace {

const std::string kPaperDir = std::string(RUNLEN_SOURCE_DIR) + "/paper_values";

ExperimentConfig tiny_config() {
  ExperimentConfig cfg;
  cfg.id = "tiny";
  cfg.anchor = "small smoke experiment";
  cfg.kind = ExperimentConfig::Kind::ZeroStateTable;
  cfg.deltas = {0.5, 1.0};
  cfg.designs = {
      {"cusum", charts::ChartSpec::cusum(0.5, 4.002), 0.0, 0.001, 0.0, false},
      {"ewma_numeric", charts::ChartSpec::ewma(0.1, 1.0), 0.0, 0.001, 168.0, true},
  };
  return cfg;
}

RunOptions tiny_opts() {
  RunOptions o;
  o.table_reps = 20'000;
  o.profile_reps = 10'000;
  o.threads = 1;
  o.paper_values_dir = kPaperDir;
  return o;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("reference dataset loads and matches the transcription") {
  bench::PaperValues pv(kPaperDir);
  CHECK_THAT(pv.lookup("table2", "2of2_WL3.42_AL4.8", "0.5"), WithinAbs(26.68, 1e-12));
  CHECK_THAT(pv.lookup("table3", "cusum_k0.5_h4.002", "2"), WithinAbs(3.34, 1e-12));
  CHECK_THAT(pv.lookup("table1", "k", "0.75"), WithinAbs(0.3873, 1e-12));
  CHECK_THAT(pv.lookup("dpm_zARL", "dpm", "0.25"), WithinAbs(31.65, 1e-12));
  CHECK_THAT(pv.lookup("dewma_sARL", "tewma_l0.13", "2"), WithinAbs(6.1, 1e-12));
  CHECK(std::isnan(pv.lookup("table2", "no_such_row", "0.5")));
  CHECK(std::isnan(pv.lookup("no_such_table", "x", "y")));
}

TEST_CASE("experiment registry enumerates valid configurations") {
  const auto infos = bench::list_experiments();
  CHECK(infos.size() == 19);
  for (const auto& info : infos) {
    const auto cfg = bench::make_experiment(info.id);
    CHECK(cfg.id == info.id);
    CHECK_NOTHROW(cfg.validate());
    CHECK_FALSE(cfg.anchor.empty());
  }
  CHECK_THROWS_AS(bench::make_experiment("table99"), std::invalid_argument);
}

TEST_CASE("degenerate configs are rejected") {
  auto cfg = tiny_config();
  cfg.deltas.clear();
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

  auto cfg2 = tiny_config();
  cfg2.designs.clear();
  CHECK_THROWS_AS(cfg2.validate(), std::invalid_argument);
}

TEST_CASE("a small experiment runs, attaches no spurious reference values") {
  const auto tables = bench::run_experiment(tiny_config(), tiny_opts());
  REQUIRE(tables.size() == 1);
  const ReportTable& t = tables[0];
  CHECK(t.rows == std::vector<std::string>{"cusum", "ewma_numeric"});
  CHECK(t.cols == std::vector<std::string>{"0.5", "1"});
  CHECK(t.cells.size() == 4);
  CHECK(t.at(0, 0).method == "mc");
  CHECK(t.at(1, 0).method == "recursion");
  CHECK(t.at(0, 0).estimate > 20.0);
  CHECK(t.at(0, 0).stderr_ > 0.0);
  // values roughly near the published levels even at smoke scale
  CHECK_THAT(t.at(0, 0).estimate, WithinAbs(26.65, 1.0));
  CHECK_THAT(t.at(1, 1).estimate, WithinAbs(6.14, 0.05));
  for (const auto& c : t.cells) CHECK(std::isnan(c.paper_value));  // id "tiny" has no reference file
  CHECK_FALSE(t.notes.empty());  // numeric calibration note
}

TEST_CASE("experiments are deterministic and emission round-trips") {
  namespace fs = std::filesystem;
  const auto run = [&](const std::string& dir) {
    fs::create_directories(dir);
    auto tables = bench::run_experiment(tiny_config(), tiny_opts());
    for (auto& t : tables) {
      t.elapsed_seconds = 0.0;  // wall time is the one legitimately varying field
      bench::emit(t, dir);
    }
  };
  const std::string d1 = "bench_out_a", d2 = "bench_out_b";
  run(d1);
  run(d2);
  CHECK(slurp(d1 + "/tiny.csv") == slurp(d2 + "/tiny.csv"));
  CHECK(slurp(d1 + "/tiny.json") == slurp(d2 + "/tiny.json"));
  CHECK(slurp(d1 + "/tiny.csv").rfind("row,col,estimate,stderr,n,method,paper_value", 0) == 0);

  // json round-trip reproduces the table exactly
  const auto tables = bench::run_experiment(tiny_config(), tiny_opts());
  const auto j = bench::to_json(tables[0]);
  const ReportTable back = bench::from_json(j);
  CHECK(back.rows == tables[0].rows);
  CHECK(back.cols == tables[0].cols);
  CHECK(back.seed == tables[0].seed);
  for (std::size_t i = 0; i < back.cells.size(); ++i) {
    CHECK(back.cells[i].estimate == tables[0].cells[i].estimate);
    CHECK(back.cells[i].stderr_ == tables[0].cells[i].stderr_);
    CHECK(back.cells[i].n == tables[0].cells[i].n);
    CHECK(back.cells[i].method == tables[0].cells[i].method);
    CHECK(std::isnan(back.cells[i].paper_value) == std::isnan(tables[0].cells[i].paper_value));
  }
  fs::remove_all(d1);
  fs::remove_all(d2);
}

TEST_CASE("reference values attach by label when the table id matches") {
  auto cfg = tiny_config();
  cfg.id = "table3";  // reuse the checked-in reference rows
  cfg.designs = {{"cusum_k0.5_h4.002", charts::ChartSpec::cusum(0.5, 4.002), 0.0, 0.001, 0.0, false}};
  cfg.deltas = {0.5, 2.0};
  const auto tables = bench::run_experiment(cfg, tiny_opts());
  CHECK_THAT(tables[0].at(0, 0).paper_value, WithinAbs(26.65, 1e-12));
  CHECK_THAT(tables[0].at(0, 1).paper_value, WithinAbs(3.34, 1e-12));
}

TEST_CASE("doubling replications shrinks cell stderr by about root two") {
  auto cfg = tiny_config();
  cfg.designs.pop_back();  // keep the simulated row only
  RunOptions o1 = tiny_opts();
  o1.table_reps = 25'000;
  RunOptions o2 = tiny_opts();
  o2.table_reps = 50'000;
  const auto t1 = bench::run_experiment(cfg, o1);
  const auto t2 = bench::run_experiment(cfg, o2);
  for (std::size_t c = 0; c < t1[0].cols.size(); ++c) {
    const double ratio = t1[0].at(0, c).stderr_ / t2[0].at(0, c).stderr_;
    CHECK(ratio > 1.15);
    CHECK(ratio < 1.75);
  }
}

TEST_CASE("censored cells fail the experiment loudly") {
  mc::McOptions mo;
  mo.reps = 1'000;
  mo.cap = 50;  // force censoring quickly
  mo.threads = 1;
  const auto est = mc::zero_state_arl(charts::ChartSpec::ewma(0.1, 60.0), 0.0, mo);
  REQUIRE(est.censored > 0);
  CHECK_THROWS_AS(bench::detail::require_valid_cell("tiny_censor", "wide", "0", est),
                  std::runtime_error);
}
