// Command-line frontend: calibration, single-design evaluation, CED profiles,
// worst-case profiles, window optimization, and full experiment reproduction.
//
// Exit codes: 0 success, 2 validation error, 3 computational failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "runlen/bench.hpp"
#include "runlen/calibrate.hpp"
#include "runlen/charts.hpp"
#include "runlen/mc.hpp"

namespace {

using namespace runlen;
using charts::ChartSpec;
using charts::Family;
using charts::LimitPolicy;
using charts::RunsRule;

struct ChartFlags {
  std::string family;
  std::optional<double> lambda, k, a_star, p, limit, warning, alarm;
  std::optional<int> w;
  std::string policy = "timevarying";
  std::string rr;

  void attach(CLI::App* cmd, bool with_limit = true) {
    cmd->add_option("--chart", family,
                    "family: ewma|cusum|mec|rrcusum|rrewma|ma|dma|dewma|tewma|pm|dpm")
        ->required();
    cmd->add_option("--lambda", lambda, "smoothing constant in (0,1]");
    cmd->add_option("--k", k, "cusum reference value");
    cmd->add_option("--a-star", a_star, "mec reference multiplier");
    cmd->add_option("--w", w, "window size");
    cmd->add_option("--p", p, "curve-bending exponent");
    if (with_limit) cmd->add_option("--limit", limit, "limit factor (c, h, b*, L, ...)");
    cmd->add_option("--warning", warning, "warning limit WL (rrcusum)");
    cmd->add_option("--alarm", alarm, "alarm limit AL (rrcusum; inf allowed)");
    cmd->add_option("--policy", policy, "limit policy: timevarying|asymptotic");
    cmd->add_option("--rr", rr, "runs rule: 2of2|2of3|mod2of3");
  }

  ChartSpec build(bool limit_required) const {
    ChartSpec s;
    const std::map<std::string, Family> fams = {
        {"ewma", Family::Ewma},       {"cusum", Family::Cusum},   {"mec", Family::Mec},
        {"rrcusum", Family::RrCusum}, {"rrewma", Family::RrEwma}, {"ma", Family::Ma},
        {"dma", Family::Dma},         {"dewma", Family::Dewma},   {"tewma", Family::Tewma},
        {"pm", Family::Pm},           {"dpm", Family::Dpm}};
    const auto it = fams.find(family);
    if (it == fams.end()) throw std::invalid_argument("unknown chart family: " + family);
    s.family = it->second;
    if (lambda) s.lambda = *lambda;
    if (k) s.k = *k;
    if (a_star) s.a_star = *a_star;
    if (w) s.w = *w;
    if (p) s.p = *p;
    if (limit) s.limit_factor = *limit;
    if (warning) s.warning_factor = *warning;
    if (alarm) s.alarm_factor = *alarm;
    if (policy == "asymptotic")
      s.limit_policy = LimitPolicy::Asymptotic;
    else if (policy != "timevarying")
      throw std::invalid_argument("unknown limit policy: " + policy);
    if (!rr.empty()) {
      if (rr == "2of2")
        s.rr_kind = RunsRule::TwoOfTwo;
      else if (rr == "2of3")
        s.rr_kind = RunsRule::TwoOfThree;
      else if (rr == "mod2of3")
        s.rr_kind = RunsRule::ModifiedTwoOfThree;
      else
        throw std::invalid_argument("unknown runs rule: " + rr);
    }
    if (!limit_required && !limit) {
      // placeholder; calibration will replace it
      if (s.family == Family::RrCusum) {
        if (!warning) throw std::invalid_argument("calibrating rrcusum needs --warning");
        s.alarm_factor = s.warning_factor + 1.0;
      } else {
        s.limit_factor = 1.0;
      }
    }
    s.validate();
    return s;
  }
};

void print_estimate(const char* what, const mc::RunLengthEstimate& e) {
  std::printf("%s %.6g   stderr %.3g   n %lld", what, e.mean, e.stderr_,
              static_cast<long long>(e.replications));
  if (e.conditioned_fraction < 1.0)
    std::printf("   conditioned_fraction %.4f", e.conditioned_fraction);
  if (e.informational) std::printf("   [informational: no shift]");
  std::printf("\n");
}

void write_single(const std::string& out, const std::string& format, const std::string& id,
                  const std::vector<std::string>& rows, const std::vector<std::string>& cols,
                  const std::vector<bench::Cell>& cells) {
  bench::ReportTable t;
  t.id = id;
  t.title = id;
  t.init(rows, cols);
  t.cells = cells;
  t.seed = bench::kDefaultSeed;
  if (format == "json") {
    std::ofstream f(out);
    if (!f) throw std::runtime_error("cannot open " + out);
    f << bench::to_json(t).dump(2) << '\n';
  } else if (format == "csv") {
    bench::write_csv(t, out);
  } else {
    throw std::invalid_argument("unknown format: " + format);
  }
}

int run(int argc, char** argv) {
  CLI::App app{"run-length analysis of control charts"};
  app.require_subcommand(1);
  app.fallthrough();

  std::uint64_t seed = bench::kDefaultSeed;
  int threads = 0;
  app.add_option("--seed", seed, "master seed (fixed default keeps runs reproducible)");
  app.add_option("--threads", threads, "worker threads (0: hardware, RL_THREADS env overrides)");

  auto* c_cal = app.add_subcommand("calibrate", "find the limit factor for a target in-control ARL");
  ChartFlags f_cal;
  f_cal.attach(c_cal, false);
  double target_arl = 370.0, tolerance = 0.001;
  long long cal_reps = 1'000'000;
  c_cal->add_option("--target-arl", target_arl, "in-control ARL target")->required();
  c_cal->add_option("--tolerance", tolerance, "relative tolerance band");
  c_cal->add_option("--reps", cal_reps, "replications for the final verification");

  auto* c_arl = app.add_subcommand("arl", "zero-state ARL of a design");
  ChartFlags f_arl;
  f_arl.attach(c_arl);
  double arl_delta = 0.0;
  long long arl_reps = 1'000'000;
  std::string arl_out, arl_format = "csv";
  c_arl->add_option("--delta", arl_delta, "shift size");
  c_arl->add_option("--reps", arl_reps, "replications");
  c_arl->add_option("--out", arl_out, "write the estimate to this file");
  c_arl->add_option("--format", arl_format, "csv|json");

  auto* c_ced = app.add_subcommand("ced", "conditional expected delay D_tau");
  ChartFlags f_ced;
  f_ced.attach(c_ced);
  double ced_delta = 0.0;
  long long ced_tau = 100, ced_reps = 200'000;
  std::string ced_out, ced_format = "csv";
  c_ced->add_option("--delta", ced_delta, "shift size");
  c_ced->add_option("--tau", ced_tau, "change-point position");
  c_ced->add_option("--reps", ced_reps, "surviving-run target");
  c_ced->add_option("--out", ced_out, "write the estimate to this file");
  c_ced->add_option("--format", ced_format, "csv|json");

  auto* c_prof = app.add_subcommand("profile", "D_tau profile for tau = 1..tau-max");
  ChartFlags f_prof;
  f_prof.attach(c_prof);
  double prof_delta = 0.0;
  long long prof_tau_max = 100, prof_reps = 200'000;
  std::string prof_out, prof_format = "csv";
  c_prof->add_option("--delta", prof_delta, "shift size");
  c_prof->add_option("--tau-max", prof_tau_max, "largest change point");
  c_prof->add_option("--reps", prof_reps, "surviving-run target per tau");
  c_prof->add_option("--out", prof_out, "write the profile to this file");
  c_prof->add_option("--format", prof_format, "csv|json");

  auto* c_wc = app.add_subcommand("worstcase", "delay conditioned on the first observation");
  ChartFlags f_wc;
  f_wc.attach(c_wc);
  double wc_delta = 0.5, x1_min = -4.0, x1_max = 4.0, x1_step = 0.25;
  long long wc_reps = 200'000;
  std::string wc_out, wc_format = "csv";
  c_wc->add_option("--delta", wc_delta, "shift size (applies from t = 2)");
  c_wc->add_option("--x1-min", x1_min, "grid start");
  c_wc->add_option("--x1-max", x1_max, "grid end");
  c_wc->add_option("--x1-step", x1_step, "grid step");
  c_wc->add_option("--reps", wc_reps, "replications per grid point");
  c_wc->add_option("--out", wc_out, "write the profile to this file");
  c_wc->add_option("--format", wc_format, "csv|json");

  auto* c_opt = app.add_subcommand("optimize", "window minimizing D_100 at a shift");
  std::string opt_family = "ma";
  double opt_delta = 0.6, opt_target = 370.0;
  int w_min = 2, w_max = 30;
  long long opt_reps = 200'000;
  c_opt->add_option("--chart", opt_family, "ma|dma")->required();
  c_opt->add_option("--delta", opt_delta, "shift size")->required();
  c_opt->add_option("--target-arl", opt_target, "in-control ARL target");
  c_opt->add_option("--w-min", w_min, "smallest window");
  c_opt->add_option("--w-max", w_max, "largest window");
  c_opt->add_option("--reps", opt_reps, "surviving-run target per window");

  auto* c_rep = app.add_subcommand("reproduce", "run a packaged experiment and persist its tables");
  std::string rep_id, rep_out = ".", rep_paper_values = "paper_values";
  long long rep_reps = 0, rep_profile_reps = 0;
  bool rep_paper_scale = false;
  c_rep->add_option("--experiment", rep_id, "experiment id (see `list`)")->required();
  c_rep->add_option("--out", rep_out, "output directory");
  c_rep->add_option("--reps", rep_reps, "override replications per table cell");
  c_rep->add_option("--profile-reps", rep_profile_reps, "override surviving-run target per ced cell");
  c_rep->add_option("--paper-values", rep_paper_values, "directory with the reference CSVs");
  c_rep->add_flag("--paper-scale", rep_paper_scale, "publication-scale replication counts (slow)");

  auto* c_list = app.add_subcommand("list", "enumerate experiment ids");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*c_cal) {
      const ChartSpec proto = f_cal.build(false);
      calibrate::CalibrationTarget t;
      t.in_control_arl = target_arl;
      t.tolerance = tolerance;
      t.n_reps_final = cal_reps;
      mc::McOptions o;
      o.seed = seed;
      o.threads = threads;
      const auto res = calibrate::calibrate_limit(proto, t, o);
      std::printf("limit_factor %.6g\n", res.limit_factor);
      print_estimate("achieved in-control ARL", res.achieved);
    } else if (*c_arl) {
      const ChartSpec spec = f_arl.build(true);
      mc::McOptions o;
      o.reps = arl_reps;
      o.seed = seed;
      o.threads = threads;
      const auto est = mc::zero_state_arl(spec, arl_delta, o);
      if (!est.valid()) throw std::runtime_error("estimate censored at the step cap");
      print_estimate("zero-state ARL", est);
      if (!arl_out.empty())
        write_single(arl_out, arl_format, "arl", {f_arl.family},
                     {bench::detail::fmt_label(arl_delta)},
                     {{est.mean, est.stderr_, est.replications, "mc",
                       std::numeric_limits<double>::quiet_NaN()}});
    } else if (*c_ced) {
      const ChartSpec spec = f_ced.build(true);
      mc::McOptions o;
      o.reps = ced_reps;
      o.seed = seed;
      o.threads = threads;
      const auto est = mc::ced(spec, {ced_tau, ced_delta}, o);
      if (!est.valid()) throw std::runtime_error("estimate censored at the step cap");
      print_estimate("conditional expected delay", est);
      if (!ced_out.empty())
        write_single(ced_out, ced_format, "ced", {f_ced.family}, {std::to_string(ced_tau)},
                     {{est.mean, est.stderr_, est.replications, "ced",
                       std::numeric_limits<double>::quiet_NaN()}});
    } else if (*c_prof) {
      const ChartSpec spec = f_prof.build(true);
      mc::McOptions o;
      o.reps = prof_reps;
      o.seed = seed;
      o.threads = threads;
      const auto prof = mc::ced_profile(spec, prof_delta, prof_tau_max, o);
      std::vector<std::string> cols;
      std::vector<bench::Cell> cells;
      for (std::size_t i = 0; i < prof.size(); ++i) {
        std::printf("tau %4zu   D_tau %.4f   stderr %.4f\n", i + 1, prof[i].mean, prof[i].stderr_);
        cols.push_back(std::to_string(i + 1));
        cells.push_back({prof[i].mean, prof[i].stderr_, prof[i].replications, "ced",
                         std::numeric_limits<double>::quiet_NaN()});
      }
      if (!prof_out.empty())
        write_single(prof_out, prof_format, "profile", {f_prof.family}, cols, cells);
    } else if (*c_wc) {
      const ChartSpec spec = f_wc.build(true);
      std::vector<double> grid;
      for (double x = x1_min; x <= x1_max + 1e-12; x += x1_step) grid.push_back(x);
      mc::McOptions o;
      o.reps = wc_reps;
      o.seed = seed;
      o.threads = threads;
      const auto prof = mc::conditional_delay_given_x1(spec, wc_delta, grid, o);
      std::vector<std::string> cols;
      std::vector<bench::Cell> cells;
      for (const auto& pt : prof) {
        cols.push_back(bench::detail::fmt_label(pt.x1));
        if (pt.admissible) {
          std::printf("x1 %7.3f   delay %.4f   stderr %.4f\n", pt.x1, pt.est.mean, pt.est.stderr_);
          cells.push_back({pt.est.mean, pt.est.stderr_, pt.est.replications, "ced",
                           std::numeric_limits<double>::quiet_NaN()});
        } else {
          std::printf("x1 %7.3f   immediate alarm, skipped\n", pt.x1);
          cells.push_back({});
        }
      }
      if (!wc_out.empty()) write_single(wc_out, wc_format, "worstcase", {f_wc.family}, cols, cells);
    } else if (*c_opt) {
      charts::Family fam;
      if (opt_family == "ma")
        fam = charts::Family::Ma;
      else if (opt_family == "dma")
        fam = charts::Family::Dma;
      else
        throw std::invalid_argument("optimize: --chart must be ma or dma");
      calibrate::CalibrationTarget t;
      t.in_control_arl = opt_target;
      t.tolerance = 0.002;
      mc::McOptions calib;
      calib.seed = seed ^ 0xCA11B8A7Eull;
      calib.threads = threads;
      mc::McOptions ced;
      ced.reps = opt_reps;
      ced.seed = seed;
      ced.threads = threads;
      const auto res = calibrate::optimize_window(fam, opt_delta, w_min, w_max, t, calib, ced);
      for (const auto& pt : res.profile)
        std::printf("w %3d   limit %.4f   D_100 %.4f   stderr %.4f\n", pt.w, pt.limit_factor,
                    pt.d100.mean, pt.d100.stderr_);
      std::printf("optimal w: %d\n", res.w_best);
    } else if (*c_rep) {
      bench::RunOptions opts;
      opts.seed = seed;
      opts.threads = threads;
      opts.paper_values_dir = rep_paper_values;
      opts.paper_scale = rep_paper_scale;
      if (rep_reps > 0) opts.table_reps = rep_reps;
      if (rep_profile_reps > 0) opts.profile_reps = rep_profile_reps;
      const auto cfg = bench::make_experiment(rep_id);
      std::filesystem::create_directories(rep_out);
      const auto tables = bench::run_experiment(cfg, opts);
      for (const auto& t : tables) {
        bench::emit(t, rep_out);
        std::printf("wrote %s/%s.csv (+.json)  [%s]\n", rep_out.c_str(), t.id.c_str(),
                    t.title.c_str());
      }
    } else if (*c_list) {
      for (const auto& e : bench::list_experiments())
        std::printf("%-20s %s\n", e.id.c_str(), e.anchor.c_str());
    }
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::runtime_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
