#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "runlen/calibrate.hpp"
#include "runlen/charts.hpp"
#include "runlen/mc.hpp"
#include "runlen/numeric.hpp"

namespace runlen::bench {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr std::uint64_t kDefaultSeed = 0x5EEDBA5Eull;

struct Cell {
  double estimate = std::numeric_limits<double>::quiet_NaN();
  double stderr_ = 0.0;
  long long n = 0;
  std::string method;  // "mc", "ced", "closed-form", "markov", "recursion", "design"
  double paper_value = std::numeric_limits<double>::quiet_NaN();
};

/// One labelled table of results, with reference values attached where the
/// checked-in dataset has them.
struct ReportTable {
  std::string id;
  std::string title;
  std::vector<std::string> rows, cols;
  std::vector<Cell> cells;  // row-major
  std::vector<std::string> notes;
  std::uint64_t seed = 0;
  std::string version = kVersion;
  double elapsed_seconds = 0.0;

  Cell& at(std::size_t r, std::size_t c) { return cells[r * cols.size() + c]; }
  const Cell& at(std::size_t r, std::size_t c) const { return cells[r * cols.size() + c]; }

  void init(std::vector<std::string> row_labels, std::vector<std::string> col_labels) {
    rows = std::move(row_labels);
    cols = std::move(col_labels);
    cells.assign(rows.size() * cols.size(), Cell{});
  }
};

struct RunOptions {
  long long table_reps = 1'000'000;    // replications per zero-state cell
  long long profile_reps = 200'000;    // surviving-run target per ced cell
  std::uint64_t seed = kDefaultSeed;
  int threads = 0;
  std::string paper_values_dir = "paper_values";
  bool paper_scale = false;  // push cell budgets to the source publication's scale

  long long cell_reps() const { return paper_scale ? 100'000'000 : table_reps; }
  long long ced_reps() const { return paper_scale ? 10'000'000 : profile_reps; }
};

// ---------------------------------------------------------------------------
// number formatting / csv / json

namespace detail {

inline std::string fmt_double(double v) {
  if (std::isnan(v)) return "";
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string fmt_label(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

}  // namespace detail

/// Reference values transcribed from the published tables; loaded from CSV so
/// "expected" stays independent of anything this library computes.
class PaperValues {
 public:
  explicit PaperValues(const std::string& dir) : dir_(dir) {}

  double lookup(const std::string& table, const std::string& row, const std::string& col) const {
    const auto& m = load(table);
    const auto it = m.find(row + "\x1f" + col);
    return it == m.end() ? std::numeric_limits<double>::quiet_NaN() : it->second;
  }

 private:
  const std::map<std::string, double>& load(const std::string& table) const {
    auto it = cache_.find(table);
    if (it != cache_.end()) return it->second;
    std::map<std::string, double> m;
    std::ifstream in(dir_ + "/" + table + ".csv");
    if (in) {
      std::string line;
      std::getline(in, line);  // header
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto c1 = line.find(',');
        const auto c2 = line.find(',', c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos) continue;
        m[line.substr(0, c1) + "\x1f" + line.substr(c1 + 1, c2 - c1 - 1)] =
            std::stod(line.substr(c2 + 1));
      }
    }
    return cache_.emplace(table, std::move(m)).first->second;
  }

  std::string dir_;
  mutable std::map<std::string, std::map<std::string, double>> cache_;
};

/// CSV in long format: one line per cell, UTF-8, '.' decimal separator.
inline void write_csv(const ReportTable& t, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_csv: cannot open " + path);
  out << "row,col,estimate,stderr,n,method,paper_value\n";
  for (std::size_t r = 0; r < t.rows.size(); ++r)
    for (std::size_t c = 0; c < t.cols.size(); ++c) {
      const Cell& cell = t.at(r, c);
      out << t.rows[r] << ',' << t.cols[c] << ',' << detail::fmt_double(cell.estimate) << ','
          << detail::fmt_double(cell.stderr_) << ',' << cell.n << ',' << cell.method << ','
          << detail::fmt_double(cell.paper_value) << '\n';
    }
  if (!out) throw std::runtime_error("write_csv: failed writing " + path);
}

namespace detail {

// json has no NaN literal; absent values travel as null
inline nlohmann::json jnum(double v) {
  return std::isnan(v) ? nlohmann::json() : nlohmann::json(v);
}
inline double dnum(const nlohmann::json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

}  // namespace detail

inline nlohmann::json to_json(const ReportTable& t) {
  nlohmann::json j;
  j["id"] = t.id;
  j["title"] = t.title;
  j["rows"] = t.rows;
  j["cols"] = t.cols;
  j["notes"] = t.notes;
  j["seed"] = t.seed;
  j["version"] = t.version;
  j["elapsed_seconds"] = t.elapsed_seconds;
  nlohmann::json cells = nlohmann::json::array();
  for (const Cell& c : t.cells) {
    nlohmann::json jc;
    jc["estimate"] = detail::jnum(c.estimate);
    jc["stderr"] = c.stderr_;
    jc["n"] = c.n;
    jc["method"] = c.method;
    jc["paper_value"] = detail::jnum(c.paper_value);
    cells.push_back(std::move(jc));
  }
  j["cells"] = std::move(cells);
  return j;
}

inline ReportTable from_json(const nlohmann::json& j) {
  ReportTable t;
  t.id = j.at("id").get<std::string>();
  t.title = j.at("title").get<std::string>();
  t.rows = j.at("rows").get<std::vector<std::string>>();
  t.cols = j.at("cols").get<std::vector<std::string>>();
  t.notes = j.at("notes").get<std::vector<std::string>>();
  t.seed = j.at("seed").get<std::uint64_t>();
  t.version = j.at("version").get<std::string>();
  t.elapsed_seconds = j.at("elapsed_seconds").get<double>();
  for (const auto& jc : j.at("cells")) {
    Cell c;
    c.estimate = detail::dnum(jc.at("estimate"));
    c.stderr_ = jc.at("stderr").get<double>();
    c.n = jc.at("n").get<long long>();
    c.method = jc.at("method").get<std::string>();
    c.paper_value = detail::dnum(jc.at("paper_value"));
    t.cells.push_back(std::move(c));
  }
  if (t.cells.size() != t.rows.size() * t.cols.size())
    throw std::runtime_error("from_json: cell count does not match labels");
  return t;
}

/// Persist a table as <dir>/<id>.csv plus a JSON sidecar with full metadata.
inline void emit(const ReportTable& t, const std::string& dir) {
  write_csv(t, dir + "/" + t.id + ".csv");
  std::ofstream out(dir + "/" + t.id + ".json");
  if (!out) throw std::runtime_error("emit: cannot open json sidecar for " + t.id);
  out << to_json(t).dump(2) << '\n';
  if (!out) throw std::runtime_error("emit: failed writing json sidecar for " + t.id);
}

// ---------------------------------------------------------------------------
// experiment configuration

/// One chart entering an experiment. `calibrate_to > 0` resolves the limit
/// factor by Monte-Carlo root finding before evaluation; `numeric_limit_arl`
/// does the same through the deterministic ewma backend; `numeric_eval` rows
/// are computed by the numeric backend instead of simulation.
struct DesignRow {
  std::string label;
  charts::ChartSpec spec;
  double calibrate_to = 0.0;
  double calibrate_tolerance = 0.001;
  double numeric_limit_arl = 0.0;
  bool numeric_eval = false;
};

struct ExperimentConfig {
  enum class Kind { ZeroStateTable, SteadyStateTable, CedProfile, X1Profile, WindowSearch, Table1 };

  std::string id;
  std::string anchor;  // which published table/figure this reproduces
  Kind kind = Kind::ZeroStateTable;
  std::vector<DesignRow> designs;
  std::vector<double> deltas;
  double delta_scale = 1.0;  // printed shift label -> actual shift
  long long tau = 100;
  long long tau_max = 100;
  std::vector<double> x1_grid;
  double target_arl = 0.0;  // window search and table1
  int ma_w_lo = 2, ma_w_hi = 80, dma_w_lo = 2, dma_w_hi = 60;

  void validate() const {
    const bool needs_deltas = kind != Kind::Table1 && kind != Kind::X1Profile;
    if (needs_deltas && deltas.empty())
      throw std::invalid_argument("experiment " + id + ": empty shift grid");
    if (kind == Kind::X1Profile && x1_grid.empty())
      throw std::invalid_argument("experiment " + id + ": empty x1 grid");
    if (kind != Kind::Table1 && kind != Kind::WindowSearch && designs.empty())
      throw std::invalid_argument("experiment " + id + ": no designs");
    for (const auto& d : designs)
      if (d.calibrate_to == 0.0 && d.numeric_limit_arl == 0.0) d.spec.validate();
  }
};

namespace detail {

/// Process-wide memo for Monte-Carlo calibrations, keyed by design + target.
class CalibrationCache {
 public:
  calibrate::CalibrationResult get(const charts::ChartSpec& proto, double A, double tol,
                                   const RunOptions& opts) {
    std::ostringstream key;
    const auto& s = proto;
    key << family_name(s.family) << '|' << s.lambda << '|' << s.k << '|' << s.a_star << '|' << s.w
        << '|' << s.p << '|' << s.warning_factor << '|' << static_cast<int>(s.rr_kind) << '|'
        << static_cast<int>(s.limit_policy) << '|' << A << '|' << tol << '|' << opts.seed;
    const auto it = memo_.find(key.str());
    if (it != memo_.end()) return it->second;

    calibrate::CalibrationTarget target;
    target.in_control_arl = A;
    target.tolerance = tol;
    // verification noise must sit well inside the band: stderr ~ A/sqrt(n)
    target.n_reps_final =
        std::max<long long>(1'000'000, static_cast<long long>(2.5 / (tol * tol)));
    mc::McOptions mo;
    mo.seed = opts.seed ^ 0xCA11B8A7Eull;
    mo.threads = opts.threads;
    const auto res = calibrate::calibrate_limit(proto, target, mo);
    memo_.emplace(key.str(), res);
    return res;
  }

 private:
  std::map<std::string, calibrate::CalibrationResult> memo_;
};

inline CalibrationCache& calibration_cache() {
  static CalibrationCache cache;
  return cache;
}

inline void add_note(std::vector<std::string>& notes, std::string note) {
  for (const auto& n : notes)
    if (n == note) return;
  notes.push_back(std::move(note));
}

/// Resolve a design row to a fully parameterized spec, calibrating if asked.
inline charts::ChartSpec resolve(const DesignRow& row, const RunOptions& opts,
                                 std::vector<std::string>& notes) {
  if (row.numeric_limit_arl > 0.0) {
    const double c = calibrate::calibrate_ewma_limit_numeric(row.spec.lambda, row.numeric_limit_arl,
                                                             row.spec.limit_policy);
    add_note(notes, row.label + ": limit " + fmt_double(c) + " from numeric calibration to " +
                        fmt_label(row.numeric_limit_arl));
    return row.spec.with_limit(c);
  }
  if (row.calibrate_to > 0.0) {
    const auto cal =
        calibration_cache().get(row.spec, row.calibrate_to, row.calibrate_tolerance, opts);
    add_note(notes, row.label + ": limit " + fmt_double(cal.limit_factor) +
                        " calibrated to in-control ARL " + fmt_label(row.calibrate_to) +
                        " (achieved " + fmt_label(cal.achieved.mean) + " +- " +
                        fmt_label(cal.achieved.stderr_) + ")");
    return row.spec.with_limit(cal.limit_factor);
  }
  return row.spec;
}

inline void require_valid_cell(const std::string& id, const std::string& row,
                               const std::string& col, const mc::RunLengthEstimate& est) {
  if (est.censored > 0)
    throw std::runtime_error("experiment " + id + ": censored replications in cell (" + row + ", " +
                             col + ")");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// experiment execution

inline std::vector<ReportTable> run_experiment(const ExperimentConfig& cfg,
                                               const RunOptions& opts) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const PaperValues paper(opts.paper_values_dir);
  std::vector<ReportTable> tables;
  std::vector<std::string> notes;

  const auto finish = [&](ReportTable& t) {
    t.seed = opts.seed;
    t.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    for (const std::string& n : notes) t.notes.push_back(n);
    for (std::size_t r = 0; r < t.rows.size(); ++r)
      for (std::size_t c = 0; c < t.cols.size(); ++c)
        t.at(r, c).paper_value = paper.lookup(t.id, t.rows[r], t.cols[c]);
  };

  switch (cfg.kind) {
    case ExperimentConfig::Kind::Table1: {
      // reference values k(lambda_q) in closed form; thresholds h calibrated
      ReportTable t;
      t.id = cfg.id;
      t.title = cfg.anchor;
      const std::vector<double> lambdas = {0.1, 0.25, 0.5, 0.75, 1.0};
      std::vector<std::string> cols;
      for (double l : lambdas) cols.push_back(detail::fmt_label(l));
      t.init({"k", "h"}, cols);
      for (std::size_t c = 0; c < lambdas.size(); ++c) {
        const double k = calibrate::k_from_lambda(lambdas[c], 0.5);
        t.at(0, c) = {k, 0.0, 0, "closed-form", 0.0};
        const auto cal = detail::calibration_cache().get(charts::ChartSpec::cusum(k, 4.0),
                                                         cfg.target_arl, 0.001, opts);
        t.at(1, c) = {cal.limit_factor, 0.0, cal.achieved.replications, "mc-calibrated", 0.0};
      }
      finish(t);
      tables.push_back(std::move(t));
      break;
    }

    case ExperimentConfig::Kind::ZeroStateTable: {
      ReportTable t;
      t.id = cfg.id;
      t.title = cfg.anchor;
      std::vector<std::string> rows, cols;
      for (const auto& d : cfg.designs) rows.push_back(d.label);
      for (double dl : cfg.deltas) cols.push_back(detail::fmt_label(dl));
      t.init(rows, cols);
      for (std::size_t r = 0; r < cfg.designs.size(); ++r) {
        const charts::ChartSpec spec = detail::resolve(cfg.designs[r], opts, notes);
        for (std::size_t c = 0; c < cfg.deltas.size(); ++c) {
          const double delta = cfg.deltas[c] * cfg.delta_scale;
          if (cfg.designs[r].numeric_eval) {
            const auto nr = analytic::ewma_arl_numeric(spec.lambda, spec.limit_factor, delta,
                                                       spec.limit_policy);
            t.at(r, c) = {nr.value, 0.0, 0,
                          nr.method == analytic::NumericArlResult::Method::MarkovChain
                              ? "markov"
                              : "recursion",
                          0.0};
          } else {
            mc::McOptions mo;
            mo.reps = opts.cell_reps();
            mo.seed = opts.seed + 1000 * r;
            mo.threads = opts.threads;
            const auto est = mc::zero_state_arl(spec, delta, mo);
            detail::require_valid_cell(cfg.id, rows[r], cols[c], est);
            t.at(r, c) = {est.mean, est.stderr_, est.replications, "mc", 0.0};
          }
        }
      }
      finish(t);
      tables.push_back(std::move(t));
      break;
    }

    case ExperimentConfig::Kind::SteadyStateTable: {
      ReportTable t;
      t.id = cfg.id;
      t.title = cfg.anchor;
      std::vector<std::string> rows, cols;
      for (const auto& d : cfg.designs) rows.push_back(d.label);
      for (double dl : cfg.deltas) cols.push_back(detail::fmt_label(dl));
      t.init(rows, cols);
      for (std::size_t r = 0; r < cfg.designs.size(); ++r) {
        const charts::ChartSpec spec = detail::resolve(cfg.designs[r], opts, notes);
        for (std::size_t c = 0; c < cfg.deltas.size(); ++c) {
          const double delta = cfg.deltas[c] * cfg.delta_scale;
          mc::McOptions mo;
          mo.reps = opts.ced_reps();
          mo.seed = opts.seed + 1000 * r;
          mo.threads = opts.threads;
          const auto est = mc::ced(spec, {cfg.tau, delta}, mo);
          detail::require_valid_cell(cfg.id, rows[r], cols[c], est);
          t.at(r, c) = {est.mean, est.stderr_, est.replications, "ced", 0.0};
        }
      }
      finish(t);
      tables.push_back(std::move(t));
      break;
    }

    case ExperimentConfig::Kind::CedProfile: {
      // one table per shift: rows = designs, cols = tau
      for (double dl : cfg.deltas) {
        ReportTable t;
        t.id = cfg.id + (cfg.deltas.size() > 1 ? "_d" + detail::fmt_label(dl) : "");
        t.title = cfg.anchor + " (shift " + detail::fmt_label(dl) + ")";
        std::vector<std::string> rows, cols;
        for (const auto& d : cfg.designs) rows.push_back(d.label);
        for (long long tau = 1; tau <= cfg.tau_max; ++tau)
          cols.push_back(std::to_string(tau));
        t.init(rows, cols);
        for (std::size_t r = 0; r < cfg.designs.size(); ++r) {
          const charts::ChartSpec spec = detail::resolve(cfg.designs[r], opts, notes);
          mc::McOptions mo;
          mo.reps = opts.ced_reps();
          mo.seed = opts.seed;  // common random numbers across designs and tau
          mo.threads = opts.threads;
          const auto prof = mc::ced_profile(spec, dl * cfg.delta_scale, cfg.tau_max, mo);
          for (std::size_t c = 0; c < prof.size(); ++c) {
            detail::require_valid_cell(cfg.id, rows[r], cols[c], prof[c]);
            t.at(r, c) = {prof[c].mean, prof[c].stderr_, prof[c].replications, "ced", 0.0};
          }
        }
        finish(t);
        tables.push_back(std::move(t));
      }
      break;
    }

    case ExperimentConfig::Kind::X1Profile: {
      // rows = design x shift, cols = x1 grid
      ReportTable t;
      t.id = cfg.id;
      t.title = cfg.anchor;
      std::vector<std::string> rows, cols;
      std::vector<std::pair<std::size_t, double>> tasks;
      for (std::size_t r = 0; r < cfg.designs.size(); ++r)
        for (double dl : cfg.deltas) {
          rows.push_back(cfg.designs[r].label + "_d" + detail::fmt_label(dl));
          tasks.emplace_back(r, dl);
        }
      for (double x : cfg.x1_grid) cols.push_back(detail::fmt_label(x));
      t.init(rows, cols);
      for (std::size_t i = 0; i < tasks.size(); ++i) {
        const charts::ChartSpec spec = detail::resolve(cfg.designs[tasks[i].first], opts, notes);
        mc::McOptions mo;
        mo.reps = opts.ced_reps();
        mo.seed = opts.seed;  // common random numbers across the grid
        mo.threads = opts.threads;
        const auto prof =
            mc::conditional_delay_given_x1(spec, tasks[i].second * cfg.delta_scale, cfg.x1_grid, mo);
        for (std::size_t c = 0; c < prof.size(); ++c) {
          if (!prof[c].admissible) continue;  // left NaN: x1 alarms immediately
          detail::require_valid_cell(cfg.id, rows[i], cols[c], prof[c].est);
          t.at(i, c) = {prof[c].est.mean, prof[c].est.stderr_, prof[c].est.replications, "ced", 0.0};
        }
      }
      finish(t);
      tables.push_back(std::move(t));
      break;
    }

    case ExperimentConfig::Kind::WindowSearch: {
      // summary: optimal w per shift; profiles: D_100 vs w per family. Each
      // window is calibrated once, then reused across the whole shift grid.
      ReportTable summary;
      summary.id = cfg.id;
      summary.title = cfg.anchor;
      std::vector<std::string> cols;
      for (double dl : cfg.deltas) cols.push_back(detail::fmt_label(dl));
      summary.init({"w1", "w2"}, cols);

      for (int fam = 0; fam < 2; ++fam) {
        const bool is_ma = fam == 0;
        const int w_lo = is_ma ? cfg.ma_w_lo : cfg.dma_w_lo;
        const int w_hi = is_ma ? cfg.ma_w_hi : cfg.dma_w_hi;
        ReportTable prof;
        prof.id = cfg.id + (is_ma ? "_ma" : "_dma");
        prof.title = cfg.anchor + std::string(" - D100 profiles, ") + (is_ma ? "ma" : "dma");
        std::vector<std::string> wcols;
        for (int w = w_lo; w <= w_hi; ++w) wcols.push_back(std::to_string(w));
        prof.init(cols, wcols);  // rows = shifts, cols = windows

        std::vector<double> best(cfg.deltas.size(), std::numeric_limits<double>::infinity());
        std::vector<int> argbest(cfg.deltas.size(), 0);
        for (int w = w_lo; w <= w_hi; ++w) {
          const charts::ChartSpec proto =
              is_ma ? charts::ChartSpec::ma(w, 1.0) : charts::ChartSpec::dma(w, 1.0);
          const auto cal = detail::calibration_cache().get(proto, cfg.target_arl, 0.002, opts);
          const charts::ChartSpec spec = proto.with_limit(cal.limit_factor);
          for (std::size_t d = 0; d < cfg.deltas.size(); ++d) {
            mc::McOptions mo;
            mo.reps = opts.ced_reps();
            mo.seed = opts.seed;  // common random numbers across windows
            mo.threads = opts.threads;
            const auto est = mc::ced(spec, {cfg.tau, cfg.deltas[d] * cfg.delta_scale}, mo);
            detail::require_valid_cell(cfg.id, cols[d], std::to_string(w), est);
            prof.at(d, static_cast<std::size_t>(w - w_lo)) = {est.mean, est.stderr_,
                                                              est.replications, "ced", 0.0};
            if (est.mean < best[d]) {
              best[d] = est.mean;
              argbest[d] = w;
            }
          }
        }
        for (std::size_t d = 0; d < cfg.deltas.size(); ++d)
          summary.at(static_cast<std::size_t>(fam), d) = {static_cast<double>(argbest[d]), 0.0, 0,
                                                          "argmin", 0.0};
        finish(prof);
        tables.push_back(std::move(prof));
      }
      finish(summary);
      tables.insert(tables.begin(), std::move(summary));
      break;
    }
  }
  return tables;
}

// ---------------------------------------------------------------------------
// experiment registry

struct ExperimentInfo {
  std::string id;
  std::string anchor;
};

inline ExperimentConfig make_experiment(const std::string& id);

inline std::vector<ExperimentInfo> list_experiments() {
  static const std::vector<std::string> ids = {
      "table1",         "table2",           "table3",          "table4",
      "table5",         "table6",           "table_optW",      "table_dewma_zARL",
      "table_dewma_sARL", "table_dpm_zARL", "fig_dtau05MEC",   "fig_dtau15MEC",
      "fig_arlMEC_zero", "fig_arlMEC_steady", "fig_MECworst",  "fig_madma_little",
      "fig_madmaewma_sARL", "fig_dewma_CED", "fig_dpm_CED",
  };
  std::vector<ExperimentInfo> out;
  for (const auto& id : ids) out.push_back({id, make_experiment(id).anchor});
  return out;
}

namespace detail {

inline DesignRow mc_row(std::string label, charts::ChartSpec spec) {
  return DesignRow{std::move(label), std::move(spec), 0.0, 0.001, 0.0, false};
}
inline DesignRow calibrated_row(std::string label, charts::ChartSpec proto, double A,
                                double tol = 0.001) {
  return DesignRow{std::move(label), std::move(proto), A, tol, 0.0, false};
}
inline DesignRow numeric_ewma_row(std::string label, double lambda, double A) {
  return DesignRow{std::move(label), charts::ChartSpec::ewma(lambda, 1.0), 0.0, 0.001, A, true};
}
/// EWMA row whose limit comes from the numeric backend but whose cells are
/// simulated (used where the comparison must share the MC protocol).
inline DesignRow mc_ewma_row(std::string label, double lambda, double A) {
  return DesignRow{std::move(label), charts::ChartSpec::ewma(lambda, 1.0), 0.0, 0.001, A, false};
}

}  // namespace detail

inline ExperimentConfig make_experiment(const std::string& id) {
  using charts::ChartSpec;
  using charts::RunsRule;
  using detail::calibrated_row;
  using detail::mc_ewma_row;
  using detail::mc_row;
  using detail::numeric_ewma_row;
  const double inf = std::numeric_limits<double>::infinity();
  const double s5 = std::sqrt(5.0);

  ExperimentConfig cfg;
  cfg.id = id;

  const std::vector<double> rr_deltas = {0.25, 0.5, 0.75, 1.0, 1.5, 2.0};
  const std::vector<double> ewma_deltas = {0.0, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0};

  if (id == "table1") {
    cfg.kind = ExperimentConfig::Kind::Table1;
    cfg.anchor = "Table 1: matched reference values k and thresholds h, in-control ARL 170";
    cfg.target_arl = 170.0;
  } else if (id == "table2") {
    cfg.kind = ExperimentConfig::Kind::ZeroStateTable;
    cfg.anchor = "Table 2: runs-rule CUSUM designs, high-replication rerun";
    cfg.deltas = rr_deltas;
    const double k = 0.5;
    cfg.designs = {
        mc_row("2of2_WL3.42_AL4.8", ChartSpec::rr_cusum(k, 3.42, 4.8, RunsRule::TwoOfTwo)),
        mc_row("2of2_WL3.44_AL4.6", ChartSpec::rr_cusum(k, 3.44, 4.6, RunsRule::TwoOfTwo)),
        mc_row("2of2_WL3.48_AL4.4", ChartSpec::rr_cusum(k, 3.48, 4.4, RunsRule::TwoOfTwo)),
        mc_row("2of2_WL3.53_AL4.2", ChartSpec::rr_cusum(k, 3.53, 4.2, RunsRule::TwoOfTwo)),
        mc_row("2of3_WL3.5_AL4.44", ChartSpec::rr_cusum(k, 3.5, 4.44, RunsRule::TwoOfThree)),
        mc_row("2of3_WL3.6_AL4.19", ChartSpec::rr_cusum(k, 3.6, 4.19, RunsRule::TwoOfThree)),
        mc_row("2of3_WL3.7_AL4.08", ChartSpec::rr_cusum(k, 3.7, 4.08, RunsRule::TwoOfThree)),
        mc_row("2of3_WL3.8_AL4.03", ChartSpec::rr_cusum(k, 3.8, 4.03, RunsRule::TwoOfThree)),
    };
  } else if (id == "table3") {
    cfg.kind = ExperimentConfig::Kind::ZeroStateTable;
    cfg.anchor = "Table 3: corrected runs-rule CUSUM vs standard CUSUM, in-control ARL 168";
    cfg.deltas = rr_deltas;
    const double k = 0.5;
    cfg.designs = {
        mc_row("2of2_WL3.42_ALinf", ChartSpec::rr_cusum(k, 3.42, inf, RunsRule::TwoOfTwo)),
        mc_row("2of2_WL3.44_AL4.65", ChartSpec::rr_cusum(k, 3.44, 4.65, RunsRule::TwoOfTwo)),
        mc_row("2of2_WL3.48_AL4.38", ChartSpec::rr_cusum(k, 3.48, 4.38, RunsRule::TwoOfTwo)),
        mc_row("2of2_WL3.53_AL4.23", ChartSpec::rr_cusum(k, 3.53, 4.23, RunsRule::TwoOfTwo)),
        mc_row("2of3_WL3.5_AL4.52", ChartSpec::rr_cusum(k, 3.5, 4.52, RunsRule::TwoOfThree)),
        mc_row("2of3_WL3.6_AL4.18", ChartSpec::rr_cusum(k, 3.6, 4.18, RunsRule::TwoOfThree)),
        mc_row("2of3_WL3.7_AL4.08", ChartSpec::rr_cusum(k, 3.7, 4.08, RunsRule::TwoOfThree)),
        mc_row("2of3_WL3.8_AL4.03", ChartSpec::rr_cusum(k, 3.8, 4.03, RunsRule::TwoOfThree)),
        mc_row("cusum_k0.5_h4.002", ChartSpec::cusum(0.5, 4.002)),
        mc_row("cusum_k0.4933_h4.045", ChartSpec::cusum(0.4933, 4.045)),
        mc_row("cusum_k0.49_h4.067", ChartSpec::cusum(0.49, 4.067)),
        mc_row("cusum_k0.48_h4.134", ChartSpec::cusum(0.48, 4.134)),
    };
  } else if (id == "table4") {
    cfg.kind = ExperimentConfig::Kind::ZeroStateTable;
    cfg.anchor = "Table 4: 2-of-2 runs-rule EWMA vs standard EWMA, in-control ARL 170";
    cfg.deltas = ewma_deltas;
    cfg.designs = {
        mc_row("rr2of2_l0.1", ChartSpec::rr_ewma(0.1, 2.145, RunsRule::TwoOfTwo)),
        mc_ewma_row("std_l0.1", 0.1, 170.0),
        mc_row("rr2of2_l0.25", ChartSpec::rr_ewma(0.25, 2.184, RunsRule::TwoOfTwo)),
        mc_ewma_row("std_l0.25", 0.25, 170.0),
        mc_row("rr2of2_l0.5", ChartSpec::rr_ewma(0.5, 2.034, RunsRule::TwoOfTwo)),
        mc_ewma_row("std_l0.5", 0.5, 170.0),
        mc_row("rr2of2_l0.75", ChartSpec::rr_ewma(0.75, 1.830, RunsRule::TwoOfTwo)),
        mc_ewma_row("std_l0.75", 0.75, 170.0),
    };
  } else if (id == "table5") {
    cfg.kind = ExperimentConfig::Kind::ZeroStateTable;
    cfg.anchor = "Table 5: 2-of-3 EWMA variants vs standard EWMA, lambda 0.1, in-control ARL 168";
    cfg.deltas = ewma_deltas;
    cfg.designs = {
        mc_row("mod2of3", ChartSpec::rr_ewma(0.1, 2.158, RunsRule::ModifiedTwoOfThree)),
        mc_row("common2of3", ChartSpec::rr_ewma(0.1, 2.158, RunsRule::TwoOfThree)),
        numeric_ewma_row("std", 0.1, 168.0),
    };
  } else if (id == "table6") {
    cfg.kind = ExperimentConfig::Kind::ZeroStateTable;
    cfg.anchor = "Table 6: matched DMA/MA/EWMA designs, nominal in-control ARL 370";
    cfg.deltas = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0, 1.25, 1.5, 2.0, 3.0};
    // Each simulated design is calibrated to its own published in-control
    // level (the measurable signature of the original design).
    cfg.designs = {
        calibrated_row("dma_w2", ChartSpec::dma(2, 1.0), 371.5, 0.0006),
        calibrated_row("ma_w3", ChartSpec::ma(3, 1.0), 369.8, 0.0006),
        numeric_ewma_row("ewma_l0.545", 0.545, 370.0),
        calibrated_row("dma_w3", ChartSpec::dma(3, 1.0), 370.3, 0.0006),
        calibrated_row("ma_w4", ChartSpec::ma(4, 1.0), 370.5, 0.0006),
        numeric_ewma_row("ewma_l0.380", 0.380, 370.0),
        calibrated_row("dma_w4", ChartSpec::dma(4, 1.0), 369.6),
        calibrated_row("ma_w6", ChartSpec::ma(6, 1.0), 370.8),
        numeric_ewma_row("ewma_l0.293", 0.293, 370.0),
        calibrated_row("dma_w5", ChartSpec::dma(5, 1.0), 369.7),
        calibrated_row("ma_w7", ChartSpec::ma(7, 1.0), 370.8),
        numeric_ewma_row("ewma_l0.239", 0.239, 370.0),
        calibrated_row("dma_w6", ChartSpec::dma(6, 1.0), 370.6),
        calibrated_row("ma_w9", ChartSpec::ma(9, 1.0), 370.4),
        numeric_ewma_row("ewma_l0.202", 0.202, 370.0),
    };
  } else if (id == "table_optW") {
    cfg.kind = ExperimentConfig::Kind::WindowSearch;
    cfg.anchor = "Optimal windows minimizing D_100, in-control ARL 370";
    cfg.deltas = {0.2, 0.4, 0.6, 0.8, 1.0, 1.25, 1.5, 1.75, 2.0, 2.5, 3.0};
    cfg.target_arl = 370.0;
    cfg.ma_w_lo = 2;
    cfg.ma_w_hi = 80;
    cfg.dma_w_lo = 2;
    cfg.dma_w_hi = 60;
  } else if (id == "table_dewma_zARL") {
    cfg.kind = ExperimentConfig::Kind::ZeroStateTable;
    cfg.anchor = "Zero-state ARL of DEWMA and matched EWMA, in-control ARL 200";
    cfg.deltas = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 1.0, 1.5, 2.0};
    cfg.delta_scale = s5;  // shifts are printed as delta/sqrt(5)
    cfg.designs = {
        calibrated_row("dewma_l0.1", ChartSpec::dewma(0.1, 1.0), 199.9, 0.0008),
        numeric_ewma_row("ewma_l0.05", 0.05, 200.0),
    };
  } else if (id == "table_dewma_sARL") {
    cfg.kind = ExperimentConfig::Kind::SteadyStateTable;
    cfg.anchor = "Steady-state (D_100) ARL of TEWMA/DEWMA/EWMA, in-control ARL 200";
    cfg.deltas = {0.1, 0.2, 0.3, 0.4, 0.5, 1.0, 1.5, 2.0};
    cfg.delta_scale = s5;
    cfg.tau = 100;
    cfg.designs = {
        mc_row("tewma_l0.13", ChartSpec::tewma(0.13, 1.91)),
        calibrated_row("dewma_l0.1", ChartSpec::dewma(0.1, 1.0), 199.9, 0.0008),
        mc_ewma_row("ewma_l0.05", 0.05, 200.0),
    };
  } else if (id == "table_dpm_zARL") {
    cfg.kind = ExperimentConfig::Kind::ZeroStateTable;
    cfg.anchor = "Zero-state ARL of PM/DPM (p = 0.35) and EWMA designs, in-control ARL 200";
    cfg.deltas = {0.0, 0.25, 0.35, 0.5, 0.75, 1.0, 1.5, 2.0};
    cfg.designs = {
        mc_row("pm", ChartSpec::pm(0.35, 6.415)),
        mc_row("dpm", ChartSpec::dpm(0.35, 2.596)),
        numeric_ewma_row("ewma1_l0.05", 0.05, 200.0),
        numeric_ewma_row("ewma2_l0.007", 0.007, 200.0),
    };
  } else if (id == "fig_dtau05MEC" || id == "fig_dtau15MEC") {
    cfg.kind = ExperimentConfig::Kind::CedProfile;
    cfg.anchor = "CED profiles D_tau for MEC vs matched CUSUM, in-control ARL 170";
    cfg.deltas = {id == "fig_dtau05MEC" ? 0.5 : 1.5};
    cfg.tau_max = 100;
    cfg.designs = {
        calibrated_row("mec_lq0.1", ChartSpec::mec(0.1, 0.5, 1.0), 170.0),
        calibrated_row("cusum_k0.1147", ChartSpec::cusum(calibrate::k_from_lambda(0.1, 0.5), 1.0),
                       170.0),
        calibrated_row("mec_lq0.25", ChartSpec::mec(0.25, 0.5, 1.0), 170.0),
        calibrated_row("cusum_k0.1890", ChartSpec::cusum(calibrate::k_from_lambda(0.25, 0.5), 1.0),
                       170.0),
        calibrated_row("cusum_k0.5", ChartSpec::cusum(0.5, 1.0), 170.0),
    };
  } else if (id == "fig_arlMEC_zero" || id == "fig_arlMEC_steady") {
    cfg.kind = id == "fig_arlMEC_zero" ? ExperimentConfig::Kind::ZeroStateTable
                                       : ExperimentConfig::Kind::SteadyStateTable;
    cfg.anchor = "Zero- and steady-state ARL of MEC and matched CUSUM vs shift, in-control 170";
    cfg.deltas = {0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 2.0, 2.5, 3.0};
    cfg.tau = 100;
    cfg.designs = {
        calibrated_row("mec_lq0.1", ChartSpec::mec(0.1, 0.5, 1.0), 170.0),
        calibrated_row("cusum_k0.1147", ChartSpec::cusum(calibrate::k_from_lambda(0.1, 0.5), 1.0),
                       170.0),
        calibrated_row("mec_lq0.25", ChartSpec::mec(0.25, 0.5, 1.0), 170.0),
        calibrated_row("cusum_k0.1890", ChartSpec::cusum(calibrate::k_from_lambda(0.25, 0.5), 1.0),
                       170.0),
    };
  } else if (id == "fig_MECworst") {
    cfg.kind = ExperimentConfig::Kind::X1Profile;
    cfg.anchor = "Out-of-control delay conditioned on the first observation, in-control ARL 170";
    cfg.deltas = {0.5, 0.75, 1.0};
    for (double x = -4.0; x <= 4.0 + 1e-9; x += 0.25) cfg.x1_grid.push_back(x);
    cfg.designs = {
        calibrated_row("mec_lq0.1", ChartSpec::mec(0.1, 0.5, 1.0), 170.0),
        calibrated_row("mec_lq0.25", ChartSpec::mec(0.25, 0.5, 1.0), 170.0),
        calibrated_row("cusum_k0.5", ChartSpec::cusum(0.5, 1.0), 170.0),
    };
  } else if (id == "fig_madma_little") {
    cfg.kind = ExperimentConfig::Kind::CedProfile;
    cfg.anchor = "CED profiles of DMA(6), MA(9), EWMA(0.202), in-control ARL 370";
    cfg.deltas = {0.6, 1.0, 2.0, 3.0};
    cfg.tau_max = 100;
    cfg.designs = {
        calibrated_row("dma_w6", ChartSpec::dma(6, 1.0), 370.0),
        calibrated_row("ma_w9", ChartSpec::ma(9, 1.0), 370.0),
        mc_ewma_row("ewma_l0.202", 0.202, 370.0),
    };
  } else if (id == "fig_madmaewma_sARL") {
    cfg.kind = ExperimentConfig::Kind::SteadyStateTable;
    cfg.anchor = "Steady-state ARL vs shift for the shift-optimal designs, in-control ARL 370";
    cfg.deltas = {0.2, 0.4, 0.6, 0.8, 1.0, 1.25, 1.5, 1.75, 2.0};
    cfg.tau = 100;
    cfg.designs = {
        calibrated_row("ma_w20", ChartSpec::ma(20, 1.0), 370.0),
        calibrated_row("dma_w12", ChartSpec::dma(12, 1.0), 370.0),
        mc_ewma_row("ewma_l0.069", 0.069, 370.0),
        calibrated_row("ma_w5", ChartSpec::ma(5, 1.0), 370.0),
        calibrated_row("dma_w3", ChartSpec::dma(3, 1.0), 370.0),
        mc_ewma_row("ewma_l0.255", 0.255, 370.0),
    };
  } else if (id == "fig_dewma_CED") {
    cfg.kind = ExperimentConfig::Kind::CedProfile;
    cfg.anchor = "CED profiles of DEWMA(0.1) and EWMA(0.05), in-control ARL 200";
    cfg.deltas = {0.2, 0.5, 1.0, 2.0};
    cfg.delta_scale = s5;
    cfg.tau_max = 100;
    cfg.designs = {
        calibrated_row("dewma_l0.1", ChartSpec::dewma(0.1, 1.0), 199.9, 0.0008),
        mc_ewma_row("ewma_l0.05", 0.05, 200.0),
    };
  } else if (id == "fig_dpm_CED") {
    cfg.kind = ExperimentConfig::Kind::CedProfile;
    cfg.anchor = "CED profiles of PM/DPM for p in {0.2, 0.35, 0.5} and EWMA(0.05), in-control 200";
    cfg.deltas = {0.35, 0.75, 1.0, 2.0};
    cfg.tau_max = 100;
    cfg.designs = {
        calibrated_row("pm_p0.2", ChartSpec::pm(0.2, 1.0), 200.0),
        mc_row("pm_p0.35", ChartSpec::pm(0.35, 6.415)),
        calibrated_row("pm_p0.5", ChartSpec::pm(0.5, 1.0), 200.0),
        calibrated_row("dpm_p0.2", ChartSpec::dpm(0.2, 1.0), 200.0),
        mc_row("dpm_p0.35", ChartSpec::dpm(0.35, 2.596)),
        calibrated_row("dpm_p0.5", ChartSpec::dpm(0.5, 1.0), 200.0),
        mc_ewma_row("ewma_l0.05", 0.05, 200.0),
    };
  } else {
    throw std::invalid_argument("unknown experiment id: " + id);
  }
  return cfg;
}

}  // namespace runlen::bench
