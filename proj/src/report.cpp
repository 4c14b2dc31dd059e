#include "stimsqz/report.hpp"

#include "stimsqz/detection.hpp"
#include "stimsqz/fock.hpp"
#include "stimsqz/metrology.hpp"

#include <cmath>
#include <istream>
#include <locale>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace stimsqz {
namespace {

constexpr double kMeasuredFisherPerPhoton = 11.6;
constexpr double kReportedEnhancementDb = 3.56;
constexpr double kReportedBestDeltaPhi = 0.002;

std::ostringstream number_stream() {
  std::ostringstream out;
  out.imbue(std::locale::classic());
  out.precision(15);
  return out;
}

std::vector<double> nbar_grid(const SweepRanges& ranges) {
  std::vector<double> out;
  for (std::size_t k = 0; k < ranges.nbar_steps; ++k) {
    out.push_back(ranges.nbar_min +
                  (ranges.nbar_max - ranges.nbar_min) * static_cast<double>(k) / (ranges.nbar_steps - 1));
  }
  return out;
}

std::string dump(const nlohmann::json& doc) { return doc.dump(2) + "\n"; }

std::string ext(Format f) { return f == Format::kCsv ? ".csv" : ".json"; }

}  // namespace

std::string to_string(Format f) { return f == Format::kCsv ? "csv" : "json"; }

Format format_from_string(const std::string& name) {
  if (name == "csv") return Format::kCsv;
  if (name == "json") return Format::kJson;
  throw std::invalid_argument("unknown format '" + name + "' (expected csv|json)");
}

void Table::add(std::vector<double> row) {
  if (row.size() != columns.size()) throw std::logic_error("table row width does not match the header");
  rows.push_back(std::move(row));
}

std::string Table::render(Format f) const {
  if (f == Format::kJson) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& row : rows) {
      nlohmann::json obj = nlohmann::json::object();
      for (std::size_t c = 0; c < columns.size(); ++c) obj[columns[c]] = row[c];
      out.push_back(obj);
    }
    return dump(out);
  }
  auto out = number_stream();
  for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << columns[c];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << row[c];
    out << '\n';
  }
  return out.str();
}

std::vector<double> PhiGrid::points() const {
  if (steps < 2) throw std::invalid_argument("phase grid needs at least two points");
  if (!(max > min)) throw std::invalid_argument("phase grid needs phi-max > phi-min");
  std::vector<double> out;
  for (std::size_t k = 0; k < steps; ++k) out.push_back(min + (max - min) * static_cast<double>(k) / (steps - 1));
  return out;
}

Table fringe_table(const InterferometerConfig& cfg, const PhiGrid& grid) {
  Table t{{"phi", "p00", "p01", "p10", "p11"}, {}};
  for (double phi : grid.points()) {
    const auto p = interferometer_clicks(cfg, phi);
    t.add({phi, p.p00, p.p01, p.p10, p.p11});
  }
  return t;
}

Table fisher_table(const InterferometerConfig& cfg, const PhiGrid& grid, double h, Accounting accounting) {
  Table t{{"phi", "fisher_per_trial", "photons_through_sample", "fisher_per_photon", "snl_per_photon",
           "enhancement_db"},
          {}};
  for (const auto& r : fisher_sweep(cfg, grid.points(), h, accounting)) {
    t.add({r.phi, r.fisher_per_trial, r.mean_photons_through_sample, r.fisher_per_photon, r.snl_per_photon,
           r.enhancement_db});
  }
  return t;
}

Table r_sweep_table(const InterferometerConfig& base, const std::vector<double>& r_values, double h,
                    Accounting accounting) {
  Table t{{"r", "nbar", "best_phi", "fisher_per_photon", "ideal_per_photon", "snl_per_photon", "noon5_per_photon"},
          {}};
  for (double r : r_values) {
    InterferometerConfig cfg = base;
    cfg.r1 = r;
    cfg.r2 = r;
    const auto best = best_fisher_report(cfg, h, accounting);
    const double ideal = best_fisher_report(InterferometerConfig::ideal(r), h, accounting).fisher_per_photon;
    t.add({r, mean_photon_ideal(r), best.phi, best.fisher_per_photon, ideal, cfg.snl_per_photon,
           noon_fisher_per_photon(5, 1.0)});
  }
  return t;
}

Table sensitivity_table(const SweepRanges& ranges) {
  Table t{{"nbar", "scheme", "snl", "noon"}, {}};
  for (double n : nbar_grid(ranges)) {
    t.add({n, heisenberg_sensitivity(n), 1.0 / std::sqrt(2.0 * n), 1.0 / (2.0 * n)});
  }
  return t;
}

Table threshold_table(const SweepRanges& ranges, const InterferometerConfig& base) {
  Table t{{"nbar", "eta_tm", "eta_tm_numeric"}, {}};
  for (double n : nbar_grid(ranges)) t.add({n, threshold_tm(n), threshold_tm_numeric(base, n)});
  return t;
}

Table noon_threshold_table(const SweepRanges& ranges) {
  Table t{{"N", "eta_noon"}, {}};
  for (int n = 1; n <= ranges.noon_max; ++n) t.add({static_cast<double>(n), threshold_noon(n)});
  return t;
}

double OracleReport::max_abs_diff() const {
  double worst = 0.0;
  for (const auto& c : cases) worst = std::max(worst, c.max_abs_diff);
  return worst;
}

OracleReport oracle_validation(const std::vector<double>& r_values, const std::vector<double>& etas,
                               std::size_t grid_points, double truncation_budget, double tolerance) {
  if (grid_points < 2) throw std::invalid_argument("oracle grid needs at least two points");
  OracleReport rep;
  rep.grid_points = grid_points;
  rep.tolerance = tolerance;
  for (double r : r_values) {
    for (double eta : etas) {
      auto cfg = InterferometerConfig::ideal(r);
      cfg.eta_h = eta;
      cfg.eta_v = eta;
      OracleCase c;
      c.r = r;
      c.eta = eta;
      c.n_max = fock::required_n_max(2.0 * r, truncation_budget);
      c.truncation_bound = fock::truncation_error_bound(2.0 * r, c.n_max);
      for (std::size_t k = 0; k < grid_points; ++k) {
        const double phi = std::numbers::pi * static_cast<double>(k) / static_cast<double>(grid_points - 1);
        const auto a = fock::simulate_fock(cfg, phi, c.n_max, truncation_budget).as_array();
        const auto b = interferometer_clicks(cfg, phi).as_array();
        for (int j = 0; j < 4; ++j) c.max_abs_diff = std::max(c.max_abs_diff, std::abs(a[j] - b[j]));
      }
      rep.cases.push_back(c);
    }
  }
  return rep;
}

CalibrationModel calibrate_from_scan(const InterferometerConfig& truth, const CalibrationScan& scan,
                                     std::uint64_t seed) {
  // Start from a deliberately rough guess so the fit does real work.
  InterferometerConfig initial = truth;
  initial.r1 = truth.r1 * 0.9;
  initial.r2 = truth.r2 * 0.9;
  initial.eta_h = std::min(1.0, truth.eta_h * 0.95);
  initial.eta_v = std::min(1.0, truth.eta_v * 0.95);
  initial.overlap = std::max(0.0, truth.overlap - 0.01);
  initial.phase_offset = truth.phase_offset + 0.02;
  return calibrate(synthetic_scan(truth, scan, seed), initial);
}

TrackingBundle track(const RunConfig& cfg, Accounting accounting) {
  const InterferometerConfig truth = resolved_interferometer(cfg);
  auto cal = calibrate_from_scan(truth, cfg.scan, cfg.scenario.seed);
  auto run = run_tracking(cfg.scenario, truth, cal);
  SensitivityReport report;
  if (!run.phases.empty()) report = sensitivity_report(run, truth.snl_per_photon, accounting);
  return {std::move(cal), std::move(run), std::move(report)};
}

std::vector<CountRecord> read_tracking_counts(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("counts file is empty");
  std::vector<std::string> header;
  {
    std::istringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) header.push_back(cell);
  }
  auto column = [&](const std::string& name) {
    for (std::size_t k = 0; k < header.size(); ++k) {
      if (header[k] == name) return k;
    }
    throw std::invalid_argument("counts file lacks column '" + name + "'");
  };
  const std::size_t cw = column("window");
  const std::size_t cn[4] = {column("n00"), column("n01"), column("n10"), column("n11")};
  std::vector<CountRecord> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() != header.size()) {
      throw std::invalid_argument("counts file line " + std::to_string(line_no) + " has the wrong width");
    }
    try {
      CountRecord rec;
      rec.window = static_cast<std::size_t>(std::stoull(cells[cw]));
      for (int j = 0; j < 4; ++j) rec.counts[j] = std::stoull(cells[cn[j]]);
      out.push_back(rec);
    } catch (const std::logic_error&) {
      throw std::invalid_argument("counts file line " + std::to_string(line_no) + " is not numeric");
    }
  }
  return out;
}

std::vector<Artifact> preset_artifacts(const std::string& name, Format format, std::uint64_t seed,
                                       Accounting accounting, double h) {
  RunConfig cfg = preset(name);
  cfg.scenario.seed = seed;
  std::vector<Artifact> out;
  if (name == "fig1b") {
    out.push_back({"fig1b_sensitivity" + ext(format), sensitivity_table(cfg.ranges).render(format)});
  } else if (name == "fig1c") {
    out.push_back({"fig1c_eta_tm" + ext(format), threshold_table(cfg.ranges, cfg.interferometer).render(format)});
    out.push_back({"fig1c_eta_noon" + ext(format), noon_threshold_table(cfg.ranges).render(format)});
  } else if (name == "fig3") {
    const auto ifm = resolved_interferometer(cfg);
    const PhiGrid grid{0.0, std::numbers::pi, 181};
    out.push_back({"fig3a_fringes" + ext(format), fringe_table(ifm, grid).render(format)});
    out.push_back({"fig3b_fisher" + ext(format), fisher_table(ifm, grid, h, accounting).render(format)});
    out.push_back({"fig3c_r_sweep" + ext(format), r_sweep_table(ifm, cfg.r_sweep, h, accounting).render(format)});
    const auto best = best_fisher_report(ifm, h, accounting);
    const auto ideal = best_fisher_report(InterferometerConfig::ideal(ifm.r1), h, accounting);
    out.push_back({"fig3_summary.json", dump({{"overlap", ifm.overlap},
                                              {"visibility_p11", p11_visibility(ifm)},
                                              {"accounting", to_string(accounting)},
                                              {"best_phi", best.phi},
                                              {"best_fisher_per_photon", best.fisher_per_photon},
                                              {"ideal_fisher_per_photon", ideal.fisher_per_photon},
                                              {"measured_fisher_per_photon", kMeasuredFisherPerPhoton},
                                              {"snl_per_photon", ifm.snl_per_photon},
                                              {"noon5_per_photon", noon_fisher_per_photon(5, 1.0)}})});
  } else if (name == "fig4") {
    const auto bundle = track(cfg, accounting);
    std::ostringstream csv;
    write_tracking_csv(csv, bundle.run);
    auto summary = tracking_summary(bundle.run, bundle.report);
    summary["reported_enhancement_db"] = kReportedEnhancementDb;
    summary["reported_best_delta_phi"] = kReportedBestDeltaPhi;
    summary["repetition_rate"] = cfg.scenario.repetition_rate;
    out.push_back({"fig4_calibration.json", dump(to_json(bundle.calibration))});
    out.push_back({"fig4_tracking.csv", csv.str()});
    out.push_back({"fig4_summary.json", dump(summary)});
  } else {
    throw ConfigError("unknown preset '" + name + "' (expected fig1b|fig1c|fig3|fig4)");
  }
  return out;
}

}  // namespace stimsqz
