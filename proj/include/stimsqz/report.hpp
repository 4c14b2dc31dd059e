#pragma once

#include "stimsqz/estimation.hpp"
#include "stimsqz/gaussian.hpp"
#include "stimsqz/run_config.hpp"
#include "stimsqz/simkit.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace stimsqz {

enum class Format { kCsv, kJson };

std::string to_string(Format f);
Format format_from_string(const std::string& name);

/// Named columns of doubles. CSV and JSON renderings are byte-stable.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void add(std::vector<double> row);
  std::string render(Format f) const;
};

/// A data file produced by a command, kept in memory until written.
struct Artifact {
  std::string name;
  std::string contents;
};

struct PhiGrid {
  double min = 0.0;
  double max = 3.141592653589793;
  std::size_t steps = 181;

  std::vector<double> points() const;
};

/// p_ij over the grid.
Table fringe_table(const InterferometerConfig& cfg, const PhiGrid& grid);
Table fisher_table(const InterferometerConfig& cfg, const PhiGrid& grid, double h, Accounting accounting);
/// Peak per-photon Fisher information per squeezing value, with SNL and 5-NOON lines.
Table r_sweep_table(const InterferometerConfig& base, const std::vector<double>& r_values, double h,
                    Accounting accounting);
/// Per-trial sensitivity against n: this scheme, SNL and NOON at equal photons through the sample.
Table sensitivity_table(const SweepRanges& ranges);
/// eta_TM closed form and its numeric rediscovery against n.
Table threshold_table(const SweepRanges& ranges, const InterferometerConfig& base);
Table noon_threshold_table(const SweepRanges& ranges);

/// Gaussian click probabilities against the Fock oracle.
struct OracleCase {
  double r = 0.0;
  double eta = 1.0;
  int n_max = 0;
  double truncation_bound = 0.0;
  double max_abs_diff = 0.0;
};

struct OracleReport {
  std::size_t grid_points = 0;
  double tolerance = 0.0;
  std::vector<OracleCase> cases;

  double max_abs_diff() const;
  bool passed() const { return max_abs_diff() < tolerance; }
};

/// Symmetric configs with overlap 1 on a uniform grid over [0, pi], truncation
/// chosen so the tail bound stays below `truncation_budget`.
OracleReport oracle_validation(const std::vector<double>& r_values, const std::vector<double>& etas,
                               std::size_t grid_points = 73, double truncation_budget = 1e-8,
                               double tolerance = 1e-6);

/// Calibrate against a synthetic scan of the config's own interferometer.
CalibrationModel calibrate_from_scan(const InterferometerConfig& truth, const CalibrationScan& scan,
                                     std::uint64_t seed);

struct TrackingBundle {
  CalibrationModel calibration;
  TrackingRun run;
  SensitivityReport report;
};

TrackingBundle track(const RunConfig& cfg, Accounting accounting);

/// Tracking CSV rows parsed back: window index and counts.
struct CountRecord {
  std::size_t window = 0;
  Counts counts{};
};
std::vector<CountRecord> read_tracking_counts(std::istream& in);

/// Every data file a preset produces.
std::vector<Artifact> preset_artifacts(const std::string& name, Format format, std::uint64_t seed,
                                       Accounting accounting, double h);

}  // namespace stimsqz
