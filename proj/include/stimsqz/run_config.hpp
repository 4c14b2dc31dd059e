#pragma once

#include "stimsqz/gaussian.hpp"
#include "stimsqz/simkit.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace stimsqz {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kRunConfigVersion = 1;

/// Synthetic fringe scan used to calibrate before tracking.
struct CalibrationScan {
  std::size_t points = 24;
  std::uint64_t trials_per_point = 1000000000ULL;
};

struct SweepRanges {
  double nbar_min = 0.05;
  double nbar_max = 3.0;
  std::size_t nbar_steps = 60;
  int noon_max = 20;
};

/// Everything a CLI run needs besides flags. Mirrors the JSON config file:
///
///   {
///     "version": 1,
///     "interferometer": {"r1", "r2", "eta_h", "eta_v", "eta_internal", "overlap",
///                        "target_visibility", "phase_offset", "snl_per_photon",
///                        "dark_h", "dark_v", "mismatch_detected"},
///     "scenario": {"phases", "step_duration", "window", "repetition_rate",
///                  "repeats", "branch", "bootstrap_resamples"},
///     "calibration_scan": {"points", "trials_per_point"},
///     "ranges": {"nbar_min", "nbar_max", "nbar_steps", "noon_max"},
///     "r_sweep": [ ... ]
///   }
///
/// Every key is optional; unknown keys are errors.
struct RunConfig {
  std::string name = "custom";
  InterferometerConfig interferometer;
  /// When set, `overlap` is recalibrated so the p11 fringe has this visibility.
  std::optional<double> target_visibility;
  TrackingScenario scenario;
  CalibrationScan scan;
  SweepRanges ranges;
  std::vector<double> r_sweep;
};

/// Applies the keys of `doc` on top of `base`.
RunConfig parse_run_config(const nlohmann::json& doc, RunConfig base = {});
RunConfig load_run_config(const std::string& path, RunConfig base = {});
nlohmann::json to_json(const RunConfig& cfg);

std::vector<std::string> preset_names();
RunConfig preset(const std::string& name);

/// Interferometer with target_visibility (if any) folded into `overlap`.
InterferometerConfig resolved_interferometer(const RunConfig& cfg);

/// Offset that moves the Fisher optimum on the lower flank of the dark fringe to `target_phi`.
double phase_offset_for_optimum(InterferometerConfig cfg, double target_phi);

/// Uniformly spaced calibration scan over [0, pi) drawn from `cfg`.
std::vector<CalibrationSample> synthetic_scan(const InterferometerConfig& cfg, const CalibrationScan& scan,
                                              std::uint64_t seed);

}  // namespace stimsqz
