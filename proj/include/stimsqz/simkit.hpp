#pragma once

#include "stimsqz/estimation.hpp"
#include "stimsqz/gaussian.hpp"
#include "stimsqz/random.hpp"

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <numbers>
#include <vector>

namespace stimsqz {

inline constexpr double kDefaultRepetitionRate = 7.6e7;  // trials per second
inline constexpr int kTrackingFormatVersion = 1;

/// Multinomial draw of `trials` outcomes at phase `phi`, from stream `stream` of `seed`.
Counts sample_clicks(const InterferometerConfig& cfg, double phi, std::uint64_t trials, std::uint64_t seed,
                     std::uint64_t stream = 0);

struct PhaseStep {
  double phi_set = 0.0;
  double duration = 0.0;  // seconds
};

struct TrackingScenario {
  std::vector<PhaseStep> phase_schedule;
  double window = 0.2;  // seconds
  double repetition_rate = kDefaultRepetitionRate;
  std::size_t repeats = 200;
  std::uint64_t seed = 0;
  PhaseBranch branch{0.0, 0.5 * std::numbers::pi};
  /// Per-window bootstrap resamples; 0 disables the bootstrap sigma.
  std::size_t bootstrap_resamples = 100;

  std::uint64_t trials_per_window() const;
  std::size_t windows_per_repeat() const;
  void validate() const;
};

struct WindowRecord {
  std::size_t index = 0;  // global window index, also the RNG stream id
  std::size_t repeat = 0;
  std::size_t step = 0;
  double phi_set = 0.0;
  Counts counts{};
  PhaseEstimate estimate;
};

struct PhaseAggregate {
  std::size_t step = 0;
  double phi_set = 0.0;
  std::size_t windows = 0;
  double mean_estimate = 0.0;
  double std_estimate = 0.0;
  double mean_bootstrap_sigma = 0.0;
  double crlb = 0.0;
  bool low_information = false;
};

struct TrackingRun {
  InterferometerConfig truth;
  std::uint64_t trials_per_window = 0;
  std::vector<WindowRecord> windows;
  std::vector<PhaseAggregate> phases;
};

/// Sample, estimate and record every window of every repeat, then aggregate
/// per schedule step. Low-information windows are flagged, not rejected.
TrackingRun run_tracking(const TrackingScenario& scn, const InterferometerConfig& cfg, const CalibrationModel& cal);

struct PhaseSensitivity {
  double phi_set = 0.0;
  double delta_phi = 0.0;
  double crlb = 0.0;
  double delta_phi_snl = 0.0;
  double enhancement_db = 0.0;
  bool low_information = false;
};

struct SensitivityReport {
  std::uint64_t trials_per_window = 0;
  double photons_per_window = 0.0;
  double snl_per_photon = 0.0;
  Accounting accounting = Accounting::kSinglePass;
  std::vector<PhaseSensitivity> phases;
  std::size_t best = 0;  // index of the largest enhancement
};

/// Per-phase delta-phi against the photon-budget-matched SNL,
/// enhancement = 20 log10(delta_phi_snl / delta_phi).
SensitivityReport sensitivity_report(const TrackingRun& run, double snl_per_photon,
                                     Accounting accounting = Accounting::kSinglePass);

/// One row per window; header fixed by kTrackingFormatVersion.
void write_tracking_csv(std::ostream& out, const TrackingRun& run);
nlohmann::json tracking_summary(const TrackingRun& run, const SensitivityReport& report);

}  // namespace stimsqz
