#pragma once

#include "stimsqz/detection.hpp"
#include "stimsqz/gaussian.hpp"
#include "stimsqz/metrology.hpp"
#include "stimsqz/random.hpp"

#include <json.hpp>

#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace stimsqz {

/// The data cannot pin down a phase (flat objective, single-outcome counts).
class UnidentifiableError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kDefaultTabulation = 4096;
inline constexpr int kCalibrationFormatVersion = 1;

/// Fitted interferometer parameters plus a periodic tabulation of p_ij(phi)
/// on [0, pi]. Lookups use cubic Catmull-Rom interpolation with period pi.
class CalibrationModel {
 public:
  explicit CalibrationModel(const InterferometerConfig& params, std::size_t tab_intervals = kDefaultTabulation,
                            double fit_residual = 0.0, bool degraded = false, std::size_t evaluations = 0);

  const InterferometerConfig& params() const { return params_; }
  double fit_residual() const { return fit_residual_; }
  bool degraded() const { return degraded_; }
  std::size_t evaluations() const { return evaluations_; }
  std::size_t tab_intervals() const { return tab_.size() - 1; }
  double step() const;

  /// Tabulated node k, k = 0..tab_intervals (node tab_intervals is phi = pi).
  const std::array<double, 4>& node(std::size_t k) const { return tab_[k]; }

  ClickDistribution at(double phi) const;
  ClickModel curves() const;

  /// Largest Fisher information of the fitted model over [0, pi].
  double peak_fisher() const { return peak_fisher_; }

 private:
  InterferometerConfig params_;
  std::vector<std::array<double, 4>> tab_;
  double fit_residual_;
  bool degraded_;
  std::size_t evaluations_;
  double peak_fisher_ = 0.0;
};

nlohmann::json to_json(const CalibrationModel& cal);
CalibrationModel calibration_from_json(const nlohmann::json& doc);

struct CalibrationSample {
  double phi = 0.0;
  Counts counts{};
};

struct CalibrationOptions {
  bool fit_r1 = true;
  bool fit_r2 = true;
  bool fit_eta_h = true;
  bool fit_eta_v = true;
  bool fit_overlap = true;
  bool fit_phase_offset = true;
  /// Fit a single gain with r2 = r1. The unconstrained fit pins r1 + r2 well
  /// but r1 - r2 only loosely.
  bool tie_gains = false;
  std::size_t max_evaluations = 10000;
  double min_step = 1e-7;
  std::size_t tab_intervals = kDefaultTabulation;
};

/// Unweighted least-squares fit of the interferometer model to observed
/// frequencies: pattern search (coordinate moves with shrinking steps), then a
/// Levenberg-Marquardt polish with a numerical Jacobian.
CalibrationModel calibrate(const std::vector<CalibrationSample>& samples, const InterferometerConfig& initial,
                           const CalibrationOptions& options = {});

struct PhaseBranch {
  double lo = 0.0;
  double hi = 0.0;
};

enum class Objective {
  kLeastSquares,  ///< sum_ij (f_ij - p_ij(phi))^2
  kMaxLikelihood, ///< -sum_ij f_ij ln p_ij(phi)
};

struct PhaseEstimate {
  double phi_est = 0.0;
  double sigma = 0.0;
  std::uint64_t window_trials = 0;
  double objective_value = 0.0;
  bool low_information = false;
};

/// Below this fraction of the model's peak Fisher information an estimate is
/// flagged low-information.
inline constexpr double kLowInformationFraction = 0.01;

PhaseEstimate estimate_phase(const std::array<double, 4>& observed, const CalibrationModel& cal,
                             PhaseBranch branch, Objective objective = Objective::kLeastSquares);

PhaseEstimate estimate_phase(const Counts& counts, const CalibrationModel& cal, PhaseBranch branch,
                             Objective objective = Objective::kLeastSquares);

/// Std of the estimate over B multinomial resamples of the observed counts.
double bootstrap_sigma(const Counts& counts, const CalibrationModel& cal, PhaseBranch branch, std::size_t resamples,
                       std::uint64_t seed, Objective objective = Objective::kLeastSquares);

/// 1 / sqrt(trials * F(phi)) using the fitted model; +inf when F vanishes.
double crlb(const CalibrationModel& cal, double phi, double trials);

double sample_std(const std::vector<double>& values);
double sample_mean(const std::vector<double>& values);

}  // namespace stimsqz
