#pragma once

#include "stimsqz/detection.hpp"
#include "stimsqz/gaussian.hpp"

#include <functional>
#include <stdexcept>
#include <vector>

namespace stimsqz {

/// Any phase -> outcome-distribution map (the interferometer, a tabulated
/// calibration, a test double).
using ClickModel = std::function<ClickDistribution(double)>;

inline constexpr double kDefaultFisherStep = 1e-4;

/// Raised when a root bracket has no sign change.
class BracketError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Classical Fisher information of the four-outcome measurement, by central
/// differences. Outcomes with p < 1e-12 at phi contribute the removable-limit
/// value 2 p'' instead of (p')^2 / p.
double fisher_per_trial(const ClickModel& model, double phi, double h = kDefaultFisherStep);

ClickModel interferometer_model(const InterferometerConfig& cfg);

struct OptimalPhase {
  double phi = 0.0;
  double fisher = 0.0;
};

/// Maximizes `objective` over [lo, hi]: uniform grid, then golden section
/// around the best grid point down to `tol`.
OptimalPhase maximize_on_interval(const std::function<double(double)>& objective, double lo, double hi,
                                  std::size_t grid_points, double tol = 1e-6);

/// Fisher-optimal phase on [0, pi] (721-point grid + golden section).
OptimalPhase optimal_phase(const ClickModel& model, double h = kDefaultFisherStep);

double fisher_max_ideal(double r);
double mean_photon_ideal(double r);  ///< 2 sinh^2 r
double heisenberg_sensitivity(double n_bar);

/// Closed-form loss threshold for beating the SNL per photon.
double threshold_tm(double n_bar);

/// Same threshold found numerically: bisection in eta (applied to both arms)
/// on max_phi fisher_per_photon(eta) - snl_per_photon, to `tol` in eta.
/// `base` supplies everything but r1 = r2 (set from n_bar) and eta_h = eta_v.
double threshold_tm_numeric(const InterferometerConfig& base, double n_bar, double tol = 1e-4);

double noon_fisher_per_photon(int n, double eta);
double threshold_noon(int n);

struct NoonBaseline {
  int n = 1;
  double eta = 1.0;
  double fisher_per_photon = 0.0;
  double threshold = 1.0;
};
NoonBaseline noon_baseline(int n, double eta);

struct FisherReport {
  double phi = 0.0;
  double fisher_per_trial = 0.0;
  double mean_photons_through_sample = 0.0;
  double fisher_per_photon = 0.0;
  double snl_per_photon = 0.0;
  double enhancement_db = 0.0;
};

FisherReport make_fisher_report(double phi, double fisher, double photons, double snl);

std::vector<FisherReport> fisher_sweep(const InterferometerConfig& cfg, const std::vector<double>& phi_grid,
                                       double h = kDefaultFisherStep,
                                       Accounting accounting = Accounting::kSinglePass);

/// Peak Fisher per photon over [0, pi] for this config.
FisherReport best_fisher_report(const InterferometerConfig& cfg, double h = kDefaultFisherStep,
                                Accounting accounting = Accounting::kSinglePass);

}  // namespace stimsqz
