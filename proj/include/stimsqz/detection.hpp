#pragma once

#include "stimsqz/gaussian.hpp"

#include <array>
#include <cstddef>
#include <vector>

namespace stimsqz {

/// Outcome probabilities of the two threshold detectors, indexed (h, v):
/// p01 means h silent and v clicked.
struct ClickDistribution {
  double p00 = 1.0;
  double p01 = 0.0;
  double p10 = 0.0;
  double p11 = 0.0;

  std::array<double, 4> as_array() const { return {p00, p01, p10, p11}; }
  static ClickDistribution from_array(const std::array<double, 4>& p);
  double sum() const { return p00 + p01 + p10 + p11; }
};

/// Which modes each physical detector integrates over.
struct ArmAssignment {
  std::vector<std::size_t> arm_h;
  std::vector<std::size_t> arm_v;

  /// Detector arms of the four-mode pipeline; the ancilla modes join their
  /// arm when `mismatch_detected`.
  static ArmAssignment interferometer(bool mismatch_detected = true);
  void validate(std::size_t num_modes) const;
};

struct DarkCounts {
  double h = 0.0;
  double v = 0.0;
};

/// Tr[rho |0><0|] on the listed modes: 1 / sqrt(det(sigma_sub + I/2)).
double vacuum_probability(const GaussianState& s, std::span<const std::size_t> modes);

/// Threshold-detector statistics by inclusion-exclusion over vacuum overlaps.
ClickDistribution click_distribution(const GaussianState& s, const ArmAssignment& arms,
                                     DarkCounts dark = {});

/// Clamps float noise (<= 1e-12 outside [0, 1]) and rejects anything larger.
ClickDistribution checked_distribution(double p00, double p01, double p10, double p11);

/// click_distribution(build_interferometer(cfg, phi)) with the config's dark counts.
ClickDistribution interferometer_clicks(const InterferometerConfig& cfg, double phi);

/// (max - min) / (max + min) of p11 over a uniform grid on [0, pi).
double p11_visibility(const InterferometerConfig& cfg, std::size_t grid_points = 721);

/// Overlap xi at which p11_visibility hits `target`, by bisection on [0, 1].
double calibrate_overlap(InterferometerConfig cfg, double target_visibility, double tol = 1e-10);

}  // namespace stimsqz
