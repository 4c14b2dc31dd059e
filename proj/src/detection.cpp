#include "stimsqz/detection.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace stimsqz {
namespace {

double clamp_probability(double p, const char* name) {
  constexpr double kSlack = 1e-12;
  if (!std::isfinite(p) || p < -kSlack || p > 1.0 + kSlack) {
    std::ostringstream msg;
    msg << "probability " << name << " = " << p << " outside [0, 1]";
    throw InvalidStateError(msg.str());
  }
  return std::clamp(p, 0.0, 1.0);
}

// sign = +1 finds a maximum of f on [a, b], -1 a minimum.
template <typename F>
double golden_extremum(F&& f, double a, double b, double sign) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a);
  double d = a + g * (b - a);
  double fc = sign * f(c);
  double fd = sign * f(d);
  while (b - a > 1e-9) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = sign * f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = sign * f(d);
    }
  }
  return sign * std::max(fc, fd);
}

}  // namespace

ClickDistribution ClickDistribution::from_array(const std::array<double, 4>& p) {
  return {p[0], p[1], p[2], p[3]};
}

ArmAssignment ArmAssignment::interferometer(bool mismatch_detected) {
  if (!mismatch_detected) return {{modes::kA}, {modes::kB}};
  return {{modes::kA, modes::kAPrime}, {modes::kB, modes::kBPrime}};
}

void ArmAssignment::validate(std::size_t num_modes) const {
  if (arm_h.empty() || arm_v.empty()) throw std::invalid_argument("detector arms must be nonempty");
  for (auto m : arm_h) {
    if (m >= num_modes) throw std::invalid_argument("arm_h mode out of range");
    if (std::find(arm_v.begin(), arm_v.end(), m) != arm_v.end()) {
      throw std::invalid_argument("detector arms must be disjoint");
    }
  }
  for (auto m : arm_v) {
    if (m >= num_modes) throw std::invalid_argument("arm_v mode out of range");
  }
}

double vacuum_probability(const GaussianState& s, std::span<const std::size_t> modes) {
  if (modes.empty()) throw std::invalid_argument("vacuum probability needs at least one mode");
  const Eigen::MatrixXd sub = s.reduced(modes);
  const Eigen::MatrixXd shifted = sub + 0.5 * Eigen::MatrixXd::Identity(sub.rows(), sub.cols());
  Eigen::LLT<Eigen::MatrixXd> llt(shifted);
  if (llt.info() != Eigen::Success) {
    throw InvalidStateError("reduced covariance + I/2 is not positive definite");
  }
  double log_det = 0.0;
  for (Eigen::Index k = 0; k < shifted.rows(); ++k) log_det += 2.0 * std::log(llt.matrixL()(k, k));
  const double p = std::exp(-0.5 * log_det);
  return clamp_probability(p, "vacuum");
}

ClickDistribution checked_distribution(double p00, double p01, double p10, double p11) {
  return {clamp_probability(p00, "p00"), clamp_probability(p01, "p01"),
          clamp_probability(p10, "p10"), clamp_probability(p11, "p11")};
}

ClickDistribution click_distribution(const GaussianState& s, const ArmAssignment& arms, DarkCounts dark) {
  arms.validate(s.num_modes());
  if (!(dark.h >= 0.0 && dark.h <= 1.0 && dark.v >= 0.0 && dark.v <= 1.0)) {
    throw std::invalid_argument("dark-count probabilities must lie in [0, 1]");
  }
  std::vector<std::size_t> both = arms.arm_h;
  both.insert(both.end(), arms.arm_v.begin(), arms.arm_v.end());

  const double quiet_h = (1.0 - dark.h) * vacuum_probability(s, arms.arm_h);
  const double quiet_v = (1.0 - dark.v) * vacuum_probability(s, arms.arm_v);
  const double p00 = (1.0 - dark.h) * (1.0 - dark.v) * vacuum_probability(s, both);
  const double p01 = quiet_h - p00;  // h silent, v clicks
  const double p10 = quiet_v - p00;
  const double p11 = 1.0 - p00 - p01 - p10;
  return checked_distribution(p00, p01, p10, p11);
}

ClickDistribution interferometer_clicks(const InterferometerConfig& cfg, double phi) {
  return click_distribution(build_interferometer(cfg, phi), ArmAssignment::interferometer(cfg.mismatch_detected),
                            {cfg.dark_h, cfg.dark_v});
}

double p11_visibility(const InterferometerConfig& cfg, std::size_t grid_points) {
  if (grid_points < 2) throw std::invalid_argument("visibility needs at least two grid points");
  const double step = std::numbers::pi / static_cast<double>(grid_points);
  auto p11 = [&](double phi) { return interferometer_clicks(cfg, phi).p11; };
  double lo = 1.0;
  double hi = 0.0;
  double phi_lo = 0.0;
  double phi_hi = 0.0;
  for (std::size_t k = 0; k < grid_points; ++k) {
    const double phi = step * static_cast<double>(k);
    const double p = p11(phi);
    if (p < lo) {
      lo = p;
      phi_lo = phi;
    }
    if (p > hi) {
      hi = p;
      phi_hi = phi;
    }
  }
  lo = std::min(lo, golden_extremum(p11, phi_lo - step, phi_lo + step, -1.0));
  hi = std::max(hi, golden_extremum(p11, phi_hi - step, phi_hi + step, +1.0));
  return hi + lo > 0.0 ? (hi - lo) / (hi + lo) : 0.0;
}

double calibrate_overlap(InterferometerConfig cfg, double target_visibility, double tol) {
  if (!(target_visibility > 0.0 && target_visibility <= 1.0)) {
    throw std::invalid_argument("target visibility must lie in (0, 1]");
  }
  auto visibility_at = [&](double xi) {
    cfg.overlap = xi;
    return p11_visibility(cfg);
  };
  double lo = 0.0;
  double hi = 1.0;
  if (visibility_at(hi) < target_visibility) return hi;
  if (visibility_at(lo) > target_visibility) return lo;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (visibility_at(mid) < target_visibility ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace stimsqz
