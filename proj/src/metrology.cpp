#include "stimsqz/metrology.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace stimsqz {
namespace {

constexpr double kTinyProbability = 1e-12;

}  // namespace

double fisher_per_trial(const ClickModel& model, double phi, double h) {
  if (!(h > 0.0 && h <= 0.01)) throw std::invalid_argument("finite-difference step must lie in (0, 0.01]");
  const auto mid = model(phi).as_array();
  const auto up = model(phi + h).as_array();
  const auto down = model(phi - h).as_array();
  double f = 0.0;
  for (int k = 0; k < 4; ++k) {
    if (!std::isfinite(mid[k]) || !std::isfinite(up[k]) || !std::isfinite(down[k])) {
      throw std::domain_error("click model returned a non-finite probability");
    }
    if (mid[k] >= kTinyProbability) {
      const double slope = (up[k] - down[k]) / (2.0 * h);
      f += slope * slope / mid[k];
    } else {
      // p ~ c (phi - phi0)^2 near a zero, where (p')^2 / p -> 4c = 2 p''.
      const double curvature = (up[k] - 2.0 * mid[k] + down[k]) / (h * h);
      f += std::max(0.0, 2.0 * curvature);
    }
  }
  return f < 0.0 ? 0.0 : f;
}

ClickModel interferometer_model(const InterferometerConfig& cfg) {
  cfg.validate();
  return [cfg](double phi) { return interferometer_clicks(cfg, phi); };
}

OptimalPhase maximize_on_interval(const std::function<double(double)>& objective, double lo, double hi,
                                  std::size_t grid_points, double tol) {
  if (!(hi > lo) || grid_points < 2) throw std::invalid_argument("invalid search interval");
  const double step = (hi - lo) / static_cast<double>(grid_points - 1);
  std::size_t best = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < grid_points; ++k) {
    const double v = objective(lo + step * static_cast<double>(k));
    if (v > best_value) {
      best_value = v;
      best = k;
    }
  }
  double a = lo + step * static_cast<double>(best == 0 ? 0 : best - 1);
  double b = lo + step * static_cast<double>(std::min(best + 1, grid_points - 1));

  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = objective(c);
  double fd = objective(d);
  while (b - a > tol) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = objective(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = objective(d);
    }
  }
  OptimalPhase out{0.5 * (a + b), 0.0};
  out.fisher = objective(out.phi);
  if (best_value > out.fisher) {
    out.phi = lo + step * static_cast<double>(best);
    out.fisher = best_value;
  }
  return out;
}

OptimalPhase optimal_phase(const ClickModel& model, double h) {
  return maximize_on_interval([&](double phi) { return fisher_per_trial(model, phi, h); }, 0.0,
                              std::numbers::pi, 721);
}

double fisher_max_ideal(double r) {
  if (!(r >= 0.0)) throw std::invalid_argument("r must be >= 0");
  const double s = std::sinh(2.0 * r);
  return 4.0 * s * s;
}

double mean_photon_ideal(double r) {
  const double s = std::sinh(r);
  return 2.0 * s * s;
}

double heisenberg_sensitivity(double n_bar) {
  if (!(n_bar > 0.0)) throw std::invalid_argument("mean photon number must be > 0");
  return 1.0 / (2.0 * std::sqrt(n_bar * (n_bar + 2.0)));
}

double threshold_tm(double n_bar) {
  if (!(n_bar >= 0.0)) throw std::invalid_argument("mean photon number must be >= 0");
  return 1.0 - std::sqrt(1.0 - 1.0 / (2.0 * (n_bar + 2.0)));
}

double threshold_tm_numeric(const InterferometerConfig& base, double n_bar, double tol) {
  if (!(n_bar > 0.0)) throw std::invalid_argument("mean photon number must be > 0");
  if (base.snl_per_photon <= 0.0) return 0.0;
  InterferometerConfig cfg = base;
  const double r = std::asinh(std::sqrt(n_bar / 2.0));
  cfg.r1 = r;
  cfg.r2 = r;
  auto excess = [&](double eta) {
    cfg.eta_h = eta;
    cfg.eta_v = eta;
    const double photons = photons_through_sample(cfg, Accounting::kSinglePass);
    return optimal_phase(interferometer_model(cfg)).fisher / photons - cfg.snl_per_photon;
  };
  double lo = tol;
  double hi = 1.0;
  double f_lo = excess(lo);
  const double f_hi = excess(hi);
  if (f_lo * f_hi > 0.0) throw BracketError("no sign change of the SNL excess on the efficiency bracket");
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = excess(mid);
    if ((f_mid < 0.0) == (f_lo < 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double noon_fisher_per_photon(int n, double eta) {
  if (n < 1) throw std::invalid_argument("NOON photon number must be >= 1");
  if (!(eta >= 0.0 && eta <= 1.0)) throw std::invalid_argument("eta must lie in [0, 1]");
  // F = N^2 eta^N per state over N/2 photons through the sample.
  return 2.0 * n * std::pow(eta, n);
}

double threshold_noon(int n) {
  if (n < 1) throw std::invalid_argument("NOON photon number must be >= 1");
  return std::pow(1.0 / n, 1.0 / n);
}

NoonBaseline noon_baseline(int n, double eta) {
  return {n, eta, noon_fisher_per_photon(n, eta), threshold_noon(n)};
}

FisherReport make_fisher_report(double phi, double fisher, double photons, double snl) {
  FisherReport rep;
  rep.phi = phi;
  rep.fisher_per_trial = fisher;
  rep.mean_photons_through_sample = photons;
  rep.fisher_per_photon = photons > 0.0 ? fisher / photons : 0.0;
  rep.snl_per_photon = snl;
  rep.enhancement_db = (snl > 0.0 && rep.fisher_per_photon > 0.0)
                           ? 10.0 * std::log10(rep.fisher_per_photon / snl)
                           : -std::numeric_limits<double>::infinity();
  return rep;
}

std::vector<FisherReport> fisher_sweep(const InterferometerConfig& cfg, const std::vector<double>& phi_grid,
                                       double h, Accounting accounting) {
  const auto model = interferometer_model(cfg);
  const double photons = photons_through_sample(cfg, accounting);
  std::vector<FisherReport> out;
  out.reserve(phi_grid.size());
  for (double phi : phi_grid) {
    if (!(phi >= 0.0 && phi <= std::numbers::pi)) throw std::invalid_argument("phase grid must lie in [0, pi]");
    out.push_back(make_fisher_report(phi, fisher_per_trial(model, phi, h), photons, cfg.snl_per_photon));
  }
  return out;
}

FisherReport best_fisher_report(const InterferometerConfig& cfg, double h, Accounting accounting) {
  const auto best = optimal_phase(interferometer_model(cfg), h);
  return make_fisher_report(best.phi, best.fisher, photons_through_sample(cfg, accounting), cfg.snl_per_photon);
}

}  // namespace stimsqz
