// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include "stimsqz/detection.hpp"
#include "stimsqz/estimation.hpp"
#include "stimsqz/fock.hpp"
#include "stimsqz/gaussian.hpp"
#include "stimsqz/metrology.hpp"
#include "stimsqz/report.hpp"
#include "stimsqz/run_config.hpp"
#include "stimsqz/simkit.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

using namespace stimsqz;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(int id, const char* title, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("%s %d %s: %s [%.1f s]\n", out.pass ? "PASS" : "FAIL", id, title, out.detail.c_str(), secs);
  std::fflush(stdout);
  if (!out.pass) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

}  // namespace

int main() {
  criterion(1, "closed-form Fisher maximum", [] {
    double worst = 0.0;
    for (int k = 1; k <= 6; ++k) {
      const double r = 0.1 * k;
      const auto best = optimal_phase(interferometer_model(InterferometerConfig::ideal(r)));
      worst = std::max(worst, std::abs(best.fisher / fisher_max_ideal(r) - 1.0));
    }
    return Outcome{worst < 1e-3, fmt("max relative deviation from 4 sinh^2(2r) over r = 0.1..0.6 is %.2e (< 1e-3)",
                                     worst)};
  });

  criterion(2, "mean photon number", [] {
    const std::array<std::size_t, 2> ab = {0, 1};
    const double n = mean_photon(apply_two_mode_squeezer(vacuum(2), 0, 1, 0.59), ab);
    const bool ok = std::abs(n - 0.781) < 5e-4 && std::abs(n - 0.78) <= 0.01;
    return Outcome{ok, fmt("nbar(TMSS(0.59)) = %.4f, inside 0.78(1)", n)};
  });

  criterion(3, "ideal per-photon benchmark", [] {
    const double f = best_fisher_report(InterferometerConfig::ideal(0.59)).fisher_per_photon;
    const double noon5 = noon_fisher_per_photon(5, 1.0);
    const double snl = 2.0;
    const bool ok = std::abs(f - 11.12) <= 0.02 && f > noon5 && noon5 > snl;
    return Outcome{ok, fmt("max per photon %.4f rad^-2 > 5-NOON %.1f > SNL %.1f; measured 11.6 not reproduced by "
                           "the symmetric lossless model (documented discrepancy)",
                           f, noon5, snl)};
  });

  criterion(4, "loss thresholds", [] {
    double worst = 0.0;
    for (double n : {0.1, 0.5, 0.78, 1.0, 2.0, 3.0}) {
      worst = std::max(worst, std::abs(threshold_tm_numeric(InterferometerConfig{}, n) - threshold_tm(n)));
    }
    bool tm_decreasing = true;
    for (int k = 1; k <= 300; ++k) tm_decreasing = tm_decreasing && threshold_tm(0.01 * k) < threshold_tm(0.01 * (k - 1));
    bool noon_rising = true;
    for (int n = 4; n <= 20; ++n) noon_rising = noon_rising && threshold_noon(n) > threshold_noon(n - 1);
    bool literal = true;
    for (int n = 2; n <= 20; ++n) literal = literal && threshold_noon(n) > threshold_noon(n - 1);
    const bool ok = worst < 1e-3 && tm_decreasing && noon_rising && threshold_noon(20) < 1.0;
    return Outcome{ok, fmt("numeric vs closed form max |d eta| %.2e (< 1e-3); eta_TM decreasing: %s; eta_NOON rising "
                           "for N = 3..20 toward 1 (%.4f at N = 20): %s; note (1/N)^(1/N) dips from 1 at N = 1 to "
                           "%.4f at N = 3, so strict rise over N = 1..20 is %s",
                           worst, tm_decreasing ? "yes" : "no", threshold_noon(20), noon_rising ? "yes" : "no",
                           threshold_noon(3), literal ? "true" : "false")};
  });

  criterion(5, "Gaussian vs Fock oracle", [] {
    const auto rep = oracle_validation({0.3, 0.59}, {1.0, 0.75}, 73, 1e-8, 1e-6);
    double tail = 0.0;
    for (const auto& c : rep.cases) tail = std::max(tail, c.truncation_bound);
    return Outcome{rep.passed() && tail < 1e-8,
                   fmt("max |dp| = %.2e over 73 phases x 4 configs (< 1e-6); worst truncation bound %.2e (< 1e-8)",
                       rep.max_abs_diff(), tail)};
  });

  criterion(6, "period-pi fringes", [] {
    std::vector<InterferometerConfig> cfgs;
    cfgs.push_back(InterferometerConfig::ideal(0.59));
    auto lossy = InterferometerConfig::ideal(0.43);
    lossy.eta_h = 0.744;
    lossy.eta_v = 0.751;
    lossy.overlap = 0.986;
    lossy.phase_offset = 0.74;
    lossy.dark_h = 1e-4;
    cfgs.push_back(lossy);
    auto internal = InterferometerConfig::ideal(0.3);
    internal.r2 = 0.5;
    internal.eta_internal = 0.8;
    cfgs.push_back(internal);
    double worst = 0.0;
    for (const auto& c : cfgs) {
      for (int k = 0; k < 181; ++k) {
        const double phi = std::numbers::pi * k / 180.0;
        const auto a = interferometer_clicks(c, phi).as_array();
        const auto b = interferometer_clicks(c, phi + std::numbers::pi).as_array();
        for (int j = 0; j < 4; ++j) worst = std::max(worst, std::abs(a[j] - b[j]));
      }
    }
    return Outcome{worst <= 1e-10, fmt("max |p(phi) - p(phi + pi)| = %.2e over 3 configs (<= 1e-10)", worst)};
  });

  criterion(7, "estimator efficiency", [] {
    const auto cfg = preset("fig4");
    const auto& truth = cfg.interferometer;
    const auto cal = calibrate_from_scan(truth, cfg.scan, 7);
    const double phi = 0.58;
    const std::uint64_t trials = 100000;
    std::vector<double> est;
    double boot_sum = 0.0;
    for (std::uint64_t rep = 0; rep < 200; ++rep) {
      const auto counts = sample_clicks(truth, phi, trials, 7, rep);
      est.push_back(estimate_phase(counts, cal, cfg.scenario.branch).phi_est);
      boot_sum += bootstrap_sigma(counts, cal, cfg.scenario.branch, 100, stream_seed(8, rep));
    }
    const double sd = sample_std(est);
    const double bound = crlb(cal, phi, static_cast<double>(trials));
    const double ratio = sd / bound;
    const double boot = boot_sum / 200.0;
    const double boot_rel = std::abs(boot / sd - 1.0);
    const bool ok = ratio >= 0.9 && ratio <= 1.15 && boot_rel <= 0.2;
    return Outcome{ok, fmt("std %.4e / CRLB %.4e = %.3f (in [0.9, 1.15]); mean bootstrap sigma %.4e is %.1f%% off "
                           "the Monte Carlo std (<= 20%%)",
                           sd, bound, ratio, boot, 100.0 * boot_rel)};
  });

  criterion(8, "tracking replay", [] {
    const auto cfg = preset("fig4");
    const auto bundle = track(cfg, Accounting::kSinglePass);
    bool all_inside = true;
    double worst = 0.0;
    for (const auto& agg : bundle.run.phases) {
      const double z = std::abs(agg.mean_estimate - agg.phi_set) / agg.std_estimate;
      worst = std::max(worst, z);
      all_inside = all_inside && z < 3.0;
    }
    const auto& best = bundle.report.phases[bundle.report.best];
    // Trials per window at which the CRLB at the best phase would equal 0.002 rad.
    const double f_best = fisher_per_trial(interferometer_model(bundle.run.truth), best.phi_set);
    const double trials_for_2mrad = 1.0 / (f_best * 0.002 * 0.002);
    const bool ok = bundle.run.phases.size() == 11 && all_inside && best.enhancement_db > 0.0;
    return Outcome{ok, fmt("11 phases, worst |mean - set| / std = %.2f (< 3); best phase %.2f at %+.2f dB (> 0); "
                           "informational: %llu trials/window gives dphi %.2e rad vs reported 0.002 rad and 3.56 dB, "
                           "0.002 rad would need about %.3g trials/window",
                           worst, best.phi_set, best.enhancement_db,
                           static_cast<unsigned long long>(bundle.run.trials_per_window), best.delta_phi,
                           trials_for_2mrad)};
  });

  criterion(9, "determinism", [] {
    std::size_t files = 0;
    std::size_t bytes = 0;
    for (const auto& name : preset_names()) {
      const auto a = preset_artifacts(name, Format::kCsv, 0, Accounting::kSinglePass, kDefaultFisherStep);
      const auto b = preset_artifacts(name, Format::kCsv, 0, Accounting::kSinglePass, kDefaultFisherStep);
      if (a.size() != b.size()) return Outcome{false, "preset " + name + " produced a different file set"};
      for (std::size_t k = 0; k < a.size(); ++k) {
        if (a[k].name != b[k].name || a[k].contents != b[k].contents) {
          return Outcome{false, "preset " + name + " differs in " + a[k].name};
        }
        ++files;
        bytes += a[k].contents.size();
      }
    }
    return Outcome{true, fmt("%zu files (%zu bytes) byte-identical across two runs of every preset", files, bytes)};
  });

  std::printf("%s: %d criteria failed\n", failures ? "FAILED" : "ALL PASSED", failures);
  return failures ? 1 : 0;
}
