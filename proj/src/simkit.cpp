#include "stimsqz/simkit.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace stimsqz {
namespace {

constexpr std::uint64_t kBootstrapSalt = 0xb0075ea9c0ffee11ULL;

std::size_t windows_in(double duration, double window) {
  const double ratio = duration / window;
  const double whole = std::round(ratio);
  if (std::abs(ratio - whole) > 1e-9 * std::max(1.0, ratio)) {
    throw std::invalid_argument("step durations must be whole multiples of the window");
  }
  return static_cast<std::size_t>(whole);
}

}  // namespace

Counts sample_clicks(const InterferometerConfig& cfg, double phi, std::uint64_t trials, std::uint64_t seed,
                     std::uint64_t stream) {
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  const auto p = interferometer_clicks(cfg, phi).as_array();
  StreamRng rng(seed, stream);
  return sample_multinomial(p, trials, rng.engine());
}

std::uint64_t TrackingScenario::trials_per_window() const {
  return static_cast<std::uint64_t>(std::llround(repetition_rate * window));
}

std::size_t TrackingScenario::windows_per_repeat() const {
  std::size_t n = 0;
  for (const auto& step : phase_schedule) n += windows_in(step.duration, window);
  return n;
}

void TrackingScenario::validate() const {
  if (!(window > 0.0)) throw std::invalid_argument("window must be > 0");
  if (!(repetition_rate > 0.0)) throw std::invalid_argument("repetition rate must be > 0");
  if (trials_per_window() < 1) throw std::invalid_argument("window holds no trials at this repetition rate");
  for (const auto& step : phase_schedule) {
    if (!(step.duration >= 0.0)) throw std::invalid_argument("step durations must be >= 0");
    if (step.duration > 0.0 && (step.phi_set < branch.lo || step.phi_set > branch.hi)) {
      throw std::invalid_argument("scheduled phase lies outside the estimation branch");
    }
  }
  (void)windows_per_repeat();
}

TrackingRun run_tracking(const TrackingScenario& scn, const InterferometerConfig& cfg, const CalibrationModel& cal) {
  scn.validate();
  cfg.validate();
  TrackingRun run;
  run.truth = cfg;
  run.trials_per_window = scn.trials_per_window();

  std::vector<std::size_t> step_windows;
  for (const auto& step : scn.phase_schedule) step_windows.push_back(windows_in(step.duration, scn.window));
  const std::size_t per_repeat = scn.windows_per_repeat();
  run.windows.reserve(per_repeat * scn.repeats);

  // Outcome probabilities per step are fixed, so evaluate them once.
  std::vector<std::array<double, 4>> probs;
  for (const auto& step : scn.phase_schedule) probs.push_back(interferometer_clicks(cfg, step.phi_set).as_array());

  std::size_t index = 0;
  for (std::size_t rep = 0; rep < scn.repeats; ++rep) {
    for (std::size_t s = 0; s < scn.phase_schedule.size(); ++s) {
      for (std::size_t w = 0; w < step_windows[s]; ++w, ++index) {
        WindowRecord rec;
        rec.index = index;
        rec.repeat = rep;
        rec.step = s;
        rec.phi_set = scn.phase_schedule[s].phi_set;
        StreamRng rng(scn.seed, index);
        rec.counts = sample_multinomial(probs[s], run.trials_per_window, rng.engine());
        rec.estimate = estimate_phase(rec.counts, cal, scn.branch);
        if (scn.bootstrap_resamples > 0) {
          rec.estimate.sigma = bootstrap_sigma(rec.counts, cal, scn.branch, scn.bootstrap_resamples,
                                               stream_seed(scn.seed ^ kBootstrapSalt, index));
        }
        run.windows.push_back(rec);
      }
    }
  }

  for (std::size_t s = 0; s < scn.phase_schedule.size(); ++s) {
    if (step_windows[s] == 0) continue;
    PhaseAggregate agg;
    agg.step = s;
    agg.phi_set = scn.phase_schedule[s].phi_set;
    std::vector<double> est;
    double sigma_sum = 0.0;
    std::size_t low = 0;
    for (const auto& rec : run.windows) {
      if (rec.step != s) continue;
      est.push_back(rec.estimate.phi_est);
      sigma_sum += rec.estimate.sigma;
      low += rec.estimate.low_information ? 1 : 0;
    }
    agg.windows = est.size();
    agg.mean_estimate = sample_mean(est);
    agg.std_estimate = sample_std(est);
    agg.mean_bootstrap_sigma = sigma_sum / static_cast<double>(est.size());
    agg.crlb = crlb(cal, agg.phi_set, static_cast<double>(run.trials_per_window));
    agg.low_information = 2 * low > est.size();
    run.phases.push_back(agg);
  }
  return run;
}

SensitivityReport sensitivity_report(const TrackingRun& run, double snl_per_photon, Accounting accounting) {
  if (run.phases.empty()) throw std::invalid_argument("sensitivity report needs a nonempty run");
  SensitivityReport rep;
  rep.trials_per_window = run.trials_per_window;
  rep.photons_per_window = static_cast<double>(run.trials_per_window) * photons_through_sample(run.truth, accounting);
  rep.snl_per_photon = snl_per_photon;
  rep.accounting = accounting;
  const double snl_delta = snl_per_photon > 0.0 ? 1.0 / std::sqrt(rep.photons_per_window * snl_per_photon)
                                                : std::numeric_limits<double>::infinity();
  double best_db = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < run.phases.size(); ++k) {
    const auto& agg = run.phases[k];
    PhaseSensitivity ps;
    ps.phi_set = agg.phi_set;
    ps.delta_phi = agg.std_estimate;
    ps.crlb = agg.crlb;
    ps.delta_phi_snl = snl_delta;
    ps.enhancement_db = ps.delta_phi > 0.0 ? 20.0 * std::log10(snl_delta / ps.delta_phi)
                                           : std::numeric_limits<double>::infinity();
    ps.low_information = agg.low_information;
    if (ps.enhancement_db > best_db) {
      best_db = ps.enhancement_db;
      rep.best = k;
    }
    rep.phases.push_back(ps);
  }
  return rep;
}

void write_tracking_csv(std::ostream& out, const TrackingRun& run) {
  out << "window,repeat,step,phi_set,n00,n01,n10,n11,phi_est,sigma,objective,low_information\n";
  out << std::setprecision(15);
  for (const auto& rec : run.windows) {
    out << rec.index << ',' << rec.repeat << ',' << rec.step << ',' << rec.phi_set << ',' << rec.counts[0] << ','
        << rec.counts[1] << ',' << rec.counts[2] << ',' << rec.counts[3] << ',' << rec.estimate.phi_est << ','
        << rec.estimate.sigma << ',' << rec.estimate.objective_value << ',' << (rec.estimate.low_information ? 1 : 0)
        << '\n';
  }
}

nlohmann::json tracking_summary(const TrackingRun& run, const SensitivityReport& report) {
  nlohmann::json phases = nlohmann::json::array();
  for (std::size_t k = 0; k < run.phases.size(); ++k) {
    const auto& agg = run.phases[k];
    const auto& ps = report.phases[k];
    phases.push_back({{"phi_set", agg.phi_set},
                      {"windows", agg.windows},
                      {"mean_estimate", agg.mean_estimate},
                      {"std_estimate", agg.std_estimate},
                      {"mean_bootstrap_sigma", agg.mean_bootstrap_sigma},
                      {"crlb", agg.crlb},
                      {"delta_phi_snl", ps.delta_phi_snl},
                      {"enhancement_db", ps.enhancement_db},
                      {"low_information", agg.low_information}});
  }
  return {{"format", "stimsqz.tracking"},
          {"version", kTrackingFormatVersion},
          {"trials_per_window", run.trials_per_window},
          {"photons_per_window", report.photons_per_window},
          {"accounting", to_string(report.accounting)},
          {"snl_per_photon", report.snl_per_photon},
          {"best_phase", report.phases.empty() ? 0.0 : report.phases[report.best].phi_set},
          {"best_enhancement_db", report.phases.empty() ? 0.0 : report.phases[report.best].enhancement_db},
          {"phases", phases}};
}

}  // namespace stimsqz
