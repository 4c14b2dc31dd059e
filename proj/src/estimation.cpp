#include "stimsqz/estimation.hpp"

#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>

#include <algorithm>
#include <functional>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace stimsqz {
namespace {

constexpr double kPeriod = std::numbers::pi;
constexpr std::size_t kBranchGrid = 201;

struct ResidualFunctor {
  using Scalar = double;
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };

  ResidualFunctor(std::size_t inputs, std::size_t values) : n_in(inputs), n_out(values) {}
  int inputs() const { return static_cast<int>(n_in); }
  int values() const { return static_cast<int>(n_out); }
  int operator()(const Eigen::VectorXd& x, Eigen::VectorXd& out) const {
    eval(x, out);
    return 0;
  }

  std::size_t n_in;
  std::size_t n_out;
  std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)> eval;
};

double wrap_period(double phi) {
  double w = std::fmod(phi, kPeriod);
  if (w < 0.0) w += kPeriod;
  return w;
}

}  // namespace

CalibrationModel::CalibrationModel(const InterferometerConfig& params, std::size_t tab_intervals,
                                   double fit_residual, bool degraded, std::size_t evaluations)
    : params_(params), fit_residual_(fit_residual), degraded_(degraded), evaluations_(evaluations) {
  params_.validate();
  if (tab_intervals < 16) throw std::invalid_argument("calibration tabulation needs at least 16 intervals");
  tab_.resize(tab_intervals + 1);
  const double h = kPeriod / static_cast<double>(tab_intervals);
  for (std::size_t k = 0; k < tab_intervals; ++k) {
    tab_[k] = interferometer_clicks(params_, h * static_cast<double>(k)).as_array();
  }
  tab_[tab_intervals] = tab_[0];
  peak_fisher_ = optimal_phase(interferometer_model(params_)).fisher;
}

double CalibrationModel::step() const { return kPeriod / static_cast<double>(tab_intervals()); }

ClickDistribution CalibrationModel::at(double phi) const {
  const std::size_t n = tab_intervals();
  const double x = wrap_period(phi) / step();
  auto k = static_cast<std::size_t>(std::floor(x));
  if (k >= n) k = n - 1;
  const double t = x - static_cast<double>(k);
  const auto& p0 = tab_[(k + n - 1) % n];
  const auto& p1 = tab_[k];
  const auto& p2 = tab_[k + 1];
  const auto& p3 = tab_[(k + 2) % n];
  std::array<double, 4> out{};
  for (int j = 0; j < 4; ++j) {
    const double a = -0.5 * p0[j] + 1.5 * p1[j] - 1.5 * p2[j] + 0.5 * p3[j];
    const double b = p0[j] - 2.5 * p1[j] + 2.0 * p2[j] - 0.5 * p3[j];
    const double c = -0.5 * p0[j] + 0.5 * p2[j];
    out[j] = std::max(0.0, ((a * t + b) * t + c) * t + p1[j]);
  }
  return ClickDistribution::from_array(out);
}

ClickModel CalibrationModel::curves() const {
  return [this](double phi) { return at(phi); };
}

nlohmann::json to_json(const CalibrationModel& cal) {
  const auto& p = cal.params();
  return {
      {"format", "stimsqz.calibration"},
      {"version", kCalibrationFormatVersion},
      {"params",
       {{"r1", p.r1},
        {"r2", p.r2},
        {"eta_h", p.eta_h},
        {"eta_v", p.eta_v},
        {"eta_internal", p.eta_internal},
        {"overlap", p.overlap},
        {"phase_offset", p.phase_offset},
        {"snl_per_photon", p.snl_per_photon},
        {"dark_h", p.dark_h},
        {"dark_v", p.dark_v},
        {"mismatch_detected", p.mismatch_detected}}},
      {"tabulation", {{"phi_min", 0.0}, {"phi_max", kPeriod}, {"intervals", cal.tab_intervals()}}},
      {"fit_residual", cal.fit_residual()},
      {"degraded", cal.degraded()},
      {"evaluations", cal.evaluations()},
  };
}

CalibrationModel calibration_from_json(const nlohmann::json& doc) {
  if (doc.value("format", "") != "stimsqz.calibration") throw std::invalid_argument("not a calibration document");
  if (doc.value("version", 0) != kCalibrationFormatVersion) {
    throw std::invalid_argument("unsupported calibration document version");
  }
  const auto& p = doc.at("params");
  InterferometerConfig cfg;
  cfg.r1 = p.at("r1").get<double>();
  cfg.r2 = p.at("r2").get<double>();
  cfg.eta_h = p.at("eta_h").get<double>();
  cfg.eta_v = p.at("eta_v").get<double>();
  cfg.eta_internal = p.at("eta_internal").get<double>();
  cfg.overlap = p.at("overlap").get<double>();
  cfg.phase_offset = p.at("phase_offset").get<double>();
  cfg.snl_per_photon = p.at("snl_per_photon").get<double>();
  cfg.dark_h = p.at("dark_h").get<double>();
  cfg.dark_v = p.at("dark_v").get<double>();
  cfg.mismatch_detected = p.at("mismatch_detected").get<bool>();
  return CalibrationModel(cfg, doc.at("tabulation").at("intervals").get<std::size_t>(),
                          doc.at("fit_residual").get<double>(), doc.at("degraded").get<bool>(),
                          doc.at("evaluations").get<std::size_t>());
}

CalibrationModel calibrate(const std::vector<CalibrationSample>& samples, const InterferometerConfig& initial,
                           const CalibrationOptions& options) {
  initial.validate();
  std::vector<double> phis;
  for (const auto& s : samples) phis.push_back(wrap_period(s.phi));
  std::sort(phis.begin(), phis.end());
  phis.erase(std::unique(phis.begin(), phis.end(), [](double a, double b) { return std::abs(a - b) < 1e-9; }),
             phis.end());
  if (phis.size() < 8) throw std::invalid_argument("calibration needs at least 8 distinct phases");
  if (phis.back() - phis.front() < 0.5 * kPeriod) {
    throw std::invalid_argument("calibration phases must span at least half a fringe period");
  }

  std::vector<std::array<double, 4>> observed;
  observed.reserve(samples.size());
  for (const auto& s : samples) observed.push_back(frequencies(s.counts));

  struct Parameter {
    double InterferometerConfig::*field;
    double lo;
    double hi;
    double step;
  };
  std::vector<Parameter> free;
  if (options.fit_r1) free.push_back({&InterferometerConfig::r1, 0.0, 3.0, 0.05});
  if (options.fit_r2 && !options.tie_gains) free.push_back({&InterferometerConfig::r2, 0.0, 3.0, 0.05});
  if (options.fit_eta_h) free.push_back({&InterferometerConfig::eta_h, 0.0, 1.0, 0.05});
  if (options.fit_eta_v) free.push_back({&InterferometerConfig::eta_v, 0.0, 1.0, 0.05});
  if (options.fit_overlap) free.push_back({&InterferometerConfig::overlap, 0.0, 1.0, 0.02});
  if (options.fit_phase_offset) {
    free.push_back({&InterferometerConfig::phase_offset, -std::numeric_limits<double>::infinity(),
                    std::numeric_limits<double>::infinity(), 0.05});
  }

  std::size_t evaluations = 0;
  auto tied = [&](InterferometerConfig c) {
    if (options.tie_gains) c.r2 = c.r1;
    return c;
  };
  auto residual = [&](const InterferometerConfig& trial) {
    const InterferometerConfig cfg = tied(trial);
    ++evaluations;
    double sum = 0.0;
    for (std::size_t k = 0; k < samples.size(); ++k) {
      const auto p = interferometer_clicks(cfg, samples[k].phi).as_array();
      for (int j = 0; j < 4; ++j) sum += (observed[k][j] - p[j]) * (observed[k][j] - p[j]);
    }
    return sum;
  };

  // Hooke-Jeeves: exploratory coordinate moves, a pattern move along any
  // successful direction, and step halving when nothing improves.
  InterferometerConfig base = initial;
  double base_value = residual(base);
  std::vector<double> steps;
  for (const auto& par : free) steps.push_back(par.step);

  auto explore = [&](InterferometerConfig point, double value) {
    for (std::size_t i = 0; i < free.size() && evaluations < options.max_evaluations; ++i) {
      const auto& par = free[i];
      for (double dir : {+1.0, -1.0}) {
        InterferometerConfig trial = point;
        trial.*par.field = std::clamp(point.*par.field + dir * steps[i], par.lo, par.hi);
        if (trial.*par.field == point.*par.field) continue;
        const double v = residual(trial);
        if (v < value) {
          point = trial;
          value = v;
          break;
        }
      }
    }
    return std::pair{point, value};
  };

  bool converged = free.empty();
  while (!converged && evaluations < options.max_evaluations) {
    auto [moved, moved_value] = explore(base, base_value);
    if (moved_value < base_value) {
      // Keep following the improving direction while it pays off.
      while (evaluations < options.max_evaluations) {
        InterferometerConfig pattern = moved;
        for (const auto& par : free) {
          pattern.*par.field = std::clamp(2.0 * (moved.*par.field) - base.*par.field, par.lo, par.hi);
        }
        base = moved;
        base_value = moved_value;
        const double pattern_value = residual(pattern);
        auto [next, next_value] = explore(pattern, pattern_value);
        if (next_value < base_value) {
          moved = next;
          moved_value = next_value;
        } else {
          break;
        }
      }
    } else {
      double largest = 0.0;
      for (auto& s : steps) {
        s *= 0.5;
        largest = std::max(largest, s);
      }
      converged = largest < options.min_step;
    }
  }

  // The pattern search stalls in the narrow valley where r1, r2 and the
  // overlap trade off; Levenberg-Marquardt walks along it.
  if (!free.empty() && evaluations < options.max_evaluations) {
    ResidualFunctor f(free.size(), samples.size() * 4);
    f.eval = [&](const Eigen::VectorXd& x, Eigen::VectorXd& out) {
      InterferometerConfig cfg = base;
      for (std::size_t i = 0; i < free.size(); ++i) {
        cfg.*free[i].field = std::clamp(x[static_cast<Eigen::Index>(i)], free[i].lo, free[i].hi);
      }
      cfg = tied(cfg);
      ++evaluations;
      for (std::size_t k = 0; k < samples.size(); ++k) {
        const auto p = interferometer_clicks(cfg, samples[k].phi).as_array();
        for (int j = 0; j < 4; ++j) out[static_cast<Eigen::Index>(4 * k + j)] = observed[k][j] - p[j];
      }
    };
    Eigen::VectorXd x(free.size());
    for (std::size_t i = 0; i < free.size(); ++i) x[static_cast<Eigen::Index>(i)] = base.*free[i].field;
    Eigen::NumericalDiff<ResidualFunctor, Eigen::Central> diff(f, 1e-7);
    Eigen::LevenbergMarquardt<Eigen::NumericalDiff<ResidualFunctor, Eigen::Central>> lm(diff);
    lm.parameters.maxfev = static_cast<Eigen::Index>(options.max_evaluations - evaluations);
    lm.parameters.xtol = 1e-12;
    lm.parameters.ftol = 1e-14;
    const auto status = lm.minimize(x);
    InterferometerConfig polished = base;
    for (std::size_t i = 0; i < free.size(); ++i) {
      polished.*free[i].field = std::clamp(x[static_cast<Eigen::Index>(i)], free[i].lo, free[i].hi);
    }
    const double polished_value = residual(polished);
    if (polished_value < base_value) {
      base = polished;
      base_value = polished_value;
    }
    if (status == Eigen::LevenbergMarquardtSpace::TooManyFunctionEvaluation) converged = false;
  }

  base = tied(base);
  base.phase_offset = wrap_period(base.phase_offset);
  return CalibrationModel(base, options.tab_intervals, base_value, !converged, evaluations);
}

PhaseEstimate estimate_phase(const std::array<double, 4>& observed, const CalibrationModel& cal, PhaseBranch branch,
                             Objective objective) {
  if (!(branch.hi > branch.lo)) throw std::invalid_argument("phase branch must have hi > lo");
  if (branch.hi - branch.lo > 0.5 * kPeriod + 1e-12) {
    throw std::invalid_argument("phase branch must not exceed half a fringe period");
  }
  for (double f : observed) {
    if (!(f >= 0.0 && f <= 1.0)) throw std::invalid_argument("observed frequencies must lie in [0, 1]");
  }

  auto cost = [&](double phi) {
    const auto p = cal.at(phi).as_array();
    double c = 0.0;
    for (int j = 0; j < 4; ++j) {
      if (objective == Objective::kLeastSquares) {
        c += (observed[j] - p[j]) * (observed[j] - p[j]);
      } else if (observed[j] > 0.0) {
        c -= observed[j] * std::log(std::max(p[j], 1e-300));
      }
    }
    return c;
  };

  // Flat curves on the branch make every phase equally good.
  double spread = 0.0;
  std::array<double, 4> lo_p{1, 1, 1, 1};
  std::array<double, 4> hi_p{0, 0, 0, 0};
  for (std::size_t k = 0; k < kBranchGrid; ++k) {
    const double phi = branch.lo + (branch.hi - branch.lo) * static_cast<double>(k) / (kBranchGrid - 1);
    const auto p = cal.at(phi).as_array();
    for (int j = 0; j < 4; ++j) {
      lo_p[j] = std::min(lo_p[j], p[j]);
      hi_p[j] = std::max(hi_p[j], p[j]);
    }
  }
  for (int j = 0; j < 4; ++j) spread = std::max(spread, hi_p[j] - lo_p[j]);
  if (spread < 1e-12) throw UnidentifiableError("calibration curves are flat on the phase branch");

  const auto best = maximize_on_interval([&](double phi) { return -cost(phi); }, branch.lo, branch.hi, kBranchGrid);
  PhaseEstimate est;
  est.phi_est = std::clamp(best.phi, branch.lo, branch.hi);
  est.objective_value = -best.fisher;
  const double info = fisher_per_trial(cal.curves(), est.phi_est);
  est.low_information = info < kLowInformationFraction * cal.peak_fisher();
  return est;
}

PhaseEstimate estimate_phase(const Counts& counts, const CalibrationModel& cal, PhaseBranch branch,
                             Objective objective) {
  auto est = estimate_phase(frequencies(counts), cal, branch, objective);
  est.window_trials = total(counts);
  return est;
}

double bootstrap_sigma(const Counts& counts, const CalibrationModel& cal, PhaseBranch branch, std::size_t resamples,
                       std::uint64_t seed, Objective objective) {
  if (resamples < 100) throw std::invalid_argument("bootstrap needs at least 100 resamples");
  const auto n = total(counts);
  if (n < 1000) throw std::invalid_argument("bootstrap needs at least 1000 counted trials");
  if (std::count_if(counts.begin(), counts.end(), [](std::uint64_t c) { return c > 0; }) < 2) {
    throw UnidentifiableError("counts fall in a single outcome");
  }
  const auto freq = frequencies(counts);
  std::vector<double> estimates(resamples);
  for (std::size_t b = 0; b < resamples; ++b) {
    StreamRng rng(seed, b);
    const auto resampled = sample_multinomial(freq, n, rng.engine());
    estimates[b] = estimate_phase(resampled, cal, branch, objective).phi_est;
  }
  return sample_std(estimates);
}

double crlb(const CalibrationModel& cal, double phi, double trials) {
  if (!(trials >= 1.0)) throw std::invalid_argument("trials must be >= 1");
  const double f = fisher_per_trial(interferometer_model(cal.params()), phi);
  if (f <= 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 / std::sqrt(trials * f);
}

double sample_mean(const std::vector<double>& values) {
  if (values.empty()) throw std::invalid_argument("mean of an empty sample");
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double sample_std(const std::vector<double>& values) {
  if (values.size() < 2) return 0.0;
  const double mean = sample_mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

}  // namespace stimsqz
