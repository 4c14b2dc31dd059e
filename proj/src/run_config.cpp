#include "stimsqz/run_config.hpp"

#include "stimsqz/detection.hpp"
#include "stimsqz/metrology.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>

namespace stimsqz {
namespace {

constexpr std::uint64_t kScanSalt = 0x5ca7ca11b4a7e5a1ULL;

void reject_unknown(const nlohmann::json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& item : obj.items()) {
    if (!allowed.contains(item.key())) throw ConfigError("unknown key '" + item.key() + "' in " + where);
  }
}

template <typename T>
void read(const nlohmann::json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("key '") + key + "' in " + where + " has the wrong type");
  }
}

}  // namespace

RunConfig parse_run_config(const nlohmann::json& doc, RunConfig base) {
  reject_unknown(doc, {"version", "name", "interferometer", "scenario", "calibration_scan", "ranges", "r_sweep"},
                 "config");
  if (doc.contains("version") && doc.at("version") != kRunConfigVersion) {
    throw ConfigError("unsupported config version");
  }
  read(doc, "name", base.name, "config");

  if (doc.contains("interferometer")) {
    const auto& j = doc.at("interferometer");
    const std::string where = "interferometer";
    reject_unknown(j, {"r1", "r2", "eta_h", "eta_v", "eta_internal", "overlap", "target_visibility", "phase_offset",
                       "snl_per_photon", "dark_h", "dark_v", "mismatch_detected"},
                   where);
    auto& c = base.interferometer;
    read(j, "r1", c.r1, where);
    read(j, "r2", c.r2, where);
    read(j, "eta_h", c.eta_h, where);
    read(j, "eta_v", c.eta_v, where);
    read(j, "eta_internal", c.eta_internal, where);
    read(j, "overlap", c.overlap, where);
    read(j, "phase_offset", c.phase_offset, where);
    read(j, "snl_per_photon", c.snl_per_photon, where);
    read(j, "dark_h", c.dark_h, where);
    read(j, "dark_v", c.dark_v, where);
    read(j, "mismatch_detected", c.mismatch_detected, where);
    if (j.contains("overlap")) base.target_visibility.reset();
    if (j.contains("target_visibility")) {
      if (j.at("target_visibility").is_null()) {
        base.target_visibility.reset();
      } else {
        double v = 0.0;
        read(j, "target_visibility", v, where);
        base.target_visibility = v;
      }
    }
  }

  if (doc.contains("scenario")) {
    const auto& j = doc.at("scenario");
    const std::string where = "scenario";
    reject_unknown(j, {"phases", "step_duration", "window", "repetition_rate", "repeats", "seed", "branch",
                       "bootstrap_resamples"},
                   where);
    auto& s = base.scenario;
    read(j, "window", s.window, where);
    read(j, "repetition_rate", s.repetition_rate, where);
    read(j, "repeats", s.repeats, where);
    read(j, "seed", s.seed, where);
    read(j, "bootstrap_resamples", s.bootstrap_resamples, where);
    double step_duration = s.phase_schedule.empty() ? s.window : s.phase_schedule.front().duration;
    read(j, "step_duration", step_duration, where);
    std::vector<double> phases;
    for (const auto& st : s.phase_schedule) phases.push_back(st.phi_set);
    read(j, "phases", phases, where);
    s.phase_schedule.clear();
    for (double phi : phases) s.phase_schedule.push_back({phi, step_duration});
    if (j.contains("branch")) {
      std::vector<double> b;
      read(j, "branch", b, where);
      if (b.size() != 2) throw ConfigError("scenario.branch must be [lo, hi]");
      s.branch = {b[0], b[1]};
    }
  }

  if (doc.contains("calibration_scan")) {
    const auto& j = doc.at("calibration_scan");
    reject_unknown(j, {"points", "trials_per_point"}, "calibration_scan");
    read(j, "points", base.scan.points, "calibration_scan");
    read(j, "trials_per_point", base.scan.trials_per_point, "calibration_scan");
  }

  if (doc.contains("ranges")) {
    const auto& j = doc.at("ranges");
    reject_unknown(j, {"nbar_min", "nbar_max", "nbar_steps", "noon_max"}, "ranges");
    read(j, "nbar_min", base.ranges.nbar_min, "ranges");
    read(j, "nbar_max", base.ranges.nbar_max, "ranges");
    read(j, "nbar_steps", base.ranges.nbar_steps, "ranges");
    read(j, "noon_max", base.ranges.noon_max, "ranges");
  }
  read(doc, "r_sweep", base.r_sweep, "config");

  try {
    base.interferometer.validate();
    if (base.target_visibility && !(*base.target_visibility > 0.0 && *base.target_visibility <= 1.0)) {
      throw std::invalid_argument("target_visibility must lie in (0, 1]");
    }
    base.scenario.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (base.ranges.nbar_steps < 2 || !(base.ranges.nbar_max > base.ranges.nbar_min) || base.ranges.nbar_min <= 0.0) {
    throw ConfigError("ranges need 0 < nbar_min < nbar_max and at least two steps");
  }
  if (base.ranges.noon_max < 1) throw ConfigError("ranges.noon_max must be >= 1");
  return base;
}

RunConfig load_run_config(const std::string& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_run_config(doc, std::move(base));
}

nlohmann::json to_json(const RunConfig& cfg) {
  const auto& c = cfg.interferometer;
  nlohmann::json interferometer = {{"r1", c.r1},
                                   {"r2", c.r2},
                                   {"eta_h", c.eta_h},
                                   {"eta_v", c.eta_v},
                                   {"eta_internal", c.eta_internal},
                                   {"overlap", c.overlap},
                                   {"phase_offset", c.phase_offset},
                                   {"snl_per_photon", c.snl_per_photon},
                                   {"dark_h", c.dark_h},
                                   {"dark_v", c.dark_v},
                                   {"mismatch_detected", c.mismatch_detected}};
  if (cfg.target_visibility) interferometer["target_visibility"] = *cfg.target_visibility;
  std::vector<double> phases;
  for (const auto& st : cfg.scenario.phase_schedule) phases.push_back(st.phi_set);
  const double step_duration =
      cfg.scenario.phase_schedule.empty() ? cfg.scenario.window : cfg.scenario.phase_schedule.front().duration;
  return {{"version", kRunConfigVersion},
          {"name", cfg.name},
          {"interferometer", interferometer},
          {"scenario",
           {{"phases", phases},
            {"step_duration", step_duration},
            {"window", cfg.scenario.window},
            {"repetition_rate", cfg.scenario.repetition_rate},
            {"repeats", cfg.scenario.repeats},
            {"seed", cfg.scenario.seed},
            {"branch", {cfg.scenario.branch.lo, cfg.scenario.branch.hi}},
            {"bootstrap_resamples", cfg.scenario.bootstrap_resamples}}},
          {"calibration_scan", {{"points", cfg.scan.points}, {"trials_per_point", cfg.scan.trials_per_point}}},
          {"ranges",
           {{"nbar_min", cfg.ranges.nbar_min},
            {"nbar_max", cfg.ranges.nbar_max},
            {"nbar_steps", cfg.ranges.nbar_steps},
            {"noon_max", cfg.ranges.noon_max}}},
          {"r_sweep", cfg.r_sweep}};
}

std::vector<std::string> preset_names() { return {"fig1b", "fig1c", "fig3", "fig4"}; }

RunConfig preset(const std::string& name) {
  RunConfig cfg;
  cfg.name = name;
  if (name == "fig1b" || name == "fig1c") {
    // Ideal detection; only the ranges matter.
    cfg.interferometer = InterferometerConfig::ideal(0.59);
    return cfg;
  }
  if (name == "fig3") {
    cfg.interferometer.r1 = 0.59;
    cfg.interferometer.r2 = 0.59;
    cfg.interferometer.eta_h = 0.744;
    cfg.interferometer.eta_v = 0.751;
    cfg.target_visibility = 0.966;
    cfg.r_sweep = {0.11, 0.2, 0.3, 0.4, 0.5, 0.59};
    return cfg;
  }
  if (name == "fig4") {
    auto& c = cfg.interferometer;
    c.r1 = 0.43;
    c.r2 = 0.43;
    c.eta_h = 0.75;
    c.eta_v = 0.75;
    cfg.target_visibility = 0.966;
    c.overlap = calibrate_overlap(c, *cfg.target_visibility);
    // Place the best operating point at 0.58 rad, the phase the real-time
    // demonstration reports as most sensitive.
    c.phase_offset = phase_offset_for_optimum(c, 0.58);
    cfg.target_visibility.reset();
    auto& s = cfg.scenario;
    s.phase_schedule.clear();
    for (int k = 0; k < 11; ++k) s.phase_schedule.push_back({0.18 + 0.05 * k, 0.2});
    s.window = 0.2;
    s.repetition_rate = kDefaultRepetitionRate;
    s.repeats = 200;
    s.branch = {0.0, 0.8};
    s.bootstrap_resamples = 100;
    return cfg;
  }
  throw ConfigError("unknown preset '" + name + "' (expected fig1b|fig1c|fig3|fig4)");
}

InterferometerConfig resolved_interferometer(const RunConfig& cfg) {
  InterferometerConfig out = cfg.interferometer;
  if (cfg.target_visibility) out.overlap = calibrate_overlap(out, *cfg.target_visibility);
  return out;
}

double phase_offset_for_optimum(InterferometerConfig cfg, double target_phi) {
  cfg.phase_offset = 0.0;
  const auto model = interferometer_model(cfg);
  // With zero offset the dark fringe sits at pi/2; search its lower flank.
  const auto best = maximize_on_interval([&](double phi) { return fisher_per_trial(model, phi); },
                                         0.25 * std::numbers::pi, 0.5 * std::numbers::pi, 181);
  double offset = std::fmod(best.phi - target_phi, std::numbers::pi);
  if (offset < 0.0) offset += std::numbers::pi;
  return offset;
}

std::vector<CalibrationSample> synthetic_scan(const InterferometerConfig& cfg, const CalibrationScan& scan,
                                              std::uint64_t seed) {
  if (scan.points < 8) throw ConfigError("calibration scan needs at least 8 points");
  std::vector<CalibrationSample> out;
  for (std::size_t k = 0; k < scan.points; ++k) {
    const double phi = std::numbers::pi * static_cast<double>(k) / static_cast<double>(scan.points);
    out.push_back({phi, sample_clicks(cfg, phi, scan.trials_per_point, seed ^ kScanSalt, k)});
  }
  return out;
}

}  // namespace stimsqz
