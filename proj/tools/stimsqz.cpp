#include "stimsqz/detection.hpp"
#include "stimsqz/estimation.hpp"
#include "stimsqz/fock.hpp"
#include "stimsqz/metrology.hpp"
#include "stimsqz/report.hpp"
#include "stimsqz/run_config.hpp"
#include "stimsqz/simkit.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace stimsqz;

namespace {

enum ExitCode { kOk = 0, kConfigError = 2, kValidationFailure = 3, kNumericalFailure = 4 };

struct Options {
  std::string config_path;
  std::string out_dir = ".";
  std::string format = "csv";
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string accounting = "single-pass";
  std::string preset_name;
  double h = kDefaultFisherStep;
  bool gnuplot = false;
  PhiGrid grid;
};

class ValidationFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

RunConfig load(const Options& opt) {
  RunConfig cfg = opt.preset_name.empty() ? RunConfig{} : preset(opt.preset_name);
  if (!opt.config_path.empty()) cfg = load_run_config(opt.config_path, cfg);
  if (opt.seed_given) cfg.scenario.seed = opt.seed;
  return cfg;
}

std::string gnuplot_script(const std::string& data_file, const std::string& header) {
  std::size_t columns = 1;
  for (char ch : header) columns += ch == ',' ? 1 : 0;
  std::ostringstream gp;
  gp << "set datafile separator ','\n"
     << "set key autotitle columnhead\n"
     << "plot for [i=2:" << columns << "] '" << data_file << "' using 1:i with lines\n";
  return gp.str();
}

void write_artifacts(const Options& opt, const std::vector<Artifact>& files) {
  const fs::path dir(opt.out_dir);
  fs::create_directories(dir);
  for (const auto& a : files) {
    std::ofstream out(dir / a.name, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + (dir / a.name).string() + "'");
    out << a.contents;
    if (opt.gnuplot && fs::path(a.name).extension() == ".csv") {
      const auto stem = fs::path(a.name).stem().string();
      std::ofstream gp(dir / (stem + ".gp"), std::ios::binary);
      gp << gnuplot_script(a.name, a.contents.substr(0, a.contents.find('\n')));
    }
    std::cout << "wrote " << (dir / a.name).string() << "\n";
  }
}

std::string ext(Format f) { return f == Format::kCsv ? ".csv" : ".json"; }

void cmd_sweep(const Options& opt) {
  const auto cfg = load(opt);
  const auto ifm = resolved_interferometer(cfg);
  const auto fmt = format_from_string(opt.format);
  write_artifacts(opt, {{"sweep" + ext(fmt), fringe_table(ifm, opt.grid).render(fmt)}});
  std::printf("overlap %.6f\n", ifm.overlap);
  std::printf("p11 visibility %.4f\n", p11_visibility(ifm));
}

void cmd_fisher(const Options& opt) {
  const auto cfg = load(opt);
  const auto ifm = resolved_interferometer(cfg);
  const auto fmt = format_from_string(opt.format);
  const auto acc = accounting_from_string(opt.accounting);
  std::vector<Artifact> files = {{"fisher" + ext(fmt), fisher_table(ifm, opt.grid, opt.h, acc).render(fmt)}};
  if (!cfg.r_sweep.empty()) {
    files.push_back({"fisher_r_sweep" + ext(fmt), r_sweep_table(ifm, cfg.r_sweep, opt.h, acc).render(fmt)});
  }
  write_artifacts(opt, files);
  const auto best = best_fisher_report(ifm, opt.h, acc);
  std::printf("accounting %s\n", to_string(acc).c_str());
  std::printf("max fisher per photon %.4f rad^-2 at phi %.4f\n", best.fisher_per_photon, best.phi);
  std::printf("snl per photon %.4f rad^-2\n", ifm.snl_per_photon);
  std::printf("ideal 5-NOON per photon %.4f rad^-2\n", noon_fisher_per_photon(5, 1.0));
}

void cmd_thresholds(const Options& opt) {
  const auto cfg = load(opt);
  const auto fmt = format_from_string(opt.format);
  write_artifacts(opt, {{"thresholds_tm" + ext(fmt), threshold_table(cfg.ranges, cfg.interferometer).render(fmt)},
                        {"thresholds_noon" + ext(fmt), noon_threshold_table(cfg.ranges).render(fmt)}});
}

void cmd_track(const Options& opt) {
  const auto cfg = load(opt);
  const auto acc = accounting_from_string(opt.accounting);
  const auto bundle = track(cfg, acc);
  std::ostringstream csv;
  write_tracking_csv(csv, bundle.run);
  std::vector<Artifact> files = {{"calibration.json", to_json(bundle.calibration).dump(2) + "\n"},
                                 {"tracking.csv", csv.str()}};
  if (!bundle.run.phases.empty()) {
    files.push_back({"tracking_summary.json", tracking_summary(bundle.run, bundle.report).dump(2) + "\n"});
  }
  write_artifacts(opt, files);
  std::printf("trials per window %llu (repetition rate %.4g /s, window %.3g s)\n",
              static_cast<unsigned long long>(bundle.run.trials_per_window), cfg.scenario.repetition_rate,
              cfg.scenario.window);
  if (bundle.calibration.degraded()) std::printf("warning: calibration fit did not converge\n");
  if (bundle.run.phases.empty()) {
    std::printf("empty schedule, no windows\n");
    return;
  }
  for (const auto& ps : bundle.report.phases) {
    std::printf("phi_set %.4f  dphi %.3e  crlb %.3e  snl %.3e  %+.2f dB%s\n", ps.phi_set, ps.delta_phi, ps.crlb,
                ps.delta_phi_snl, ps.enhancement_db, ps.low_information ? "  (low information)" : "");
  }
  const auto& best = bundle.report.phases[bundle.report.best];
  std::printf("best phase %.4f: %+.2f dB, dphi %.3e rad\n", best.phi_set, best.enhancement_db, best.delta_phi);
}

void cmd_estimate(const Options& opt, const std::string& counts_path, const std::string& calibration_path,
                  std::vector<double> branch) {
  const auto cfg = load(opt);
  std::ifstream cal_in(calibration_path);
  if (!cal_in) throw ConfigError("cannot open calibration file '" + calibration_path + "'");
  nlohmann::json cal_doc;
  try {
    cal_doc = nlohmann::json::parse(cal_in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("calibration file is not valid JSON: ") + e.what());
  }
  CalibrationModel cal = [&] {
    try {
      return calibration_from_json(cal_doc);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("calibration file is malformed: ") + e.what());
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("calibration file is malformed: ") + e.what());
    }
  }();
  std::ifstream counts_in(counts_path);
  if (!counts_in) throw ConfigError("cannot open counts file '" + counts_path + "'");
  std::vector<CountRecord> records;
  try {
    records = read_tracking_counts(counts_in);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const PhaseBranch b = branch.empty() ? cfg.scenario.branch : PhaseBranch{branch[0], branch[1]};
  const auto fmt = format_from_string(opt.format);
  Table t{{"window", "phi_est", "objective", "low_information"}, {}};
  for (const auto& rec : records) {
    const auto est = estimate_phase(rec.counts, cal, b);
    t.add({static_cast<double>(rec.window), est.phi_est, est.objective_value, est.low_information ? 1.0 : 0.0});
  }
  write_artifacts(opt, {{"estimates" + ext(fmt), t.render(fmt)}});
  std::printf("estimated %zu windows\n", records.size());
}

void cmd_validate(const std::vector<double>& r_values, const std::vector<double>& etas, std::size_t grid) {
  const auto rep = oracle_validation(r_values, etas, grid);
  for (const auto& c : rep.cases) {
    std::printf("r %.3f eta %.3f n_max %d tail %.2e  max |dp| %.3e\n", c.r, c.eta, c.n_max, c.truncation_bound,
                c.max_abs_diff);
  }
  std::printf("max |dp| = %.3e over %zu phases (tolerance %.0e): %s\n", rep.max_abs_diff(), rep.grid_points,
              rep.tolerance, rep.passed() ? "pass" : "FAIL");
  if (!rep.passed()) throw ValidationFailure("Gaussian and Fock probabilities disagree");
}

void cmd_preset(const Options& opt) {
  const auto fmt = format_from_string(opt.format);
  const auto acc = accounting_from_string(opt.accounting);
  write_artifacts(opt, preset_artifacts(opt.preset_name, fmt, opt.seed, acc, opt.h));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulator for a stimulated-squeezing nonlinear interferometer"};
  app.set_help_flag("--help", "Print this help message and exit");
  app.require_subcommand(0, 1);
  app.fallthrough();
  Options opt;
  app.add_option("--config", opt.config_path, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--out", opt.out_dir, "Output directory");
  app.add_option("--format", opt.format, "Data format")->check(CLI::IsMember({"csv", "json"}));
  auto* seed_opt = app.add_option("--seed", opt.seed, "Master RNG seed");
  app.add_option("--accounting", opt.accounting, "Photon accounting")
      ->check(CLI::IsMember({"single-pass", "double-pass"}));
  app.add_option("--preset", opt.preset_name, "Figure preset")
      ->check(CLI::IsMember({"fig1b", "fig1c", "fig3", "fig4"}));
  app.add_option("--h", opt.h, "Finite-difference step for Fisher information");
  app.add_flag("--gnuplot", opt.gnuplot, "Emit a gnuplot script next to every CSV table");
  app.add_option("--phi-min", opt.grid.min, "First phase of the grid");
  app.add_option("--phi-max", opt.grid.max, "Last phase of the grid");
  app.add_option("--phi-steps", opt.grid.steps, "Number of grid phases");

  auto* sweep = app.add_subcommand("sweep", "Click probabilities over a phase grid");
  auto* fisher = app.add_subcommand("fisher", "Fisher information per trial and per photon");
  auto* thresholds = app.add_subcommand("thresholds", "Loss thresholds for beating the shot-noise limit");
  auto* track = app.add_subcommand("track", "Calibrate, then replay a phase-tracking schedule");
  auto* estimate = app.add_subcommand("estimate", "Estimate phases from recorded counts");
  std::string counts_path;
  std::string calibration_path;
  std::vector<double> branch;
  estimate->add_option("--counts", counts_path, "Tracking CSV with n00..n11 columns")->required();
  estimate->add_option("--calibration", calibration_path, "Calibration JSON")->required();
  estimate->add_option("--branch", branch, "Phase branch lo hi")->expected(2);
  auto* validate = app.add_subcommand("validate", "Gaussian pipeline against the Fock oracle");
  std::vector<double> r_values = {0.3, 0.59};
  std::vector<double> etas = {1.0, 0.75};
  std::size_t grid = 73;
  validate->add_option("--r", r_values, "Squeezing values");
  validate->add_option("--eta", etas, "Detection efficiencies");
  validate->add_option("--grid", grid, "Phase grid points over [0, pi]");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }
  opt.seed_given = seed_opt->count() > 0;

  try {
    if (sweep->parsed()) {
      cmd_sweep(opt);
    } else if (fisher->parsed()) {
      cmd_fisher(opt);
    } else if (thresholds->parsed()) {
      cmd_thresholds(opt);
    } else if (track->parsed()) {
      cmd_track(opt);
    } else if (estimate->parsed()) {
      cmd_estimate(opt, counts_path, calibration_path, branch);
    } else if (validate->parsed()) {
      cmd_validate(r_values, etas, grid);
    } else if (!opt.preset_name.empty()) {
      cmd_preset(opt);
    } else {
      std::cerr << app.help();
      return kConfigError;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const ValidationFailure& e) {
    std::cerr << "validation failed: " << e.what() << "\n";
    return kValidationFailure;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumericalFailure;
  }
  return kOk;
}
