#include "stimsqz/detection.hpp"

#include <doctest.h>

#include <array>
#include <cmath>
#include <numbers>

using namespace stimsqz;

namespace {

InterferometerConfig lossy(double r, double eta) {
  auto cfg = InterferometerConfig::ideal(r);
  cfg.eta_h = eta;
  cfg.eta_v = eta;
  return cfg;
}

double sech2(double x) { return 1.0 / (std::cosh(x) * std::cosh(x)); }

}  // namespace

TEST_CASE("vacuum overlap") {
  const std::array<std::size_t, 1> a = {0};
  const std::array<std::size_t, 2> ab = {0, 1};
  const std::array<std::size_t, 3> three = {0, 2, 3};
  CHECK(vacuum_probability(vacuum(4), a) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(vacuum_probability(vacuum(4), three) == doctest::Approx(1.0).epsilon(1e-15));

  const auto tmss = apply_two_mode_squeezer(vacuum(2), 0, 1, 1.18);
  // |c_0|^2 of TMSS(1.18), and the thermal marginal 1 / (1 + sinh^2).
  CHECK(vacuum_probability(tmss, ab) == doctest::Approx(sech2(1.18)).epsilon(1e-12));
  CHECK(vacuum_probability(tmss, a) ==
        doctest::Approx(1.0 / (1.0 + std::sinh(1.18) * std::sinh(1.18))).epsilon(1e-12));
  CHECK(sech2(1.18) == doctest::Approx(0.315324).epsilon(1e-5));

  const std::array<std::size_t, 0> none{};
  CHECK_THROWS_AS(vacuum_probability(tmss, none), std::invalid_argument);
}

TEST_CASE("unphysical covariances are rejected") {
  const std::array<std::size_t, 1> a = {0};
  const GaussianState too_sharp(1, 0.1 * Eigen::MatrixXd::Identity(2, 2));
  CHECK_THROWS_AS(vacuum_probability(too_sharp, a), InvalidStateError);
  const GaussianState negative(1, -1.0 * Eigen::MatrixXd::Identity(2, 2));
  CHECK_THROWS_AS(vacuum_probability(negative, a), InvalidStateError);
  CHECK_THROWS_AS(checked_distribution(1.1, 0.0, 0.0, -0.1), InvalidStateError);
  const auto clamped = checked_distribution(1.0 + 5e-13, -5e-13, 0.0, 0.0);
  CHECK(clamped.p00 == 1.0);
  CHECK(clamped.p01 == 0.0);
}

TEST_CASE("ideal interferometer outcomes") {
  const auto cfg = InterferometerConfig::ideal(0.59);
  const auto dark = interferometer_clicks(cfg, std::numbers::pi / 2);
  CHECK(dark.p00 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(dark.p01 == doctest::Approx(0.0));
  CHECK(dark.p10 == doctest::Approx(0.0));
  CHECK(dark.p11 == doctest::Approx(0.0));

  const auto bright = interferometer_clicks(cfg, 0.0);
  CHECK(bright.p00 == doctest::Approx(sech2(1.18)).epsilon(1e-12));
  CHECK(std::abs(bright.p01) < 1e-12);
  CHECK(std::abs(bright.p10) < 1e-12);
  CHECK(bright.p11 == doctest::Approx(1.0 - sech2(1.18)).epsilon(1e-12));
}

TEST_CASE("lossy bright fringe against the binomial-thinned TMSS") {
  const double eta = 0.75;
  const auto p = interferometer_clicks(lossy(0.59, eta), 0.0);
  // TMSS(1.18) with thinning: P(no photon survives in a) = sum |c_n|^2 (1-eta)^n.
  const double t2 = std::tanh(1.18) * std::tanh(1.18);
  const double quiet_one = sech2(1.18) / (1.0 - t2 * (1.0 - eta));
  const double quiet_both = sech2(1.18) / (1.0 - t2 * (1.0 - eta) * (1.0 - eta));
  CHECK(p.p00 == doctest::Approx(quiet_both).epsilon(1e-12));
  CHECK(p.p01 == doctest::Approx(quiet_one - quiet_both).epsilon(1e-12));
  CHECK(p.p01 > 0.0);
  CHECK(p.p01 == doctest::Approx(p.p10).epsilon(1e-12));
}

TEST_CASE("distribution invariants over a grid") {
  InterferometerConfig asym;
  asym.r1 = 0.5;
  asym.r2 = 0.6;
  asym.eta_h = 0.7;
  asym.eta_v = 0.8;
  asym.eta_internal = 0.9;
  asym.overlap = 0.95;
  asym.phase_offset = 0.2;

  for (int k = 0; k <= 36; ++k) {
    const double phi = std::numbers::pi * k / 36.0;
    const auto a = interferometer_clicks(asym, phi);
    CHECK(a.sum() == doctest::Approx(1.0).epsilon(1e-10));

    const auto sym = interferometer_clicks(lossy(0.45, 0.6), phi);
    CHECK(std::abs(sym.p01 - sym.p10) < 1e-10);

    // More loss, more empty trials.
    double previous = -1.0;
    for (double eta : {1.0, 0.9, 0.7, 0.5, 0.3, 0.1, 0.0}) {
      const double p00 = interferometer_clicks(lossy(0.45, eta), phi).p00;
      CHECK(p00 >= previous - 1e-12);
      previous = p00;
    }
  }
}

TEST_CASE("dark counts are an independent OR on each detector") {
  InterferometerConfig cfg;
  cfg.dark_h = 0.1;
  cfg.dark_v = 0.2;
  const auto p = interferometer_clicks(cfg, 0.3);  // r = 0: vacuum everywhere
  CHECK(p.p00 == doctest::Approx(0.72));
  CHECK(p.p01 == doctest::Approx(0.18));
  CHECK(p.p10 == doctest::Approx(0.08));
  CHECK(p.p11 == doctest::Approx(0.02));
}

TEST_CASE("arm assignment validation") {
  ArmAssignment overlapping{{0, 1}, {1, 2}};
  CHECK_THROWS_AS(click_distribution(vacuum(4), overlapping), std::invalid_argument);
  ArmAssignment empty{{}, {1}};
  CHECK_THROWS_AS(click_distribution(vacuum(4), empty), std::invalid_argument);
  ArmAssignment outside{{0}, {7}};
  CHECK_THROWS_AS(click_distribution(vacuum(4), outside), std::invalid_argument);
}

TEST_CASE("fringe visibility") {
  CHECK(p11_visibility(InterferometerConfig::ideal(0.59)) == doctest::Approx(1.0).epsilon(1e-9));
  // Pure external loss does not wash out the p11 fringe minimum...
  CHECK(p11_visibility(lossy(0.59, 0.75)) == doctest::Approx(1.0).epsilon(1e-9));
  // ...mode mismatch does.
  auto cfg = lossy(0.59, 0.75);
  cfg.overlap = 0.95;
  CHECK(p11_visibility(cfg) < 0.95);

  const double xi = calibrate_overlap(lossy(0.59, 0.75), 0.966);
  auto calibrated = lossy(0.59, 0.75);
  calibrated.overlap = xi;
  CHECK(p11_visibility(calibrated) == doctest::Approx(0.966).epsilon(1e-8));
  CHECK(xi > 0.98);
  CHECK(xi < 0.995);
  CHECK_THROWS_AS(p11_visibility(cfg, 1), std::invalid_argument);
}
