#include "stimsqz/gaussian.hpp"

#include <doctest.h>

#include <array>
#include <cmath>
#include <numbers>
#include <random>

using namespace stimsqz;

namespace {

constexpr std::array<std::size_t, 2> kPair = {0, 1};
constexpr std::array<std::size_t, 4> kAll = {0, 1, 2, 3};

double max_abs_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) { return (a - b).cwiseAbs().maxCoeff(); }

GaussianState tmss(double r) { return apply_two_mode_squeezer(vacuum(2), 0, 1, r); }

}  // namespace

TEST_CASE("vacuum is I/2") {
  CHECK(max_abs_diff(vacuum(2).covariance(), 0.5 * Eigen::MatrixXd::Identity(4, 4)) == 0.0);
  CHECK(max_abs_diff(vacuum(4).covariance(), 0.5 * Eigen::MatrixXd::Identity(8, 8)) == 0.0);
  CHECK(mean_photon(vacuum(2), kPair) == 0.0);
  CHECK_THROWS_AS(vacuum(0), std::invalid_argument);
}

TEST_CASE("two-mode squeezer") {
  SUBCASE("r = 0 is the identity") {
    CHECK(max_abs_diff(tmss(0.0).covariance(), vacuum(2).covariance()) == 0.0);
  }
  SUBCASE("mean photon number 2 sinh^2 r") {
    const double n = mean_photon(tmss(0.59), kPair);
    CHECK(n == doctest::Approx(2.0 * std::sinh(0.59) * std::sinh(0.59)).epsilon(1e-12));
    // Reported as 0.78(1).
    CHECK(std::abs(n - 0.78) < 0.01);
    CHECK(mean_photon(tmss(0.43), kPair) == doctest::Approx(0.39316).epsilon(1e-4));
  }
  SUBCASE("S(r) S(r) = S(2r)") {
    const auto twice = apply_two_mode_squeezer(tmss(0.59), 0, 1, 0.59);
    CHECK(max_abs_diff(twice.covariance(), tmss(1.18).covariance()) < 1e-12);
  }
  SUBCASE("TMSS correlations follow the sign convention") {
    const double r = 0.37;
    const Eigen::MatrixXd cov = tmss(r).covariance();
    CHECK(cov(0, 0) == doctest::Approx(0.5 * std::cosh(2 * r)));
    CHECK(cov(0, 2) == doctest::Approx(-0.5 * std::sinh(2 * r)));
    CHECK(cov(1, 3) == doctest::Approx(0.5 * std::sinh(2 * r)));
  }
  SUBCASE("bad arguments") {
    CHECK_THROWS_AS(apply_two_mode_squeezer(vacuum(2), 1, 1, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(apply_two_mode_squeezer(vacuum(2), 0, 2, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(apply_two_mode_squeezer(vacuum(2), 0, 1, std::nan("")), std::invalid_argument);
  }
}

TEST_CASE("phase shift") {
  const auto s = tmss(0.4);
  CHECK(max_abs_diff(apply_phase(s, kPair, 0.0).covariance(), s.covariance()) == 0.0);
  CHECK(max_abs_diff(apply_phase(s, kPair, 2 * std::numbers::pi).covariance(), s.covariance()) < 1e-12);
  CHECK(mean_photon(apply_phase(s, kPair, 0.7), kPair) == doctest::Approx(mean_photon(s, kPair)).epsilon(1e-14));

  // U(pi/2) S(r) U(pi/2)^dag = S(-r): the second squeezer undoes the first.
  auto pipeline = apply_phase(s, kPair, std::numbers::pi / 2);
  pipeline = apply_two_mode_squeezer(pipeline, 0, 1, 0.4);
  CHECK(max_abs_diff(pipeline.covariance(), vacuum(2).covariance()) < 1e-12);

  const std::array<std::size_t, 0> none{};
  CHECK_THROWS_AS(apply_phase(s, none, 0.1), std::invalid_argument);
}

TEST_CASE("loss channel") {
  const auto s = tmss(0.59);
  CHECK(max_abs_diff(apply_loss(s, 0, 1.0).covariance(), s.covariance()) == 0.0);

  const auto dead = apply_loss(s, 1, 0.0);
  const std::array<std::size_t, 1> mode1 = {1};
  CHECK(max_abs_diff(dead.reduced(mode1), 0.5 * Eigen::MatrixXd::Identity(2, 2)) < 1e-15);

  auto lossy = apply_loss(apply_loss(s, 0, 0.75), 1, 0.75);
  CHECK(mean_photon(lossy, kPair) == doctest::Approx(0.75 * mean_photon(s, kPair)).epsilon(1e-12));
  CHECK(mean_photon(lossy, kPair) == doctest::Approx(0.5855).epsilon(1e-3));

  CHECK_THROWS_AS(apply_loss(s, 0, 1.01), std::invalid_argument);
  CHECK_THROWS_AS(apply_loss(s, 0, -0.1), std::invalid_argument);
}

TEST_CASE("random gate sequences keep the state physical") {
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> squeeze(-0.8, 0.8);
  std::uniform_real_distribution<double> angle(-3.5, 3.5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> mode(0, 3);

  for (int trial = 0; trial < 50; ++trial) {
    GaussianState pure = vacuum(4);
    GaussianState mixed = vacuum(4);
    for (int step = 0; step < 12; ++step) {
      std::size_t i = mode(rng);
      std::size_t j = mode(rng);
      while (j == i) j = mode(rng);
      switch (step % 3) {
        case 0: {
          const double r = squeeze(rng);
          pure = apply_two_mode_squeezer(pure, i, j, r);
          mixed = apply_two_mode_squeezer(mixed, i, j, r);
          break;
        }
        case 1: {
          const std::array<std::size_t, 2> ij = {i, j};
          const double phi = angle(rng);
          pure = apply_phase(pure, ij, phi);
          mixed = apply_phase(mixed, ij, phi);
          break;
        }
        default: {
          const double theta = angle(rng);
          pure = apply_beamsplitter(pure, i, j, theta);
          mixed = apply_beamsplitter(mixed, i, j, theta);
          const std::size_t m = mode(rng);
          const double eta = unit(rng);
          const double before = mean_photon(mixed, std::array<std::size_t, 1>{m});
          mixed = apply_loss(mixed, m, eta);
          CHECK(mean_photon(mixed, std::array<std::size_t, 1>{m}) ==
                doctest::Approx(eta * before).epsilon(1e-12));
        }
      }
    }
    CHECK(pure.purity_determinant() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(pure.uncertainty_margin() >= -1e-9);
    CHECK(mixed.uncertainty_margin() >= -1e-9);
    CHECK(mixed.symplectic_eigenvalues().minCoeff() >= 0.5 - 1e-9);
    CHECK(pure.symplectic_eigenvalues().maxCoeff() == doctest::Approx(0.5).epsilon(1e-8));
  }
}

TEST_CASE("interferometer pipeline") {
  SUBCASE("dark fringe of the ideal pipeline is the global vacuum") {
    const auto s = build_interferometer(InterferometerConfig::ideal(0.59), std::numbers::pi / 2);
    CHECK(max_abs_diff(s.covariance(), vacuum(4).covariance()) < 1e-12);
  }
  SUBCASE("bright fringe of the ideal pipeline is TMSS(2r) on the matched pair") {
    const auto s = build_interferometer(InterferometerConfig::ideal(0.59), 0.0);
    const auto ref = apply_two_mode_squeezer(vacuum(4), 0, 1, 1.18);
    CHECK(max_abs_diff(s.covariance(), ref.covariance()) < 1e-12);
  }
  SUBCASE("period pi in the phase") {
    InterferometerConfig cfg;
    cfg.r1 = 0.5;
    cfg.r2 = 0.62;
    cfg.eta_h = 0.7;
    cfg.eta_v = 0.8;
    cfg.eta_internal = 0.93;
    cfg.overlap = 0.97;
    cfg.phase_offset = 0.3;
    for (double phi : {0.0, 0.41, 1.3, 2.9}) {
      const auto a = build_interferometer(cfg, phi);
      const auto b = build_interferometer(cfg, phi + std::numbers::pi);
      CHECK(max_abs_diff(a.covariance(), b.covariance()) < 1e-12);
      CHECK(a.uncertainty_margin() >= -1e-9);
    }
  }
  SUBCASE("invalid configs are rejected") {
    InterferometerConfig cfg;
    cfg.overlap = 1.2;
    CHECK_THROWS_AS(build_interferometer(cfg, 0.0), std::invalid_argument);
    cfg = InterferometerConfig{};
    cfg.r1 = -0.1;
    CHECK_THROWS_AS(build_interferometer(cfg, 0.0), std::invalid_argument);
  }
}

TEST_CASE("photon accounting") {
  const auto cfg = InterferometerConfig::ideal(0.59);
  const double single = photons_through_sample(cfg, Accounting::kSinglePass);
  CHECK(single == doctest::Approx(2 * std::sinh(0.59) * std::sinh(0.59)));
  CHECK(photons_through_sample(cfg, Accounting::kDoublePass) == doctest::Approx(2 * single));
  CHECK(accounting_from_string("double-pass") == Accounting::kDoublePass);
  CHECK_THROWS_AS(accounting_from_string("triple"), std::invalid_argument);
}
