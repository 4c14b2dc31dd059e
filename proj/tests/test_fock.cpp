#include "stimsqz/fock.hpp"

#include "stimsqz/detection.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace stimsqz;
using namespace stimsqz::fock;

namespace {

double sech2(double x) { return 1.0 / (std::cosh(x) * std::cosh(x)); }

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  }
  return out;
}

double max_click_error(const ClickDistribution& a, const ClickDistribution& b) {
  const auto x = a.as_array();
  const auto y = b.as_array();
  double e = 0.0;
  for (int k = 0; k < 4; ++k) e = std::max(e, std::abs(x[k] - y[k]));
  return e;
}

}  // namespace

TEST_CASE("truncation bound") {
  CHECK(truncation_error_bound(0.0, 5) == 0.0);
  CHECK(truncation_error_bound(1.18, 20) == doctest::Approx(3.509049e-4).epsilon(1e-5));
  CHECK(truncation_error_bound(1.18, 40) == doctest::Approx(1.798431e-7).epsilon(1e-5));
  CHECK(truncation_error_bound(0.86, 30) < 1e-8);
  CHECK(required_n_max(1.18, 1e-8) == 48);
  CHECK(truncation_error_bound(1.18, 48) < 1e-8);
  CHECK(truncation_error_bound(1.18, 47) > 1e-8);
}

TEST_CASE("TMSS amplitudes") {
  const auto vac = tmss_amplitudes(0.0, 4);
  CHECK(vac[0] == 1.0);
  for (std::size_t n = 1; n < vac.size(); ++n) CHECK(vac[n] == 0.0);

  const auto c = tmss_amplitudes(0.59, 30);
  CHECK(c[0] == doctest::Approx(0.848063).epsilon(1e-6));
  CHECK(c[1] < 0.0);  // (-tanh r)^n
  double norm = 0.0;
  for (double x : c) norm += x * x;
  CHECK(norm == doctest::Approx(1.0 - std::pow(std::tanh(0.59), 62)).epsilon(1e-14));
  // Same number as the Gaussian vacuum overlap.
  const std::array<std::size_t, 2> ab = {0, 1};
  CHECK(c[0] * c[0] == doctest::Approx(vacuum_probability(apply_two_mode_squeezer(vacuum(2), 0, 1, 0.59), ab)));
  CHECK_THROWS_AS(tmss_amplitudes(0.1, 0), std::invalid_argument);
}

TEST_CASE("squeezer unitary") {
  SUBCASE("r = 0 is the identity") {
    const auto u = squeezer_unitary(0.0, 5).to_dense();
    CHECK((u - Eigen::MatrixXcd::Identity(36, 36)).cwiseAbs().maxCoeff() < 1e-14);
  }
  SUBCASE("unitary on the truncated space") {
    const auto u = squeezer_unitary(0.7, 12).to_dense();
    const auto d = u.rows();
    CHECK((u.adjoint() * u - Eigen::MatrixXcd::Identity(d, d)).cwiseAbs().maxCoeff() < 1e-8);
  }
  SUBCASE("vacuum column reproduces the TMSS closed form") {
    const int n_max = 40;
    FockVector psi(2, n_max);
    psi.apply(squeezer_unitary(0.59, n_max), 0, 1);
    const auto c = tmss_amplitudes(0.59, n_max);
    for (int n = 0; n <= 20; ++n) {
      CHECK(std::abs(psi.amplitudes()[n * (n_max + 1) + n] - c[static_cast<std::size_t>(n)]) < 1e-8);
    }
  }
  SUBCASE("S(0.3) S(0.3) = S(0.6) on vacuum") {
    const int n_max = 30;
    FockVector psi(2, n_max);
    const auto s = squeezer_unitary(0.3, n_max);
    psi.apply(s, 0, 1);
    psi.apply(s, 0, 1);
    const auto c = tmss_amplitudes(0.6, n_max);
    for (int n = 0; n <= 15; ++n) {
      CHECK(std::abs(psi.amplitudes()[n * (n_max + 1) + n] - c[static_cast<std::size_t>(n)]) < 1e-8);
    }
  }
  SUBCASE("pinned sign convention: <ab> = -sinh(2r)/2 in both representations") {
    const double r = 0.45;
    const int n_max = 40;
    const auto c = tmss_amplitudes(r, n_max);
    double ab = 0.0;
    for (int n = 0; n < n_max; ++n) ab += c[n] * c[n + 1] * (n + 1);
    const auto cov = apply_two_mode_squeezer(vacuum(2), 0, 1, r).covariance();
    CHECK(ab == doctest::Approx(-0.5 * std::sinh(2 * r)).epsilon(1e-10));
    CHECK(ab == doctest::Approx(0.5 * (cov(0, 2) - cov(1, 3))).epsilon(1e-10));
  }
}

TEST_CASE("loss Kraus operators") {
  const auto ops = loss_kraus_operators(0.63, 9);
  Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(10, 10);
  for (const auto& a : ops) sum += a.adjoint() * a;
  CHECK((sum - Eigen::MatrixXcd::Identity(10, 10)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK_THROWS_AS(loss_kraus_operators(1.5, 3), std::invalid_argument);
}

TEST_CASE("density-matrix loss equals the explicit Kraus sum") {
  const int n_max = 4;
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  FockVector psi(2, n_max);
  psi.apply(squeezer_unitary(0.5, n_max), 0, 1);
  psi.apply(beamsplitter_unitary(0.4, n_max), 0, 1);
  psi.apply_phase(1, 0.9);

  DensityMatrix rho(psi);
  const double eta = 0.6;
  const Eigen::MatrixXcd before = rho.matrix();
  rho.apply_loss(1, eta);

  const auto ops = loss_kraus_operators(eta, n_max);
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(n_max + 1, n_max + 1);
  Eigen::MatrixXcd expected = Eigen::MatrixXcd::Zero(before.rows(), before.cols());
  for (const auto& a : ops) {
    const Eigen::MatrixXcd k = kron(id, a);
    expected += k * before * k.adjoint();
  }
  CHECK((rho.matrix() - expected).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(rho.trace() == doctest::Approx(before.trace().real()).epsilon(1e-10));
  CHECK((rho.matrix() - rho.matrix().adjoint()).cwiseAbs().maxCoeff() < 1e-14);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho.matrix());
  CHECK(es.eigenvalues().minCoeff() >= -1e-10);
}

TEST_CASE("density-matrix unitary matches the pure path") {
  const int n_max = 6;
  FockVector psi(2, n_max);
  psi.apply(squeezer_unitary(0.3, n_max), 0, 1);
  DensityMatrix rho(psi);
  const auto s = squeezer_unitary(0.25, n_max);
  const auto bs = beamsplitter_unitary(0.7, n_max);
  psi.apply(s, 0, 1);
  psi.apply(bs, 0, 1);
  rho.apply(s, 0, 1);
  rho.apply(bs, 0, 1);
  const Eigen::MatrixXcd pure = psi.amplitudes() * psi.amplitudes().adjoint();
  CHECK((rho.matrix() - pure).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("simulate_fock against closed forms") {
  const auto cfg = InterferometerConfig::ideal(0.59);
  const int n_max = 48;
  const auto dark = simulate_fock(cfg, std::numbers::pi / 2, n_max);
  CHECK(std::abs(dark.p00 - 1.0) < 1e-8);
  CHECK(std::abs(dark.p11) < 1e-8);

  const auto bright = simulate_fock(cfg, 0.0, n_max);
  CHECK(std::abs(bright.p11 - (1.0 - sech2(1.18))) < 1e-8);
  // Photon-number correlation: no single-sided clicks without loss.
  CHECK(bright.p01 == 0.0);
  CHECK(bright.p10 == 0.0);
}

TEST_CASE("simulate_fock matches the Gaussian path") {
  SUBCASE("external loss, overlap 1") {
    auto cfg = InterferometerConfig::ideal(0.3);
    cfg.eta_h = 0.75;
    cfg.eta_v = 0.75;
    const int n_max = required_n_max(0.6, 1e-9);
    for (int k = 0; k <= 12; ++k) {
      const double phi = std::numbers::pi * k / 12.0;
      CHECK(max_click_error(simulate_fock(cfg, phi, n_max), interferometer_clicks(cfg, phi)) < 1e-6);
    }
  }
  SUBCASE("internal loss, asymmetric gains and efficiencies, dark counts") {
    InterferometerConfig cfg;
    cfg.r1 = 0.3;
    cfg.r2 = 0.25;
    cfg.eta_internal = 0.9;
    cfg.eta_h = 0.8;
    cfg.eta_v = 0.7;
    cfg.phase_offset = 0.2;
    cfg.dark_h = 1e-3;
    const int n_max = required_n_max(0.55, 1e-9);
    for (double phi : {0.0, 0.5, 1.2, 2.0}) {
      CHECK(max_click_error(simulate_fock(cfg, phi, n_max), interferometer_clicks(cfg, phi)) < 1e-6);
    }
  }
  SUBCASE("mode mismatch on the four-mode path") {
    InterferometerConfig cfg;
    cfg.r1 = 0.2;
    cfg.r2 = 0.2;
    cfg.overlap = 0.9;
    cfg.eta_h = 0.75;
    cfg.eta_v = 0.8;
    for (double phi : {0.0, 0.7, 1.4}) {
      CHECK(max_click_error(simulate_fock(cfg, phi, 10), interferometer_clicks(cfg, phi)) < 1e-4);
    }
  }
}

TEST_CASE("simulate_fock guards") {
  CHECK_THROWS_AS(simulate_fock(InterferometerConfig::ideal(0.59), 0.0, 20), TruncationError);
  try {
    simulate_fock(InterferometerConfig::ideal(0.59), 0.0, 20);
  } catch (const TruncationError& e) {
    CHECK(e.achieved_bound() == doctest::Approx(truncation_error_bound(1.18, 20)));
  }
  InterferometerConfig cfg = InterferometerConfig::ideal(0.1);
  cfg.overlap = 0.9;
  cfg.eta_internal = 0.9;
  CHECK_THROWS_AS(simulate_fock(cfg, 0.0, 8), std::invalid_argument);
}
