#include "stimsqz/gaussian.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <sstream>

namespace stimsqz {
namespace {

void check_mode(const GaussianState& s, std::size_t m) {
  if (m >= s.num_modes()) {
    std::ostringstream msg;
    msg << "mode index " << m << " out of range for " << s.num_modes() << "-mode state";
    throw std::invalid_argument(msg.str());
  }
}

// Conjugates the covariance by a symplectic matrix that acts only on two modes.
GaussianState conjugate_pair(const GaussianState& s, std::size_t i, std::size_t j,
                             const Eigen::Matrix4d& block) {
  const std::array<Eigen::Index, 4> idx = {static_cast<Eigen::Index>(2 * i),
                                           static_cast<Eigen::Index>(2 * i + 1),
                                           static_cast<Eigen::Index>(2 * j),
                                           static_cast<Eigen::Index>(2 * j + 1)};
  const Eigen::Index dim = s.covariance().rows();
  Eigen::MatrixXd sym = Eigen::MatrixXd::Identity(dim, dim);
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) sym(idx[a], idx[b]) = block(a, b);
  }
  Eigen::MatrixXd cov = sym * s.covariance() * sym.transpose();
  cov = 0.5 * (cov + cov.transpose()).eval();
  return GaussianState(s.num_modes(), std::move(cov));
}

}  // namespace

GaussianState::GaussianState(std::size_t num_modes, Eigen::MatrixXd covariance)
    : num_modes_(num_modes), covariance_(std::move(covariance)) {
  if (num_modes_ == 0) throw std::invalid_argument("Gaussian state needs at least one mode");
  const auto dim = static_cast<Eigen::Index>(2 * num_modes_);
  if (covariance_.rows() != dim || covariance_.cols() != dim) {
    throw std::invalid_argument("covariance size does not match the number of modes");
  }
  if (!covariance_.allFinite()) throw InvalidStateError("covariance has non-finite entries");
  const double scale = std::max(1.0, covariance_.cwiseAbs().maxCoeff());
  if ((covariance_ - covariance_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw InvalidStateError("covariance is not symmetric");
  }
}

Eigen::MatrixXd GaussianState::reduced(std::span<const std::size_t> modes) const {
  const auto k = static_cast<Eigen::Index>(2 * modes.size());
  Eigen::MatrixXd out(k, k);
  for (std::size_t a = 0; a < modes.size(); ++a) {
    if (modes[a] >= num_modes_) throw std::invalid_argument("mode index out of range");
    for (std::size_t b = 0; b < modes.size(); ++b) {
      out.block<2, 2>(2 * a, 2 * b) = covariance_.block<2, 2>(2 * modes[a], 2 * modes[b]);
    }
  }
  return out;
}

Eigen::VectorXd GaussianState::symplectic_eigenvalues() const {
  const Eigen::MatrixXcd m =
      (std::complex<double>(0.0, 1.0) * symplectic_form(num_modes_) * covariance_).eval();
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(m, false);
  std::vector<double> mags;
  for (Eigen::Index k = 0; k < solver.eigenvalues().size(); ++k) {
    mags.push_back(std::abs(solver.eigenvalues()[k]));
  }
  std::sort(mags.begin(), mags.end());
  Eigen::VectorXd out(static_cast<Eigen::Index>(num_modes_));
  // Eigenvalues come in +/- pairs.
  for (std::size_t k = 0; k < num_modes_; ++k) out[static_cast<Eigen::Index>(k)] = mags[2 * k];
  return out;
}

double GaussianState::uncertainty_margin() const {
  const Eigen::MatrixXcd h = covariance_.cast<std::complex<double>>() +
                             std::complex<double>(0.0, 0.5) * symplectic_form(num_modes_);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

double GaussianState::purity_determinant() const { return (2.0 * covariance_).determinant(); }

Eigen::MatrixXd symplectic_form(std::size_t num_modes) {
  const auto dim = static_cast<Eigen::Index>(2 * num_modes);
  Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(dim, dim);
  for (Eigen::Index k = 0; k < dim; k += 2) {
    omega(k, k + 1) = 1.0;
    omega(k + 1, k) = -1.0;
  }
  return omega;
}

GaussianState vacuum(std::size_t num_modes) {
  if (num_modes == 0) throw std::invalid_argument("vacuum needs at least one mode");
  const auto dim = static_cast<Eigen::Index>(2 * num_modes);
  return GaussianState(num_modes, 0.5 * Eigen::MatrixXd::Identity(dim, dim));
}

GaussianState apply_two_mode_squeezer(const GaussianState& s, std::size_t i, std::size_t j, double r) {
  check_mode(s, i);
  check_mode(s, j);
  if (i == j) throw std::invalid_argument("two-mode squeezer needs two distinct modes");
  if (!std::isfinite(r)) throw std::invalid_argument("squeezing parameter must be finite");
  // Heisenberg picture: a -> a cosh r - b^dag sinh r, b -> b cosh r - a^dag sinh r.
  const double c = std::cosh(r);
  const double sh = std::sinh(r);
  Eigen::Matrix4d block;
  block << c, 0, -sh, 0,
           0, c, 0, sh,
           -sh, 0, c, 0,
           0, sh, 0, c;
  return conjugate_pair(s, i, j, block);
}

GaussianState apply_phase(const GaussianState& s, std::span<const std::size_t> modes, double phi) {
  if (modes.empty()) throw std::invalid_argument("phase shift needs at least one mode");
  if (!std::isfinite(phi)) throw std::invalid_argument("phase must be finite");
  for (auto m : modes) check_mode(s, m);
  const auto dim = static_cast<Eigen::Index>(2 * s.num_modes());
  Eigen::MatrixXd rot = Eigen::MatrixXd::Identity(dim, dim);
  const double c = std::cos(phi);
  const double sn = std::sin(phi);
  for (auto m : modes) {
    const auto k = static_cast<Eigen::Index>(2 * m);
    rot(k, k) = c;
    rot(k, k + 1) = -sn;
    rot(k + 1, k) = sn;
    rot(k + 1, k + 1) = c;
  }
  Eigen::MatrixXd cov = rot * s.covariance() * rot.transpose();
  cov = 0.5 * (cov + cov.transpose()).eval();
  return GaussianState(s.num_modes(), std::move(cov));
}

GaussianState apply_beamsplitter(const GaussianState& s, std::size_t i, std::size_t j, double theta) {
  check_mode(s, i);
  check_mode(s, j);
  if (i == j) throw std::invalid_argument("beamsplitter needs two distinct modes");
  const double c = std::cos(theta);
  const double sn = std::sin(theta);
  Eigen::Matrix4d block;
  block << c, 0, sn, 0,
           0, c, 0, sn,
           -sn, 0, c, 0,
           0, -sn, 0, c;
  return conjugate_pair(s, i, j, block);
}

GaussianState apply_loss(const GaussianState& s, std::size_t mode, double eta) {
  check_mode(s, mode);
  if (!(eta >= 0.0 && eta <= 1.0)) throw std::invalid_argument("loss transmissivity must lie in [0, 1]");
  Eigen::MatrixXd cov = s.covariance();
  const auto k = static_cast<Eigen::Index>(2 * mode);
  const double t = std::sqrt(eta);
  cov.middleRows(k, 2) *= t;
  cov.middleCols(k, 2) *= t;
  cov(k, k) += 0.5 * (1.0 - eta);
  cov(k + 1, k + 1) += 0.5 * (1.0 - eta);
  return GaussianState(s.num_modes(), std::move(cov));
}

double mean_photon(const GaussianState& s, std::span<const std::size_t> modes) {
  double total = 0.0;
  for (auto m : modes) {
    check_mode(s, m);
    const auto k = static_cast<Eigen::Index>(2 * m);
    total += 0.5 * (s.covariance()(k, k) + s.covariance()(k + 1, k + 1) - 1.0);
  }
  return total;
}

std::string to_string(Accounting a) {
  return a == Accounting::kSinglePass ? "single-pass" : "double-pass";
}

Accounting accounting_from_string(const std::string& name) {
  if (name == "single-pass") return Accounting::kSinglePass;
  if (name == "double-pass") return Accounting::kDoublePass;
  throw std::invalid_argument("unknown accounting '" + name + "' (expected single-pass|double-pass)");
}

InterferometerConfig InterferometerConfig::ideal(double r) {
  InterferometerConfig cfg;
  cfg.r1 = r;
  cfg.r2 = r;
  return cfg;
}

void InterferometerConfig::validate() const {
  auto unit = [](const char* name, double v) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument(std::string(name) + " must lie in [0, 1]");
  };
  if (!(std::isfinite(r1) && r1 >= 0.0)) throw std::invalid_argument("r1 must be finite and >= 0");
  if (!(std::isfinite(r2) && r2 >= 0.0)) throw std::invalid_argument("r2 must be finite and >= 0");
  unit("eta_h", eta_h);
  unit("eta_v", eta_v);
  unit("eta_internal", eta_internal);
  unit("overlap", overlap);
  unit("dark_h", dark_h);
  unit("dark_v", dark_v);
  if (!std::isfinite(phase_offset)) throw std::invalid_argument("phase_offset must be finite");
  if (!(std::isfinite(snl_per_photon) && snl_per_photon >= 0.0)) {
    throw std::invalid_argument("snl_per_photon must be finite and >= 0");
  }
}

GaussianState build_interferometer(const InterferometerConfig& cfg, double phi) {
  cfg.validate();
  using namespace modes;
  GaussianState s = vacuum(kCount);
  s = apply_two_mode_squeezer(s, kA, kB, cfg.r1);
  if (cfg.eta_internal < 1.0) {
    s = apply_loss(s, kA, cfg.eta_internal);
    s = apply_loss(s, kB, cfg.eta_internal);
  }
  constexpr std::array<std::size_t, 4> all = {kA, kB, kAPrime, kBPrime};
  s = apply_phase(s, all, phi + cfg.phase_offset);

  // Rotate so that modes a, b carry xi a + sqrt(1 - xi^2) a' (and likewise b),
  // squeeze those, then rotate back to the physical arm modes.
  const double theta = std::acos(cfg.overlap);
  s = apply_beamsplitter(s, kA, kAPrime, theta);
  s = apply_beamsplitter(s, kB, kBPrime, theta);
  s = apply_two_mode_squeezer(s, kA, kB, cfg.r2);
  s = apply_beamsplitter(s, kA, kAPrime, -theta);
  s = apply_beamsplitter(s, kB, kBPrime, -theta);

  s = apply_loss(s, kA, cfg.eta_h);
  s = apply_loss(s, kAPrime, cfg.eta_h);
  s = apply_loss(s, kB, cfg.eta_v);
  s = apply_loss(s, kBPrime, cfg.eta_v);
  return s;
}

double photons_through_sample(const InterferometerConfig& cfg, Accounting accounting) {
  const double single = 2.0 * std::sinh(cfg.r1) * std::sinh(cfg.r1);
  return accounting == Accounting::kSinglePass ? single : 2.0 * single;
}

}  // namespace stimsqz
