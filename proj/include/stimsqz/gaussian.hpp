#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace stimsqz {

/// Raised when a covariance matrix stops describing a physical state.
class InvalidStateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Zero-mean multimode Gaussian state.
///
/// Quadratures are interleaved (x1, p1, x2, p2, ...) with x = (a + a^dag)/sqrt(2),
/// so the vacuum covariance is I/2. States are immutable values; every map
/// returns a new state.
class GaussianState {
 public:
  GaussianState(std::size_t num_modes, Eigen::MatrixXd covariance);

  std::size_t num_modes() const { return num_modes_; }
  const Eigen::MatrixXd& covariance() const { return covariance_; }

  /// Reduced covariance of the listed modes, in the listed order.
  Eigen::MatrixXd reduced(std::span<const std::size_t> modes) const;

  /// Symplectic eigenvalues in ascending order.
  Eigen::VectorXd symplectic_eigenvalues() const;

  /// Smallest eigenvalue of the Hermitian matrix sigma + (i/2) Omega.
  double uncertainty_margin() const;

  /// det(2 sigma); 1 for pure states.
  double purity_determinant() const;

 private:
  std::size_t num_modes_;
  Eigen::MatrixXd covariance_;
};

/// Symplectic form for `num_modes` interleaved modes.
Eigen::MatrixXd symplectic_form(std::size_t num_modes);

GaussianState vacuum(std::size_t num_modes);

/// Two-mode squeezer exp(r (a b - a^dag b^dag)) on modes i, j.
GaussianState apply_two_mode_squeezer(const GaussianState& s, std::size_t i, std::size_t j, double r);

/// Phase shift exp(i phi n) on every listed mode.
GaussianState apply_phase(const GaussianState& s, std::span<const std::size_t> modes, double phi);

/// Passive mixer a_i -> cos(theta) a_i + sin(theta) a_j, a_j -> -sin(theta) a_i + cos(theta) a_j.
GaussianState apply_beamsplitter(const GaussianState& s, std::size_t i, std::size_t j, double theta);

/// Pure-loss channel of transmissivity eta on one mode.
GaussianState apply_loss(const GaussianState& s, std::size_t mode, double eta);

double mean_photon(const GaussianState& s, std::span<const std::size_t> modes);

/// How photons "through the sample" are counted per trial.
enum class Accounting {
  kSinglePass,  ///< first-pass TMSS crosses the sample once: 2 sinh^2(r1)
  kDoublePass,  ///< the same photons cross it twice: 4 sinh^2(r1)
};

std::string to_string(Accounting a);
Accounting accounting_from_string(const std::string& name);

/// Physical model of the stimulated-squeezing interferometer.
struct InterferometerConfig {
  double r1 = 0.0;
  double r2 = 0.0;
  double eta_h = 1.0;
  double eta_v = 1.0;
  double eta_internal = 1.0;
  /// Amplitude overlap between the seed and the second squeezing process.
  double overlap = 1.0;
  double phase_offset = 0.0;
  double snl_per_photon = 2.0;
  /// Per-detector dark-click probability, folded in as an independent OR.
  double dark_h = 0.0;
  double dark_v = 0.0;
  /// Whether the mismatched ancilla light reaches the detectors. When false
  /// the collection optics keep only the matched mode.
  bool mismatch_detected = true;

  /// Symmetric lossless configuration with r1 = r2 = r.
  static InterferometerConfig ideal(double r);

  /// Throws std::invalid_argument naming the first bad field.
  void validate() const;
};

/// Mode layout of the four-mode pipeline.
namespace modes {
inline constexpr std::size_t kA = 0;         // matched, horizontal arm
inline constexpr std::size_t kB = 1;         // matched, vertical arm
inline constexpr std::size_t kAPrime = 2;    // mismatched ancilla, horizontal arm
inline constexpr std::size_t kBPrime = 3;    // mismatched ancilla, vertical arm
inline constexpr std::size_t kCount = 4;
}  // namespace modes

/// S(r2) U(phi + offset) S(r1) |0> with internal loss, mode mismatch and
/// external arm losses. Returns the four-mode output state.
GaussianState build_interferometer(const InterferometerConfig& cfg, double phi);

/// Mean photons through the sample per trial under the chosen accounting.
double photons_through_sample(const InterferometerConfig& cfg, Accounting accounting);

}  // namespace stimsqz
