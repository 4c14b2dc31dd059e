#pragma once

#include "stimsqz/detection.hpp"
#include "stimsqz/gaussian.hpp"

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

// Brute-force truncated Fock-space simulation of the interferometer. This is
// the independent check on the covariance-matrix path, so it deliberately
// shares nothing with gaussian.cpp beyond the config struct.
namespace stimsqz::fock {

using cplx = std::complex<double>;

class TruncationError : public std::runtime_error {
 public:
  TruncationError(const std::string& what, double achieved_bound)
      : std::runtime_error(what), achieved_bound_(achieved_bound) {}
  double achieved_bound() const { return achieved_bound_; }

 private:
  double achieved_bound_;
};

/// Neglected TMSS tail weight tanh(r)^(2 (n_max + 1)).
double truncation_error_bound(double r_total, int n_max);

/// Smallest n_max whose truncation bound is at most `target`.
int required_n_max(double r_total, double target);

/// c_n = (-tanh r)^n / cosh r for n = 0..n_max.
std::vector<double> tmss_amplitudes(double r, int n_max);

/// Operator on a truncated two-mode space (dimension (n_max+1)^2, index
/// n_first * (n_max+1) + n_second), stored as invariant blocks.
class TwoModeOperator {
 public:
  struct Block {
    std::vector<std::size_t> basis;
    Eigen::MatrixXcd matrix;
  };

  TwoModeOperator(int n_max, std::vector<Block> blocks);

  int n_max() const { return n_max_; }
  std::size_t local_dim() const { return static_cast<std::size_t>(n_max_ + 1); }
  const std::vector<Block>& blocks() const { return blocks_; }

  Eigen::MatrixXcd to_dense() const;

 private:
  int n_max_;
  std::vector<Block> blocks_;
};

/// exp(r (a b - a^dag b^dag)) built from the truncated generator.
TwoModeOperator squeezer_unitary(double r, int n_max);

/// exp(theta (a^dag a' - a'^dag a)); Heisenberg a -> cos(theta) a + sin(theta) a'.
TwoModeOperator beamsplitter_unitary(double theta, int n_max);

/// Amplitude-damping Kraus operators A_k, k = 0..n_max, on one truncated mode.
std::vector<Eigen::MatrixXcd> loss_kraus_operators(double eta, int n_max);

/// Pure state on `num_modes` truncated modes; mode 0 is the most significant index digit.
class FockVector {
 public:
  FockVector(std::size_t num_modes, int n_max);  // vacuum

  std::size_t num_modes() const { return num_modes_; }
  int n_max() const { return n_max_; }
  const Eigen::VectorXcd& amplitudes() const { return amp_; }

  void apply(const TwoModeOperator& op, std::size_t first, std::size_t second);
  void apply_phase(std::size_t mode, double phi);

  /// Probability that every listed mode is empty after per-mode loss
  /// (the loss channel's adjoint maps |0><0| to sum_n (1-eta)^n |n><n|).
  double vacuum_probability(std::span<const std::size_t> modes, std::span<const double> etas) const;

  double norm_squared() const { return amp_.squaredNorm(); }

 private:
  std::size_t num_modes_;
  int n_max_;
  Eigen::VectorXcd amp_;
};

/// Density matrix on truncated modes, same index layout as FockVector.
class DensityMatrix {
 public:
  explicit DensityMatrix(const FockVector& pure);

  std::size_t num_modes() const { return num_modes_; }
  int n_max() const { return n_max_; }
  const Eigen::MatrixXcd& matrix() const { return rho_; }

  void apply(const TwoModeOperator& op, std::size_t first, std::size_t second);
  void apply_phase(std::size_t mode, double phi);
  void apply_loss(std::size_t mode, double eta);

  double vacuum_probability(std::span<const std::size_t> modes) const;
  double trace() const { return rho_.trace().real(); }

 private:
  std::size_t num_modes_;
  int n_max_;
  Eigen::MatrixXcd rho_;
};

/// Full pipeline in the truncated Fock space. Overlap < 1 runs the four-mode
/// pure-state path (no internal loss, reduced n_max in practice).
ClickDistribution simulate_fock(const InterferometerConfig& cfg, double phi, int n_max,
                                double max_truncation = 1e-8);

}  // namespace stimsqz::fock
