#include "stimsqz/fock.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace stimsqz::fock {
namespace {

std::size_t ipow(std::size_t base, std::size_t exp) {
  std::size_t out = 1;
  for (std::size_t k = 0; k < exp; ++k) out *= base;
  return out;
}

// exp(K) for a real antisymmetric block K, via the eigendecomposition of the
// Hermitian matrix H = iK: exp(K) = V exp(-i Lambda) V^dag.
Eigen::MatrixXcd exp_antisymmetric(const Eigen::MatrixXd& generator) {
  const Eigen::MatrixXcd h = cplx(0.0, 1.0) * generator.cast<cplx>();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h);
  const Eigen::VectorXd& lambda = solver.eigenvalues();
  Eigen::VectorXcd phases(lambda.size());
  for (Eigen::Index k = 0; k < lambda.size(); ++k) phases[k] = std::exp(cplx(0.0, -lambda[k]));
  return solver.eigenvectors() * phases.asDiagonal() * solver.eigenvectors().adjoint();
}

// Offsets of every global index whose digits at `first` and `second` are zero.
std::vector<std::size_t> pair_bases(std::size_t num_modes, std::size_t d, std::size_t first,
                                    std::size_t second) {
  const std::size_t total = ipow(d, num_modes);
  const std::size_t s1 = ipow(d, num_modes - 1 - first);
  const std::size_t s2 = ipow(d, num_modes - 1 - second);
  std::vector<std::size_t> out;
  out.reserve(total / (d * d));
  for (std::size_t g = 0; g < total; ++g) {
    if ((g / s1) % d == 0 && (g / s2) % d == 0) out.push_back(g);
  }
  return out;
}

std::size_t digit(std::size_t index, std::size_t num_modes, std::size_t d, std::size_t mode) {
  return (index / ipow(d, num_modes - 1 - mode)) % d;
}

void check_pair(std::size_t num_modes, int n_max, const TwoModeOperator& op, std::size_t first,
                std::size_t second) {
  if (first >= num_modes || second >= num_modes || first == second) {
    throw std::invalid_argument("two-mode operator needs two distinct valid modes");
  }
  if (op.n_max() != n_max) throw std::invalid_argument("operator truncation does not match state");
}

// Global indices touched by one operator block at a given base offset.
std::vector<Eigen::Index> block_indices(const TwoModeOperator::Block& block, std::size_t base,
                                        std::size_t d, std::size_t s1, std::size_t s2) {
  std::vector<Eigen::Index> idx(block.basis.size());
  for (std::size_t k = 0; k < block.basis.size(); ++k) {
    const std::size_t n1 = block.basis[k] / d;
    const std::size_t n2 = block.basis[k] % d;
    idx[k] = static_cast<Eigen::Index>(base + n1 * s1 + n2 * s2);
  }
  return idx;
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double out = 1.0;
  for (int j = 1; j <= k; ++j) out = out * static_cast<double>(n - k + j) / static_cast<double>(j);
  return out;
}

}  // namespace

double truncation_error_bound(double r_total, int n_max) {
  if (n_max < 0) throw std::invalid_argument("n_max must be >= 0");
  const double t = std::tanh(std::abs(r_total));
  return std::pow(t, 2.0 * (n_max + 1));
}

int required_n_max(double r_total, double target) {
  if (!(target > 0.0 && target < 1.0)) throw std::invalid_argument("target bound must lie in (0, 1)");
  int n = 0;
  while (truncation_error_bound(r_total, n) > target) {
    if (++n > 4000) throw TruncationError("no practical truncation reaches the target", target);
  }
  return n;
}

std::vector<double> tmss_amplitudes(double r, int n_max) {
  if (n_max < 1) throw std::invalid_argument("n_max must be >= 1");
  std::vector<double> c(static_cast<std::size_t>(n_max + 1));
  const double t = -std::tanh(r);
  c[0] = 1.0 / std::cosh(r);
  for (std::size_t n = 1; n < c.size(); ++n) c[n] = c[n - 1] * t;
  return c;
}

TwoModeOperator::TwoModeOperator(int n_max, std::vector<Block> blocks)
    : n_max_(n_max), blocks_(std::move(blocks)) {}

Eigen::MatrixXcd TwoModeOperator::to_dense() const {
  const auto dim = static_cast<Eigen::Index>(local_dim() * local_dim());
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim, dim);
  for (const auto& b : blocks_) {
    for (std::size_t i = 0; i < b.basis.size(); ++i) {
      for (std::size_t j = 0; j < b.basis.size(); ++j) {
        out(static_cast<Eigen::Index>(b.basis[i]), static_cast<Eigen::Index>(b.basis[j])) =
            b.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      }
    }
  }
  return out;
}

TwoModeOperator squeezer_unitary(double r, int n_max) {
  if (n_max < 0) throw std::invalid_argument("n_max must be >= 0");
  if (!std::isfinite(r)) throw std::invalid_argument("squeezing parameter must be finite");
  const std::size_t d = static_cast<std::size_t>(n_max + 1);
  std::vector<TwoModeOperator::Block> blocks;
  // a b and a^dag b^dag conserve n_a - n_b.
  for (int diff = -n_max; diff <= n_max; ++diff) {
    TwoModeOperator::Block block;
    const int n_b_lo = std::max(0, -diff);
    const int n_b_hi = std::min(n_max, n_max - diff);
    for (int nb = n_b_lo; nb <= n_b_hi; ++nb) {
      block.basis.push_back(static_cast<std::size_t>(nb + diff) * d + static_cast<std::size_t>(nb));
    }
    const auto size = static_cast<Eigen::Index>(block.basis.size());
    Eigen::MatrixXd gen = Eigen::MatrixXd::Zero(size, size);
    // Element k has n_b = n_b_lo + k; a b maps k -> k - 1 with weight sqrt(n_a n_b).
    for (Eigen::Index k = 1; k < size; ++k) {
      const double nb = static_cast<double>(n_b_lo + k);
      const double na = nb + diff;
      const double w = r * std::sqrt(na * nb);
      gen(k - 1, k) = w;
      gen(k, k - 1) = -w;
    }
    block.matrix = exp_antisymmetric(gen);
    blocks.push_back(std::move(block));
  }
  return TwoModeOperator(n_max, std::move(blocks));
}

TwoModeOperator beamsplitter_unitary(double theta, int n_max) {
  if (n_max < 0) throw std::invalid_argument("n_max must be >= 0");
  const std::size_t d = static_cast<std::size_t>(n_max + 1);
  std::vector<TwoModeOperator::Block> blocks;
  // Passive: conserves n_a + n_a'.
  for (int total = 0; total <= 2 * n_max; ++total) {
    TwoModeOperator::Block block;
    const int m_lo = std::max(0, total - n_max);
    const int m_hi = std::min(total, n_max);
    for (int m = m_lo; m <= m_hi; ++m) {
      block.basis.push_back(static_cast<std::size_t>(m) * d + static_cast<std::size_t>(total - m));
    }
    const auto size = static_cast<Eigen::Index>(block.basis.size());
    Eigen::MatrixXd gen = Eigen::MatrixXd::Zero(size, size);
    // Element k has n_a = m_lo + k. a^dag a' maps k -> k + 1 with sqrt((m + 1) n).
    for (Eigen::Index k = 0; k + 1 < size; ++k) {
      const double m = static_cast<double>(m_lo + k);
      const double n = static_cast<double>(total) - m;
      const double w = theta * std::sqrt((m + 1.0) * n);
      gen(k + 1, k) = w;
      gen(k, k + 1) = -w;
    }
    block.matrix = exp_antisymmetric(gen);
    blocks.push_back(std::move(block));
  }
  return TwoModeOperator(n_max, std::move(blocks));
}

std::vector<Eigen::MatrixXcd> loss_kraus_operators(double eta, int n_max) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw std::invalid_argument("eta must lie in [0, 1]");
  const auto d = static_cast<Eigen::Index>(n_max + 1);
  std::vector<Eigen::MatrixXcd> ops;
  for (int k = 0; k <= n_max; ++k) {
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(d, d);
    for (int n = k; n <= n_max; ++n) {
      a(n - k, n) = std::sqrt(binomial(n, k) * std::pow(eta, n - k) * std::pow(1.0 - eta, k));
    }
    ops.push_back(std::move(a));
  }
  return ops;
}

FockVector::FockVector(std::size_t num_modes, int n_max) : num_modes_(num_modes), n_max_(n_max) {
  if (num_modes == 0) throw std::invalid_argument("Fock state needs at least one mode");
  if (n_max < 0) throw std::invalid_argument("n_max must be >= 0");
  const std::size_t dim = ipow(static_cast<std::size_t>(n_max + 1), num_modes);
  amp_ = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(dim));
  amp_[0] = 1.0;
}

void FockVector::apply(const TwoModeOperator& op, std::size_t first, std::size_t second) {
  check_pair(num_modes_, n_max_, op, first, second);
  const std::size_t d = op.local_dim();
  const std::size_t s1 = ipow(d, num_modes_ - 1 - first);
  const std::size_t s2 = ipow(d, num_modes_ - 1 - second);
  for (std::size_t base : pair_bases(num_modes_, d, first, second)) {
    for (const auto& block : op.blocks()) {
      const auto idx = block_indices(block, base, d, s1, s2);
      const Eigen::VectorXcd sub = amp_(idx);
      amp_(idx) = block.matrix * sub;
    }
  }
}

void FockVector::apply_phase(std::size_t mode, double phi) {
  if (mode >= num_modes_) throw std::invalid_argument("mode out of range");
  const std::size_t d = static_cast<std::size_t>(n_max_ + 1);
  for (Eigen::Index g = 0; g < amp_.size(); ++g) {
    const auto n = digit(static_cast<std::size_t>(g), num_modes_, d, mode);
    amp_[g] *= std::exp(cplx(0.0, phi * static_cast<double>(n)));
  }
}

double FockVector::vacuum_probability(std::span<const std::size_t> modes, std::span<const double> etas) const {
  if (modes.size() != etas.size()) throw std::invalid_argument("one efficiency per mode expected");
  const std::size_t d = static_cast<std::size_t>(n_max_ + 1);
  double total = 0.0;
  for (Eigen::Index g = 0; g < amp_.size(); ++g) {
    const double w = std::norm(amp_[g]);
    if (w == 0.0) continue;
    double survive = 1.0;
    for (std::size_t k = 0; k < modes.size(); ++k) {
      const auto n = digit(static_cast<std::size_t>(g), num_modes_, d, modes[k]);
      survive *= std::pow(1.0 - etas[k], static_cast<double>(n));
    }
    total += w * survive;
  }
  return total;
}

DensityMatrix::DensityMatrix(const FockVector& pure)
    : num_modes_(pure.num_modes()), n_max_(pure.n_max()),
      rho_(pure.amplitudes() * pure.amplitudes().adjoint()) {}

void DensityMatrix::apply(const TwoModeOperator& op, std::size_t first, std::size_t second) {
  check_pair(num_modes_, n_max_, op, first, second);
  const std::size_t d = op.local_dim();
  const std::size_t s1 = ipow(d, num_modes_ - 1 - first);
  const std::size_t s2 = ipow(d, num_modes_ - 1 - second);
  const auto bases = pair_bases(num_modes_, d, first, second);
  auto apply_left = [&](Eigen::MatrixXcd& m) {
    for (std::size_t base : bases) {
      for (const auto& block : op.blocks()) {
        const auto idx = block_indices(block, base, d, s1, s2);
        const Eigen::MatrixXcd rows = m(idx, Eigen::all);
        m(idx, Eigen::all) = block.matrix * rows;
      }
    }
  };
  // U rho U^dag = U (U rho)^dag for Hermitian rho.
  Eigen::MatrixXcd x = rho_;
  apply_left(x);
  x = x.adjoint().eval();
  apply_left(x);
  rho_ = 0.5 * (x + x.adjoint());
}

void DensityMatrix::apply_phase(std::size_t mode, double phi) {
  if (mode >= num_modes_) throw std::invalid_argument("mode out of range");
  const std::size_t d = static_cast<std::size_t>(n_max_ + 1);
  Eigen::VectorXcd phases(rho_.rows());
  for (Eigen::Index g = 0; g < rho_.rows(); ++g) {
    const auto n = digit(static_cast<std::size_t>(g), num_modes_, d, mode);
    phases[g] = std::exp(cplx(0.0, phi * static_cast<double>(n)));
  }
  rho_ = phases.asDiagonal() * rho_ * phases.conjugate().asDiagonal();
}

void DensityMatrix::apply_loss(std::size_t mode, double eta) {
  if (mode >= num_modes_) throw std::invalid_argument("mode out of range");
  if (!(eta >= 0.0 && eta <= 1.0)) throw std::invalid_argument("eta must lie in [0, 1]");
  if (eta == 1.0) return;
  const std::size_t d = static_cast<std::size_t>(n_max_ + 1);
  const auto stride = static_cast<Eigen::Index>(ipow(d, num_modes_ - 1 - mode));
  const double amp = std::sqrt(eta);

  // Kraus sum pushed element-wise: <m|rho|n> feeds <m-k|.|n-k> with weight
  // sqrt(C(m,k) C(n,k)) eta^((m+n)/2 - k) (1-eta)^k.
  std::vector<std::vector<double>> binom(d, std::vector<double>(d, 0.0));
  for (std::size_t n = 0; n < d; ++n) {
    for (std::size_t k = 0; k <= n; ++k) binom[n][k] = binomial(static_cast<int>(n), static_cast<int>(k));
  }
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(rho_.rows(), rho_.cols());
  for (Eigen::Index col = 0; col < rho_.cols(); ++col) {
    const auto nc = digit(static_cast<std::size_t>(col), num_modes_, d, mode);
    for (Eigen::Index row = 0; row < rho_.rows(); ++row) {
      const cplx v = rho_(row, col);
      if (v == cplx(0.0, 0.0)) continue;
      const auto nr = digit(static_cast<std::size_t>(row), num_modes_, d, mode);
      const std::size_t kmax = std::min(nr, nc);
      for (std::size_t k = 0; k <= kmax; ++k) {
        const double w = std::sqrt(binom[nr][k] * binom[nc][k]) *
                         std::pow(amp, static_cast<double>(nr + nc - 2 * k)) *
                         std::pow(1.0 - eta, static_cast<double>(k));
        const auto shift = static_cast<Eigen::Index>(k) * stride;
        out(row - shift, col - shift) += w * v;
      }
    }
  }
  rho_ = std::move(out);
}

double DensityMatrix::vacuum_probability(std::span<const std::size_t> modes) const {
  const std::size_t d = static_cast<std::size_t>(n_max_ + 1);
  double total = 0.0;
  for (Eigen::Index g = 0; g < rho_.rows(); ++g) {
    bool empty = true;
    for (auto m : modes) {
      if (m >= num_modes_) throw std::invalid_argument("mode out of range");
      if (digit(static_cast<std::size_t>(g), num_modes_, d, m) != 0) {
        empty = false;
        break;
      }
    }
    if (empty) total += rho_(g, g).real();
  }
  return total;
}

namespace {

ClickDistribution fold_clicks(double p00, double quiet_h, double quiet_v, const InterferometerConfig& cfg) {
  const double dh = 1.0 - cfg.dark_h;
  const double dv = 1.0 - cfg.dark_v;
  p00 *= dh * dv;
  quiet_h *= dh;
  quiet_v *= dv;
  const double p01 = quiet_h - p00;
  const double p10 = quiet_v - p00;
  return checked_distribution(p00, p01, p10, 1.0 - p00 - p01 - p10);
}

ClickDistribution simulate_two_mode(const InterferometerConfig& cfg, double phi, int n_max) {
  const double total_phase = phi + cfg.phase_offset;
  FockVector psi(2, n_max);
  psi.apply(squeezer_unitary(cfg.r1, n_max), 0, 1);
  const auto second = squeezer_unitary(cfg.r2, n_max);
  const std::size_t a[] = {0};
  const std::size_t b[] = {1};
  const std::size_t ab[] = {0, 1};

  if (cfg.eta_internal < 1.0) {
    DensityMatrix rho(psi);
    rho.apply_loss(0, cfg.eta_internal);
    rho.apply_loss(1, cfg.eta_internal);
    rho.apply_phase(0, total_phase);
    rho.apply_phase(1, total_phase);
    rho.apply(second, 0, 1);
    rho.apply_loss(0, cfg.eta_h);
    rho.apply_loss(1, cfg.eta_v);
    return fold_clicks(rho.vacuum_probability(ab), rho.vacuum_probability(a), rho.vacuum_probability(b), cfg);
  }

  psi.apply_phase(0, total_phase);
  psi.apply_phase(1, total_phase);
  psi.apply(second, 0, 1);
  if (cfg.eta_h < 1.0 || cfg.eta_v < 1.0) {
    DensityMatrix rho(psi);
    rho.apply_loss(0, cfg.eta_h);
    rho.apply_loss(1, cfg.eta_v);
    return fold_clicks(rho.vacuum_probability(ab), rho.vacuum_probability(a), rho.vacuum_probability(b), cfg);
  }
  const double one[] = {1.0};
  const double two[] = {1.0, 1.0};
  return fold_clicks(psi.vacuum_probability(ab, two), psi.vacuum_probability(a, one),
                     psi.vacuum_probability(b, one), cfg);
}

ClickDistribution simulate_four_mode(const InterferometerConfig& cfg, double phi, int n_max) {
  if (cfg.eta_internal < 1.0) {
    throw std::invalid_argument("Fock oracle does not model internal loss together with mode mismatch");
  }
  using namespace stimsqz::modes;
  const double total_phase = phi + cfg.phase_offset;
  const double theta = std::acos(cfg.overlap);
  FockVector psi(kCount, n_max);
  psi.apply(squeezer_unitary(cfg.r1, n_max), kA, kB);
  for (std::size_t m = 0; m < kCount; ++m) psi.apply_phase(m, total_phase);
  const auto mix = beamsplitter_unitary(theta, n_max);
  const auto unmix = beamsplitter_unitary(-theta, n_max);
  psi.apply(mix, kA, kAPrime);
  psi.apply(mix, kB, kBPrime);
  psi.apply(squeezer_unitary(cfg.r2, n_max), kA, kB);
  psi.apply(unmix, kA, kAPrime);
  psi.apply(unmix, kB, kBPrime);

  if (!cfg.mismatch_detected) {
    const std::size_t h[] = {kA};
    const std::size_t v[] = {kB};
    const std::size_t both[] = {kA, kB};
    const double eh[] = {cfg.eta_h};
    const double ev[] = {cfg.eta_v};
    const double eboth[] = {cfg.eta_h, cfg.eta_v};
    return fold_clicks(psi.vacuum_probability(both, eboth), psi.vacuum_probability(h, eh),
                       psi.vacuum_probability(v, ev), cfg);
  }
  const std::size_t h[] = {kA, kAPrime};
  const std::size_t v[] = {kB, kBPrime};
  const std::size_t all[] = {kA, kAPrime, kB, kBPrime};
  const double eh[] = {cfg.eta_h, cfg.eta_h};
  const double ev[] = {cfg.eta_v, cfg.eta_v};
  const double eall[] = {cfg.eta_h, cfg.eta_h, cfg.eta_v, cfg.eta_v};
  return fold_clicks(psi.vacuum_probability(all, eall), psi.vacuum_probability(h, eh),
                     psi.vacuum_probability(v, ev), cfg);
}

}  // namespace

ClickDistribution simulate_fock(const InterferometerConfig& cfg, double phi, int n_max, double max_truncation) {
  cfg.validate();
  const double bound = truncation_error_bound(cfg.r1 + cfg.r2, n_max);
  if (bound > max_truncation) {
    std::ostringstream msg;
    msg << "truncation bound " << bound << " at n_max=" << n_max << " exceeds budget " << max_truncation;
    throw TruncationError(msg.str(), bound);
  }
  if (cfg.overlap < 1.0) return simulate_four_mode(cfg, phi, n_max);
  return simulate_two_mode(cfg, phi, n_max);
}

}  // namespace stimsqz::fock
