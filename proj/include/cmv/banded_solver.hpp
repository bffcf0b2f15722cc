#pragma once

#include <array>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "cmv/cmv_operator.hpp"

namespace cmv {

/// Sets FTZ/DAZ for the current thread while alive. Resolvent columns decay
/// exponentially and would otherwise spend most of the sweep in subnormals.
class FlushDenormalsGuard {
 public:
  FlushDenormalsGuard() noexcept;
  ~FlushDenormalsGuard();
  FlushDenormalsGuard(const FlushDenormalsGuard&) = delete;
  FlushDenormalsGuard& operator=(const FlushDenormalsGuard&) = delete;

 private:
  unsigned int saved_ = 0;
};

/// Precomputed alpha_k, rho_k over [lo, hi]; falls back to the sequence outside.
/// Immutable once built and shared read-only across workers.
class CoefficientTable {
 public:
  CoefficientTable(CoefficientSequence seq, Site lo, Site hi);

  cplx alpha(Site k) const {
    return (k >= lo_ && k <= hi_) ? alpha_[static_cast<std::size_t>(k - lo_)] : seq_.alpha(k);
  }
  double rho(Site k) const {
    return (k >= lo_ && k <= hi_) ? rho_[static_cast<std::size_t>(k - lo_)] : seq_.rho(k);
  }
  const CoefficientSequence& sequence() const noexcept { return seq_; }
  Site lo() const noexcept { return lo_; }
  Site hi() const noexcept { return hi_; }

 private:
  CoefficientSequence seq_;
  Site lo_;
  Site hi_;
  std::vector<cplx> alpha_;
  std::vector<double> rho_;
};

/// Partial-pivot LU of U - z for a five-diagonal U, stored in LAPACK-style
/// band layout (two sub-, four super-diagonals after fill-in).
class BandedLU {
 public:
  /// Throws Error(NearSpectrum) on a zero pivot or |z| within 1e-12 of the circle.
  BandedLU(const BandedUnitary& u, cplx z);

  std::size_t size() const noexcept { return n_; }
  cplx shift() const noexcept { return z_; }

  /// Solves (U - z) x = rhs in place.
  void solve(std::span<cplx> rhs) const;

  /// Smallest |pivot| over max |pivot|; a cheap conditioning indicator.
  double pivot_ratio() const noexcept { return pivot_ratio_; }

 private:
  static constexpr int kLower = 2;
  static constexpr int kUpper = 2;
  static constexpr int kFill = kLower + kUpper;
  static constexpr int kLd = 2 * kLower + kUpper + 1;

  cplx& ab(std::size_t r, std::size_t c) { return band_[c * kLd + kFill + r - c]; }
  const cplx& ab(std::size_t r, std::size_t c) const { return band_[c * kLd + kFill + r - c]; }

  std::size_t n_;
  cplx z_;
  std::vector<cplx> band_;
  std::vector<std::size_t> pivots_;
  double pivot_ratio_ = 1.0;
};

/// max |(U - z) x - b| with b and x indexed by window offset.
double residual_inf(const BandedUnitary& u, cplx z, std::span<const cplx> x, std::span<const cplx> b);

/// Boundary rows left over after eliminating the tails of a window.
///
/// Gaussian elimination with partial pivoting is streamed from the left edge up
/// to site p and, mirrored, from the right edge down to site q. What remains of
/// U - z is a dense system on the core [p, q] whose first two rows (and last two)
/// are replaced by the reduced rows below. The reduced system is exact for any
/// right-hand side supported in [p + 2, q - 2].
struct EdgeClosure {
  Site p = 0;
  Site q = 0;
  cplx z;
  std::array<std::array<cplx, 4>, 2> left{};   // rows at positions p, p+1; cols p..p+3
  std::array<std::array<cplx, 4>, 2> right{};  // rows at positions q, q-1; cols q, q-1, q-2, q-3
};

/// Runs both tail sweeps for the truncation of table.sequence() to window.
/// Requires window.a() <= p, q <= window.b() and q - p >= 7.
EdgeClosure close_edges(const CoefficientTable& table, const Window& window, Site p, Site q, cplx z);

/// Dense (q - p + 1)^2 core of the reduced system. Interior rows p+2..q-2 are
/// taken from `interior`, which must agree with the table's sequence on every
/// entry the sweeps touched (rows <= p+1 and >= q-1).
Eigen::MatrixXcd core_matrix(const CoefficientSequence& interior, const Window& window, const EdgeClosure& closure);

/// Solves the core system for each column of rhs (rows indexed from p).
/// Throws Error(NearSpectrum) if the dense solve leaves a residual above 1e-12 * (1 + |x|).
Eigen::MatrixXcd solve_core(const Eigen::MatrixXcd& core, const Eigen::MatrixXcd& rhs);

}  // namespace cmv
