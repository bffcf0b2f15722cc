#include "cmv/banded_solver.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <string>

#include "cmv/error.hpp"

#if defined(__x86_64__) || defined(__SSE2__)
#include <xmmintrin.h>
#define CMV_HAVE_MXCSR 1
#endif

namespace cmv {

FlushDenormalsGuard::FlushDenormalsGuard() noexcept {
#ifdef CMV_HAVE_MXCSR
  saved_ = _mm_getcsr();
  _mm_setcsr(saved_ | 0x8040u);  // FTZ | DAZ
#endif
}

FlushDenormalsGuard::~FlushDenormalsGuard() {
#ifdef CMV_HAVE_MXCSR
  _mm_setcsr(saved_);
#endif
}

CoefficientTable::CoefficientTable(CoefficientSequence seq, Site lo, Site hi)
    : seq_(std::move(seq)), lo_(lo), hi_(hi) {
  if (hi < lo) fail(ErrorKind::InvalidArgument, "coefficient table range is empty");
  const auto n = static_cast<std::size_t>(hi - lo + 1);
  alpha_.resize(n);
  rho_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Site k = lo + static_cast<Site>(i);
    alpha_[i] = seq_.alpha(k);
    rho_[i] = seq_.rho(k);
  }
}

namespace {

void check_shift(cplx z) {
  if (std::abs(std::abs(z) - 1.0) < 1e-12) {
    fail(ErrorKind::NearSpectrum, "spectral parameter lies on the unit circle");
  }
}

}  // namespace

BandedLU::BandedLU(const BandedUnitary& u, cplx z) : n_(u.size()), z_(z), band_(u.size() * kLd), pivots_(u.size()) {
  check_shift(z);
  const FlushDenormalsGuard ftz;
  const Window& w = u.window();
  for (std::size_t c = 0; c < n_; ++c) {
    const std::size_t r0 = c >= static_cast<std::size_t>(kUpper) ? c - kUpper : 0;
    const std::size_t r1 = std::min(n_ - 1, c + kLower);
    for (std::size_t r = r0; r <= r1; ++r) {
      cplx v = u.at(w.a() + static_cast<Site>(r), w.a() + static_cast<Site>(c));
      if (r == c) v -= z;
      ab(r, c) = v;
    }
  }

  double min_piv = std::numeric_limits<double>::infinity();
  double max_piv = 0.0;
  std::size_t ju = 0;
  for (std::size_t j = 0; j < n_; ++j) {
    const std::size_t km = std::min<std::size_t>(kLower, n_ - 1 - j);
    std::size_t jp = 0;
    double best = std::abs(ab(j, j));
    for (std::size_t t = 1; t <= km; ++t) {
      const double v = std::abs(ab(j + t, j));
      if (v > best) {
        best = v;
        jp = t;
      }
    }
    pivots_[j] = j + jp;
    if (best == 0.0) {
      fail(ErrorKind::NearSpectrum, "zero pivot in banded LU at offset " + std::to_string(j));
    }
    min_piv = std::min(min_piv, best);
    max_piv = std::max(max_piv, best);
    ju = std::max(ju, std::min(j + kUpper + jp, n_ - 1));
    if (jp != 0) {
      for (std::size_t c = j; c <= ju; ++c) std::swap(ab(j, c), ab(j + jp, c));
    }
    const cplx inv = 1.0 / ab(j, j);
    for (std::size_t t = 1; t <= km; ++t) ab(j + t, j) *= inv;
    for (std::size_t c = j + 1; c <= ju; ++c) {
      const cplx ujc = ab(j, c);
      if (ujc == cplx{}) continue;
      for (std::size_t t = 1; t <= km; ++t) ab(j + t, c) -= ab(j + t, j) * ujc;
    }
  }
  pivot_ratio_ = max_piv > 0.0 ? min_piv / max_piv : 0.0;
}

void BandedLU::solve(std::span<cplx> b) const {
  if (b.size() != n_) fail(ErrorKind::InvalidArgument, "right-hand side has the wrong length");
  const FlushDenormalsGuard ftz;
  for (std::size_t j = 0; j < n_; ++j) {
    const std::size_t km = std::min<std::size_t>(kLower, n_ - 1 - j);
    if (pivots_[j] != j) std::swap(b[j], b[pivots_[j]]);
    const cplx bj = b[j];
    if (bj == cplx{}) continue;
    for (std::size_t t = 1; t <= km; ++t) b[j + t] -= ab(j + t, j) * bj;
  }
  for (std::size_t jj = n_; jj-- > 0;) {
    b[jj] /= ab(jj, jj);
    const cplx bj = b[jj];
    if (bj == cplx{}) continue;
    const std::size_t lim = std::min<std::size_t>(kFill, jj);
    for (std::size_t t = 1; t <= lim; ++t) b[jj - t] -= ab(jj - t, jj) * bj;
  }
}

double residual_inf(const BandedUnitary& u, cplx z, std::span<const cplx> x, std::span<const cplx> b) {
  std::vector<cplx> y(x.size());
  u.apply(x, y);
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) worst = std::max(worst, std::abs(y[i] - z * x[i] - b[i]));
  return worst;
}

namespace {

using Band = std::array<cplx, 5>;  // entries at columns t-2..t+2 of local row t

/// Truncation of the table's operator to a window: alpha := 1 at a and b + 1.
struct EdgeCut {
  const CoefficientTable& table;
  Site a;
  Site b;
  cplx alpha(Site k) const { return (k == a || k == b + 1) ? cplx{1.0, 0.0} : table.alpha(k); }
  double rho(Site k) const { return (k == a || k == b + 1) ? 0.0 : table.rho(k); }
};

/// Streams partial-pivot elimination of local columns 0..count-1 over a band
/// matrix whose local rows come from `row`. Returns the two surviving rows at
/// positions count, count+1 over local columns count..count+3.
template <class RowFn>
std::array<std::array<cplx, 4>, 2> eliminate_tail(RowFn&& row, Site count) {
  cplx f[3][5] = {};  // frontal rows j..j+2, columns j..j+4
  const auto load = [&](int slot, Site t, Site j) {
    const Band band = row(t);
    for (int c = 0; c < 5; ++c) f[slot][c] = cplx{};
    for (int d = -2; d <= 2; ++d) {
      const Site col = t + d;
      const Site c = col - j;
      if (col >= 0 && c >= 0 && c < 5) f[slot][c] = band[static_cast<std::size_t>(d + 2)];
    }
  };
  load(0, 0, 0);
  load(1, 1, 0);
  for (Site j = 0; j < count; ++j) {
    load(2, j + 2, j);
    int piv = 0;
    double best = std::abs(f[0][0]);
    for (int r = 1; r < 3; ++r) {
      const double v = std::abs(f[r][0]);
      if (v > best) {
        best = v;
        piv = r;
      }
    }
    if (best == 0.0) fail(ErrorKind::NearSpectrum, "zero pivot while eliminating a window tail");
    if (piv != 0) {
      for (int c = 0; c < 5; ++c) std::swap(f[0][c], f[piv][c]);
    }
    const cplx inv = 1.0 / f[0][0];
    for (int r = 1; r < 3; ++r) {
      const cplx l = f[r][0] * inv;
      if (l == cplx{}) continue;
      for (int c = 1; c < 5; ++c) f[r][c] -= l * f[0][c];
    }
    for (int r = 0; r < 2; ++r) {
      for (int c = 0; c < 4; ++c) f[r][c] = f[r + 1][c + 1];
      f[r][4] = cplx{};
    }
  }
  std::array<std::array<cplx, 4>, 2> out{};
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 4; ++c) out[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] = f[r][c];
  }
  return out;
}

}  // namespace

EdgeClosure close_edges(const CoefficientTable& table, const Window& window, Site p, Site q, cplx z) {
  if (p < window.a() || q > window.b() || q - p < 7) {
    fail(ErrorKind::InvalidArgument, "core block must lie inside the window and span at least 8 sites");
  }
  check_shift(z);
  const FlushDenormalsGuard ftz;
  const EdgeCut cut{table, window.a(), window.b()};
  const Site a = window.a();
  const Site b = window.b();

  EdgeClosure out;
  out.p = p;
  out.q = q;
  out.z = z;
  out.left = eliminate_tail(
      [&](Site t) {
        const Site i = a + t;
        Band band{};
        for (int d = -2; d <= 2; ++d) {
          const Site j = i + d;
          if (j < a || j > b) continue;
          cplx v = entry_from(cut, i, j);
          if (d == 0) v -= z;
          band[static_cast<std::size_t>(d + 2)] = v;
        }
        return band;
      },
      p - a);
  out.right = eliminate_tail(
      [&](Site t) {
        const Site i = b - t;
        Band band{};
        for (int d = -2; d <= 2; ++d) {
          const Site j = i - d;  // local column t + d maps to site b - t - d
          if (j < a || j > b) continue;
          cplx v = entry_from(cut, i, j);
          if (d == 0) v -= z;
          band[static_cast<std::size_t>(d + 2)] = v;
        }
        return band;
      },
      b - q);
  return out;
}

Eigen::MatrixXcd core_matrix(const CoefficientSequence& interior, const Window& window, const EdgeClosure& closure) {
  const Site p = closure.p;
  const Site q = closure.q;
  const auto m = static_cast<Eigen::Index>(q - p + 1);
  Eigen::MatrixXcd core = Eigen::MatrixXcd::Zero(m, m);
  for (Eigen::Index c = 0; c < 4; ++c) {
    core(0, c) = closure.left[0][static_cast<std::size_t>(c)];
    core(1, c) = closure.left[1][static_cast<std::size_t>(c)];
    core(m - 1, m - 1 - c) = closure.right[0][static_cast<std::size_t>(c)];
    core(m - 2, m - 1 - c) = closure.right[1][static_cast<std::size_t>(c)];
  }
  for (Eigen::Index o = 2; o <= m - 3; ++o) {
    const Site i = p + o;
    for (Site j = std::max(p, i - 2); j <= std::min(q, i + 2); ++j) {
      if (!window.contains(j)) continue;
      cplx v = entry(interior, i, j);
      if (j == i) v -= closure.z;
      core(o, static_cast<Eigen::Index>(j - p)) = v;
    }
  }
  return core;
}

Eigen::MatrixXcd solve_core(const Eigen::MatrixXcd& core, const Eigen::MatrixXcd& rhs) {
  const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(core);
  Eigen::MatrixXcd x = lu.solve(rhs);
  for (Eigen::Index c = 0; c < rhs.cols(); ++c) {
    const double res = (core * x.col(c) - rhs.col(c)).cwiseAbs().maxCoeff();
    const double scale = 1.0 + x.col(c).cwiseAbs().maxCoeff();
    if (!std::isfinite(res) || res > 1e-12 * scale) {
      fail(ErrorKind::NearSpectrum, "reduced core solve residual " + std::to_string(res) + " exceeds tolerance");
    }
  }
  return x;
}

}  // namespace cmv
