#include "cmv/weyl.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cmv/error.hpp"

namespace cmv {

namespace {

constexpr double kPoleTol = 1e-12;
constexpr double kOverflow = 1e150;

}  // namespace

Eigen::Matrix2cd TransferMatrix::inverse() const {
  Eigen::Matrix2cd out;
  out << -m(1, 1), m(0, 1), m(1, 0), -m(0, 0);
  return out;
}

TransferMatrix transfer(const CoefficientSequence& seq, cplx z, Site k) {
  if (seq.is_decoupled(k)) fail(ErrorKind::InvalidArgument, "transfer matrix at decoupled site " + std::to_string(k));
  const cplx a = seq.alpha(k);
  const double r = seq.rho(k);
  TransferMatrix t;
  if (k % 2 != 0) {
    if (z == cplx{}) fail(ErrorKind::InvalidArgument, "odd transfer matrix needs z != 0");
    t.m << a, z, 1.0 / z, std::conj(a);
  } else {
    t.m << std::conj(a), 1.0, 1.0, a;
  }
  t.m /= r;
  return t;
}

cplx moebius_left(cplx a, cplx m) {
  const cplx one_plus = 1.0 + a, one_minus = 1.0 - a;
  const cplx i{0.0, 1.0};
  const cplx num = one_plus.real() + i * one_minus.imag() * m;
  const cplx den = i * one_plus.imag() + one_minus.real() * m;
  if (std::abs(den) < kPoleTol) fail(ErrorKind::MoebiusPole, "M-function Moebius denominator vanishes");
  return num / den;
}

cplx moebius_hat_right(cplx a, cplx m) {
  const cplx one_plus = 1.0 + a, one_minus = 1.0 - a;
  const cplx i{0.0, 1.0};
  const cplx num = one_plus.real() - i * one_plus.imag() * m;
  const cplx den = -i * one_minus.imag() + one_minus.real() * m;
  if (std::abs(den) < kPoleTol) fail(ErrorKind::MoebiusPole, "hat-M Moebius denominator vanishes");
  return num / den;
}

cplx M_cap(const CoefficientSequence& seq, Side side, Site n, cplx z, const SolverOptions& opts) {
  if (side == Side::Right) return m_function(seq, Side::Right, n, z, opts);
  return moebius_left(seq.alpha(n), m_function(seq, Side::Left, n - 1, z, opts));
}

cplx Mhat_cap(const CoefficientSequence& seq, Side side, Site n, cplx z, const SolverOptions& opts) {
  if (side == Side::Left) return m_function(seq, Side::Left, n, z, opts);
  return moebius_hat_right(seq.alpha(n + 1), m_function(seq, Side::Right, n + 1, z, opts));
}

std::pair<cplx, cplx> weyl_seed(Variant variant, Site n, cplx z, cplx M) {
  const bool even = n % 2 == 0;
  if (variant == Variant::Plain) {
    return even ? std::pair{-1.0 + M, 1.0 + M} : std::pair{z + z * M, -1.0 + M};
  }
  return even ? std::pair{z - z * M, 1.0 + M} : std::pair{1.0 + M, 1.0 - M};
}

WeylPair propagate_weyl(const CoefficientSequence& seq, Side side, Site n, cplx z, const Window& range, Variant variant,
                        cplx M) {
  if (!range.contains(n)) fail(ErrorKind::InvalidArgument, "Weyl range must contain the seed site");
  WeylPair p{range, n, side, variant, z, std::vector<cplx>(range.size()), std::vector<cplx>(range.size())};
  const auto [u0, v0] = weyl_seed(variant, n, z, M);
  p.u[range.offset(n)] = u0;
  p.v[range.offset(n)] = v0;
  const auto check = [&](Site k) {
    const std::size_t o = range.offset(k);
    const double mag = std::max(std::abs(p.u[o]), std::abs(p.v[o]));
    if (!(mag <= kOverflow)) {
      fail(ErrorKind::PropagationOverflow, "Weyl solution exceeds 1e150 at site " + std::to_string(k));
    }
  };
  for (Site k = n + 1; k <= range.b(); ++k) {
    const Eigen::Vector2cd prev(p.u_at(k - 1), p.v_at(k - 1));
    const Eigen::Vector2cd next = transfer(seq, z, k).m * prev;
    p.u[range.offset(k)] = next(0);
    p.v[range.offset(k)] = next(1);
    check(k);
  }
  for (Site k = n; k > range.a(); --k) {
    const Eigen::Vector2cd cur(p.u_at(k), p.v_at(k));
    const Eigen::Vector2cd prev = transfer(seq, z, k).inverse() * cur;
    p.u[range.offset(k - 1)] = prev(0);
    p.v[range.offset(k - 1)] = prev(1);
    check(k - 1);
  }
  return p;
}

WeylPair weyl_solutions(const CoefficientSequence& seq, Side side, Site n, cplx z, const Window& range,
                        Variant variant, const SolverOptions& opts) {
  const cplx M = variant == Variant::Plain ? M_cap(seq, side, n, z, opts) : Mhat_cap(seq, side, n, z, opts);
  return propagate_weyl(seq, side, n, z, range, variant, M);
}

double recursion_residual(const CoefficientSequence& seq, const WeylPair& p) {
  double worst = 0.0;
  for (Site k = p.range.a() + 1; k <= p.range.b(); ++k) {
    const Eigen::Vector2cd prev(p.u_at(k - 1), p.v_at(k - 1));
    const Eigen::Vector2cd cur(p.u_at(k), p.v_at(k));
    const Eigen::Vector2cd diff = transfer(seq, p.z, k).m * prev - cur;
    worst = std::max(worst, diff.cwiseAbs().maxCoeff() / std::max(1.0, cur.cwiseAbs().maxCoeff()));
  }
  return worst;
}

cplx green_weyl(const CoefficientSequence& seq, Site k, Site kp, cplx z, Site k0, Variant variant,
                const SolverOptions& opts) {
  const Site lo = std::min({k, kp, k0}) - 4;
  const Site hi = std::max({k, kp, k0}) + 4;
  const Window range(lo, std::max(hi, lo + Window::kMinSpan));
  const WeylPair r = weyl_solutions(seq, Side::Right, k0, z, range, variant, opts);
  const WeylPair l = weyl_solutions(seq, Side::Left, k0, z, range, variant, opts);
  const cplx w = z * (r.u_at(k0) * l.v_at(k0) - l.u_at(k0) * r.v_at(k0));
  if (std::abs(w) < kPoleTol) fail(ErrorKind::WronskianDegenerate, "Weyl Wronskian vanishes at " + std::to_string(k0));
  const double sign = ((k0 + 1) % 2 == 0) ? 1.0 : -1.0;
  const bool left_first = k < kp || (k == kp && k % 2 != 0);
  const cplx prod = left_first ? l.u_at(k) * r.v_at(kp) : r.u_at(k) * l.v_at(kp);
  return sign * prod / w;
}

}  // namespace cmv
