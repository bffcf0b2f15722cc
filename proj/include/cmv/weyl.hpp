#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "cmv/resolvent.hpp"

namespace cmv {

/// T(z, k): odd k gives (1/rho_k) [[alpha_k, z], [1/z, conj alpha_k]], even k
/// gives (1/rho_k) [[conj alpha_k, 1], [1, alpha_k]]. det T = -1 in both cases.
struct TransferMatrix {
  Eigen::Matrix2cd m;

  cplx det() const { return m.determinant(); }
  /// Exact inverse using det = -1.
  Eigen::Matrix2cd inverse() const;
};

/// Throws Error(InvalidArgument) for z = 0 at odd k or a decoupled site k.
TransferMatrix transfer(const CoefficientSequence& seq, cplx z, Site k);

/// M^{(l)}_n from alpha_n and m^{(l)}_{n-1}. Throws Error(MoebiusPole) when the
/// denominator modulus is below 1e-12.
cplx moebius_left(cplx alpha_n, cplx m_left_prev);
/// hat-M^{(r)}_n from alpha_{n+1} and m^{(r)}_{n+1}; same pole rule.
cplx moebius_hat_right(cplx alpha_next, cplx m_right_next);

cplx M_cap(const CoefficientSequence& seq, Side side, Site n, cplx z, const SolverOptions& opts = {});
cplx Mhat_cap(const CoefficientSequence& seq, Side side, Site n, cplx z, const SolverOptions& opts = {});

enum class Variant { Plain, Hat };

/// Seed (u_n, v_n) for a given M (plain) or hat-M (hat) value.
std::pair<cplx, cplx> weyl_seed(Variant variant, Site n, cplx z, cplx M);

struct WeylPair {
  Window range;
  Site n = 0;
  Side side = Side::Right;
  Variant variant = Variant::Plain;
  cplx z;
  std::vector<cplx> u;  // indexed by range offset
  std::vector<cplx> v;

  cplx u_at(Site k) const { return u[range.offset(k)]; }
  cplx v_at(Site k) const { return v[range.offset(k)]; }
};

/// Seeds with the given M-type value at n and propagates across range in both
/// directions. Throws Error(PropagationOverflow) naming the site where a
/// component first exceeds 1e150.
WeylPair propagate_weyl(const CoefficientSequence& seq, Side side, Site n, cplx z, const Window& range, Variant variant,
                        cplx M);

/// propagate_weyl seeded with M_cap / Mhat_cap of (side, n, z).
WeylPair weyl_solutions(const CoefficientSequence& seq, Side side, Site n, cplx z, const Window& range,
                        Variant variant, const SolverOptions& opts = {});

/// max_k |T(z, k) (u, v)_{k-1} - (u, v)_k| / max(1, |(u, v)_k|) over the range.
double recursion_residual(const CoefficientSequence& seq, const WeylPair& pair);

/// G_{k,k'}(z) from Weyl solutions seeded at k0: u^{(l)}_k v^{(r)}_{k'} when
/// k < k' or k = k' odd, u^{(r)}_k v^{(l)}_{k'} otherwise, times
/// (-1)^{k0+1} / (z (u^{(r)} v^{(l)} - u^{(l)} v^{(r)})_{k0}).
/// Throws Error(WronskianDegenerate) if that denominator is below 1e-12.
cplx green_weyl(const CoefficientSequence& seq, Site k, Site kp, cplx z, Site k0, Variant variant,
                const SolverOptions& opts = {});

}  // namespace cmv
