#pragma once

#include <functional>
#include <vector>

#include "cmv/cmv_operator.hpp"

namespace cmv {

enum class Side { Left, Right };

/// -1 for the left half-line, +1 for the right.
inline double side_sign(Side s) noexcept { return s == Side::Left ? -1.0 : 1.0; }
const char* to_string(Side s) noexcept;

enum class Extrapolation { None, Richardson };

/// Radii r_j = 1 - eps0 * contraction^j for j = 1..levels (inside), or
/// 1 + eps0 * contraction^j when `inside` is false.
struct RadialSchedule {
  double eps0 = 1e-2;
  int levels = 6;
  double contraction = 0.5;
  Extrapolation extrapolation = Extrapolation::Richardson;
  double tol = 1e-4;
  bool inside = true;

  /// Throws Error(InvalidArgument) unless levels >= 3, 0 < contraction < 1,
  /// 0 < eps0 < 1 and eps0 * contraction^levels > 1e-12.
  void validate() const;
  double eps(int j) const;
  double radius(int j) const;
  cplx point(int j, double theta) const;
};

struct BoundaryValue {
  cplx value;
  double err_est = 0.0;
  bool converged = false;
};

/// Combines level values f_1..f_L sampled at the schedule's radii.
/// err_est is the gap between the last two extrapolation levels.
BoundaryValue extrapolate(const std::vector<cplx>& levels, const RadialSchedule& schedule);

BoundaryValue radial_limit(const std::function<cplx(cplx)>& f, double theta, const RadialSchedule& schedule);

/// Componentwise limit of a vector-valued f; every component uses the same radii.
std::vector<BoundaryValue> radial_limit(const std::function<std::vector<cplx>(cplx)>& f, double theta,
                                        const RadialSchedule& schedule);

struct SolverOptions {
  double window_tol = 1e-6;
  int max_doublings = 8;
  /// Residual bound relative to max(1, |x|).
  double residual_tol = 1e-12;
  /// Lower bound on the starting half-width of grown windows.
  Site min_half_width = 0;
};

/// Half-width beyond which the truncation error of a resolvent at z falls
/// below e^{-18}: resolvent columns decay like e^{-delta k / 2} with
/// delta = 1 - |z| inside and 1 - 1/|z| outside, and the edge is felt after a
/// round trip.
Site initial_half_width(cplx z);

/// <delta_i, (U - z)^{-1} delta_j> for the truncation to exactly this window.
cplx green_truncated(const CoefficientSequence& seq, const Window& window, Site i, Site j, cplx z,
                     const SolverOptions& opts = {});

/// green_truncated confirmed against the window doubled about its centre;
/// throws Error(NotConverged) if the relative change exceeds opts.window_tol.
cplx green(const CoefficientSequence& seq, const Window& window, Site i, Site j, cplx z, const SolverOptions& opts = {});

/// A value accepted by window doubling, with the last relative change seen.
struct Stabilized {
  cplx value;
  double change = 0.0;
  Site half_width = 0;
};

/// -/+ (1 + 2 z G'_{nn}(z)) for the half-line operator on [n, inf) (Right) or
/// (-inf, n] (Left). The half-line is a one-sided window grown until stable.
Stabilized m_function_detail(const CoefficientSequence& seq, Side side, Site n, cplx z, const SolverOptions& opts = {});

inline cplx m_function(const CoefficientSequence& seq, Side side, Site n, cplx z, const SolverOptions& opts = {}) {
  return m_function_detail(seq, side, n, z, opts).value;
}

/// Boundary value of m^{(side)}_n at e^{i theta}.
BoundaryValue m_boundary(const CoefficientSequence& seq, Side side, Site n, double theta,
                         const RadialSchedule& schedule, const SolverOptions& opts = {});

/// -/+ Re m^{(side)}_n(e^{i theta}). Values in [-tol, 0) are clamped to 0.
/// Throws Error(NotConverged) if the boundary value did not converge and
/// Error(NegativeDensity) below -tol.
double ac_density(const CoefficientSequence& seq, Side side, Site n, double theta, const RadialSchedule& schedule,
                  const SolverOptions& opts = {});

/// density > threshold per grid point; points whose density fails are false.
std::vector<bool> ac_support(const CoefficientSequence& seq, Side side, Site n, const std::vector<double>& theta_grid,
                             double threshold, const RadialSchedule& schedule, const SolverOptions& opts = {});

}  // namespace cmv
