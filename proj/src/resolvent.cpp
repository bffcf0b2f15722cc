#include "cmv/resolvent.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cmv/banded_solver.hpp"
#include "cmv/error.hpp"

namespace cmv {

const char* to_string(Side s) noexcept { return s == Side::Left ? "l" : "r"; }

void RadialSchedule::validate() const {
  if (levels < 3) fail(ErrorKind::InvalidArgument, "radial schedule needs at least 3 levels");
  if (!(contraction > 0.0 && contraction < 1.0)) {
    fail(ErrorKind::InvalidArgument, "radial contraction must lie in (0, 1)");
  }
  if (!(eps0 > 0.0 && eps0 < 1.0)) fail(ErrorKind::InvalidArgument, "radial eps0 must lie in (0, 1)");
  if (!(eps0 * std::pow(contraction, levels) > 1e-12)) {
    fail(ErrorKind::InvalidArgument, "radial schedule approaches the circle closer than 1e-12");
  }
  if (!(tol > 0.0)) fail(ErrorKind::InvalidArgument, "boundary-value tolerance must be positive");
}

double RadialSchedule::eps(int j) const { return eps0 * std::pow(contraction, j); }

double RadialSchedule::radius(int j) const { return inside ? 1.0 - eps(j) : 1.0 + eps(j); }

cplx RadialSchedule::point(int j, double theta) const { return std::polar(radius(j), theta); }

BoundaryValue extrapolate(const std::vector<cplx>& f, const RadialSchedule& schedule) {
  const std::size_t n = f.size();
  if (n < 2) fail(ErrorKind::InvalidArgument, "extrapolation needs at least two levels");
  BoundaryValue out;
  for (const cplx& v : f) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      fail(ErrorKind::NotConverged, "non-finite value along the radial schedule");
    }
  }
  if (schedule.extrapolation == Extrapolation::None) {
    out.value = f[n - 1];
    out.err_est = std::abs(f[n - 1] - f[n - 2]);
  } else {
    // Error expands in powers of eps; each column removes one power.
    std::vector<cplx> prev = f;
    cplx last_diag = f[n - 1];
    cplx prev_diag = f[n - 2];
    for (std::size_t k = 1; k < n; ++k) {
      const double factor = std::pow(schedule.contraction, -static_cast<double>(k)) - 1.0;
      std::vector<cplx> cur(n);
      for (std::size_t j = k; j < n; ++j) cur[j] = prev[j] + (prev[j] - prev[j - 1]) / factor;
      prev_diag = prev[n - 1];
      last_diag = cur[n - 1];
      prev = std::move(cur);
    }
    out.value = last_diag;
    out.err_est = std::abs(last_diag - prev_diag);
  }
  out.converged = out.err_est <= schedule.tol;
  return out;
}

BoundaryValue radial_limit(const std::function<cplx(cplx)>& f, double theta, const RadialSchedule& schedule) {
  schedule.validate();
  std::vector<cplx> values;
  for (int j = 1; j <= schedule.levels; ++j) values.push_back(f(schedule.point(j, theta)));
  return extrapolate(values, schedule);
}

std::vector<BoundaryValue> radial_limit(const std::function<std::vector<cplx>(cplx)>& f, double theta,
                                        const RadialSchedule& schedule) {
  schedule.validate();
  std::vector<std::vector<cplx>> columns;
  for (int j = 1; j <= schedule.levels; ++j) {
    const std::vector<cplx> v = f(schedule.point(j, theta));
    if (columns.empty()) columns.resize(v.size());
    if (v.size() != columns.size()) fail(ErrorKind::InvalidArgument, "vector function changed length");
    for (std::size_t c = 0; c < v.size(); ++c) columns[c].push_back(v[c]);
  }
  std::vector<BoundaryValue> out;
  for (const auto& col : columns) out.push_back(extrapolate(col, schedule));
  return out;
}

Site initial_half_width(cplx z) {
  const double r = std::abs(z);
  const double delta = r < 1.0 ? 1.0 - r : 1.0 - 1.0 / r;
  if (!(delta > 0.0)) fail(ErrorKind::NearSpectrum, "spectral parameter lies on the unit circle");
  return std::max<Site>(16, static_cast<Site>(std::ceil(18.0 / delta)));
}

namespace {

cplx solve_entry(const CoefficientSequence& seq, const Window& window, Site i, Site j, cplx z,
                 const SolverOptions& opts) {
  if (!window.contains(i) || !window.contains(j)) {
    fail(ErrorKind::InvalidArgument, "green: indices must lie inside the window");
  }
  const BandedUnitary u = truncate(seq, window);
  const BandedLU lu(u, z);
  std::vector<cplx> b(u.size());
  b[window.offset(j)] = 1.0;
  std::vector<cplx> x = b;
  lu.solve(x);
  double scale = 1.0;
  for (const cplx& v : x) scale = std::max(scale, std::abs(v));
  const double res = residual_inf(u, z, x, b);
  if (!(res <= opts.residual_tol * scale)) {
    fail(ErrorKind::NearSpectrum, "resolvent residual " + std::to_string(res) + " above tolerance");
  }
  return x[window.offset(i)];
}

bool stable(cplx coarse, cplx fine, double tol) { return std::abs(fine - coarse) <= tol * std::abs(fine) + 1e-15; }

double relative_change(cplx coarse, cplx fine) {
  const double d = std::abs(fine - coarse);
  return d == 0.0 ? 0.0 : d / std::max(std::abs(fine), 1e-300);
}

}  // namespace

cplx green_truncated(const CoefficientSequence& seq, const Window& window, Site i, Site j, cplx z,
                     const SolverOptions& opts) {
  return solve_entry(seq, window, i, j, z, opts);
}

cplx green(const CoefficientSequence& seq, const Window& window, Site i, Site j, cplx z, const SolverOptions& opts) {
  const cplx coarse = solve_entry(seq, window, i, j, z, opts);
  const Site c = window.a() + (window.b() - window.a()) / 2;
  const Site h = std::max(window.b() - c, c - window.a());
  const cplx fine = solve_entry(seq, Window(c - 2 * h, c + 2 * h), i, j, z, opts);
  if (!stable(coarse, fine, opts.window_tol)) {
    fail(ErrorKind::NotConverged,
         "green changed by " + std::to_string(relative_change(coarse, fine)) + " under window doubling");
  }
  return coarse;
}

Stabilized m_function_detail(const CoefficientSequence& seq, Side side, Site n, cplx z, const SolverOptions& opts) {
  const auto at = [&](Site L) {
    cplx g;
    if (side == Side::Right) {
      g = solve_entry(seq.decoupled_at(n), Window(n, n + L), n, n, z, opts);
    } else {
      g = solve_entry(seq.decoupled_at(n + 1), Window(n - L, n), n, n, z, opts);
    }
    return side_sign(side) * (1.0 + 2.0 * z * g);
  };
  Site L = std::max(initial_half_width(z), opts.min_half_width);
  cplx coarse = at(L);
  for (int d = 0; d < opts.max_doublings; ++d) {
    L *= 2;
    const cplx fine = at(L);
    if (stable(coarse, fine, opts.window_tol)) return {fine, relative_change(coarse, fine), L};
    coarse = fine;
  }
  fail(ErrorKind::NotConverged, "m-function did not stabilize under window doubling up to half-width " +
                                    std::to_string(L));
}

BoundaryValue m_boundary(const CoefficientSequence& seq, Side side, Site n, double theta,
                         const RadialSchedule& schedule, const SolverOptions& opts) {
  double worst_change = 0.0;
  BoundaryValue bv = radial_limit(
      [&](cplx z) {
        const Stabilized s = m_function_detail(seq, side, n, z, opts);
        worst_change = std::max(worst_change, s.change);
        return s.value;
      },
      theta, schedule);
  bv.err_est += worst_change * std::abs(bv.value);
  bv.converged = bv.err_est <= schedule.tol;
  return bv;
}

double ac_density(const CoefficientSequence& seq, Side side, Site n, double theta, const RadialSchedule& schedule,
                  const SolverOptions& opts) {
  const BoundaryValue m = m_boundary(seq, side, n, theta, schedule, opts);
  if (!m.converged) {
    fail(ErrorKind::NotConverged, "boundary value of m at theta = " + std::to_string(theta) + " has error estimate " +
                                      std::to_string(m.err_est));
  }
  const double d = side_sign(side) * m.value.real();
  if (d < -schedule.tol) {
    fail(ErrorKind::NegativeDensity, "density " + std::to_string(d) + " at theta = " + std::to_string(theta));
  }
  return std::max(d, 0.0);
}

std::vector<bool> ac_support(const CoefficientSequence& seq, Side side, Site n, const std::vector<double>& theta_grid,
                             double threshold, const RadialSchedule& schedule, const SolverOptions& opts) {
  std::vector<bool> out;
  out.reserve(theta_grid.size());
  for (double theta : theta_grid) {
    try {
      out.push_back(ac_density(seq, side, n, theta, schedule, opts) > threshold);
    } catch (const Error&) {
      out.push_back(false);
    }
  }
  return out;
}

}  // namespace cmv
