#include "cmv/scattering.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <type_traits>

#include "cmv/parallel.hpp"
#include "cmv/weyl.hpp"

namespace cmv {

namespace {

constexpr Site kCoreHalf = 8;  // core [n - 8, n + 8] keeps the defect support two sites off its boundary

bool stable(cplx coarse, cplx fine, double tol) {
  return std::abs(fine - coarse) <= tol * std::max(1.0, std::abs(fine));
}

double change(cplx coarse, cplx fine) { return std::abs(fine - coarse) / std::max(1.0, std::abs(fine)); }

double clamp_density(double d, double tol, const char* side) {
  if (d < -tol) {
    fail(ErrorKind::NegativeDensity, std::string(side) + " density " + std::to_string(d) + " below -tol");
  }
  return std::max(d, 0.0);
}

/// First-order bound on |f(x) - f(x + e)| over independent input errors.
template <class F>
auto propagate(const F& f, const std::vector<cplx>& x, const std::vector<double>& err) {
  const auto base = f(x);
  using Out = std::remove_cv_t<decltype(base)>;
  if constexpr (std::is_same_v<Out, cplx>) {
    double total = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (err[i] == 0.0) continue;
      for (const cplx dir : {cplx{1.0, 0.0}, cplx{0.0, 1.0}}) {
        std::vector<cplx> y = x;
        y[i] += err[i] * dir;
        total += std::abs(f(y) - base) / std::numbers::sqrt2;
      }
    }
    return total;
  } else {
    Eigen::Matrix2d total = Eigen::Matrix2d::Zero();
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (err[i] == 0.0) continue;
      for (const cplx dir : {cplx{1.0, 0.0}, cplx{0.0, 1.0}}) {
        std::vector<cplx> y = x;
        y[i] += err[i] * dir;
        total += (f(y) - base).cwiseAbs() / std::numbers::sqrt2;
      }
    }
    return total;
  }
}

Site largest_half_width(const RadialSchedule& schedule, const SolverOptions& solver) {
  const Site base = std::max(initial_half_width(cplx{schedule.radius(schedule.levels), 0.0}), solver.min_half_width);
  // One doubling always happens; a second is common for slowly varying data.
  return base << std::min(2, solver.max_doublings);
}

}  // namespace

ScatteringEngine::ScatteringEngine(CoefficientSequence seq, Site n, ScatteringOptions opts)
    : seq_(std::move(seq)), decoupled_(seq_.decoupled_at(n)), n_(n), opts_(opts), defect_(defect(seq_, n)) {
  opts_.schedule.validate();
  if (seq_.has_decouplings()) fail(ErrorKind::InvalidArgument, "scattering needs a coupled sequence");
  const Site span = largest_half_width(opts_.schedule, opts_.solver);
  table_ = std::make_shared<const CoefficientTable>(seq_, n - span - 2, n + span + 2);
}

std::array<std::pair<Site, Site>, 4> ScatteringEngine::inner_pairs() const {
  const Site n = n_;
  if (n % 2 == 0) return {{{n - 2, n - 1}, {n - 2, n}, {n + 1, n - 1}, {n + 1, n}}};
  return {{{n - 1, n - 2}, {n - 1, n + 1}, {n, n - 2}, {n, n + 1}}};
}

ScatteringEngine::PointData ScatteringEngine::at(cplx z, Site half_width) const {
  const Site n = n_;
  const Window w(n - half_width, n + half_width);
  const Site p = n - kCoreHalf;
  const Site q = n + kCoreHalf;
  const EdgeClosure closure = close_edges(*table_, w, p, q, z);
  const auto m = static_cast<Eigen::Index>(q - p + 1);
  const auto pairs = inner_pairs();

  // Coupled operator: two defect columns, paired with two adjoint columns.
  const std::array<Site, 2> cols = {pairs[0].first, pairs[2].first};
  Eigen::MatrixXcd rhs = Eigen::MatrixXcd::Zero(m, 2);
  for (int c = 0; c < 2; ++c) {
    for (const auto& [k, v] : defect_.column(cols[static_cast<std::size_t>(c)])) rhs(k - p, c) += v;
  }
  const Eigen::MatrixXcd x = solve_core(core_matrix(seq_, w, closure), rhs);

  PointData out;
  for (std::size_t t = 0; t < 4; ++t) {
    const Eigen::Index c = t < 2 ? 0 : 1;
    cplx acc{};
    for (const auto& [k, v] : defect_.adjoint_column(pairs[t].second)) acc += std::conj(x(k - p, c)) * v;
    out.inner[t] = acc;
  }

  // Decoupled operator: diagonal Green's function at n - 1 and n.
  Eigen::MatrixXcd unit = Eigen::MatrixXcd::Zero(m, 2);
  unit(n - 1 - p, 0) = 1.0;
  unit(n - p, 1) = 1.0;
  const Eigen::MatrixXcd y = solve_core(core_matrix(decoupled_, w, closure), unit);
  out.m_left = -(1.0 + 2.0 * z * y(n - 1 - p, 0));
  out.m_right = 1.0 + 2.0 * z * y(n - p, 1);
  return out;
}

ScatteringEngine::PointData ScatteringEngine::stabilized(cplx z, double* worst, Site* half_width) const {
  const double tol = opts_.solver.window_tol;
  Site L = std::max(initial_half_width(z), opts_.solver.min_half_width);
  PointData coarse = at(z, L);
  for (int d = 0; d < opts_.solver.max_doublings; ++d) {
    L *= 2;
    const PointData fine = at(z, L);
    bool ok = stable(coarse.m_left, fine.m_left, tol) && stable(coarse.m_right, fine.m_right, tol);
    double ch = std::max(change(coarse.m_left, fine.m_left), change(coarse.m_right, fine.m_right));
    for (std::size_t t = 0; t < 4; ++t) {
      ok = ok && stable(coarse.inner[t], fine.inner[t], tol);
      ch = std::max(ch, change(coarse.inner[t], fine.inner[t]));
    }
    if (ok) {
      if (worst) *worst = ch;
      if (half_width) *half_width = L;
      return fine;
    }
    coarse = fine;
  }
  fail(ErrorKind::NotConverged, "scattering data did not stabilize under window doubling up to half-width " +
                                    std::to_string(L));
}

BoundaryData ScatteringEngine::boundary(double theta) const {
  const RadialSchedule& sch = opts_.schedule;
  std::array<std::vector<cplx>, 6> levels;
  BoundaryData out;
  for (int j = 1; j <= sch.levels; ++j) {
    double ch = 0.0;
    Site L = 0;
    const PointData d = stabilized(sch.point(j, theta), &ch, &L);
    for (std::size_t t = 0; t < 4; ++t) levels[t].push_back(d.inner[t]);
    levels[4].push_back(d.m_left);
    levels[5].push_back(d.m_right);
    out.window_change = std::max(out.window_change, ch);
    out.half_width = std::max(out.half_width, L);
  }
  const auto finish = [&](const std::vector<cplx>& f) {
    BoundaryValue bv = extrapolate(f, sch);
    bv.err_est += out.window_change * std::max(1.0, std::abs(bv.value));
    bv.converged = bv.err_est <= sch.tol;
    return bv;
  };
  for (std::size_t t = 0; t < 4; ++t) out.inner[t] = finish(levels[t]);
  out.m_left = finish(levels[4]);
  out.m_right = finish(levels[5]);
  return out;
}

Eigen::Matrix2cd assemble_scattering(const CoefficientSequence& seq, Site n, const std::array<cplx, 4>& I,
                                     cplx m_left, cplx m_right) {
  const double dl = std::max(0.0, -m_left.real());
  const double dr = std::max(0.0, m_right.real());
  const double sq = std::sqrt(dl * dr);
  const cplx a = seq.alpha(n);
  const auto r = [&](Site k) { return seq.rho(k); };
  Eigen::Matrix2cd s;
  s(0, 0) = 1.0 + (1.0 - std::conj(a) - I[0] / r(n - 1)) * dl;
  s(1, 1) = 1.0 + (1.0 - a + I[3] / r(n + 1)) * dr;
  if (n % 2 == 0) {
    s(0, 1) = (r(n) - I[1] / r(n - 1)) * sq;
    s(1, 0) = (-r(n) + I[2] / r(n + 1)) * sq;
  } else {
    s(0, 1) = (-r(n) + I[1] / r(n + 1)) * sq;
    s(1, 0) = (r(n) - I[2] / r(n - 1)) * sq;
  }
  return s;
}

DiagonalPair diagonal_from_m(cplx alpha_n, cplx m_left, cplx m_right) {
  const cplx M_l = moebius_left(alpha_n, m_left);
  const cplx M_r = m_right;
  const cplx Mh_l = m_left;
  const cplx Mh_r = moebius_hat_right(alpha_n, m_right);
  const cplx den_ll = std::conj(Mh_r) - std::conj(Mh_l);
  const cplx den_rr = std::conj(M_l) - std::conj(M_r);
  if (std::abs(den_ll) < 1e-12 || std::abs(den_rr) < 1e-12) {
    fail(ErrorKind::MDenominatorDegenerate, "diagonal formula denominator vanishes");
  }
  DiagonalPair out;
  out.s_ll = (std::conj(Mh_r) + Mh_l) / den_ll;
  out.s_rr = (std::conj(M_l) + M_r) / den_rr;
  return out;
}

double reflectionless_residual_from_m(cplx alpha_n, cplx m_left, cplx m_right) {
  return std::abs(moebius_left(alpha_n, m_left) + std::conj(m_right));
}

namespace {

DiagonalPair diagonal_with_errors(cplx a, cplx m_left, cplx m_right, double err_left, double err_right) {
  DiagonalPair out = diagonal_from_m(a, m_left, m_right);
  const std::vector<cplx> x = {m_left, m_right};
  const std::vector<double> err = {err_left, err_right};
  out.err_ll = propagate([&](const std::vector<cplx>& v) { return diagonal_from_m(a, v[0], v[1]).s_ll; }, x, err);
  out.err_rr = propagate([&](const std::vector<cplx>& v) { return diagonal_from_m(a, v[0], v[1]).s_rr; }, x, err);
  return out;
}

}  // namespace

ScatteringSample ScatteringEngine::sample(double theta) const {
  ScatteringSample out;
  out.theta = theta;
  out.n = n_;
  try {
    const BoundaryData bd = boundary(theta);
    const double tol = opts_.schedule.tol;
    const cplx a = seq_.alpha(n_);
    std::vector<cplx> x;
    std::vector<double> err;
    for (const auto& bv : bd.inner) {
      x.push_back(bv.value);
      err.push_back(bv.err_est);
    }
    x.push_back(bd.m_left.value);
    err.push_back(bd.m_left.err_est);
    x.push_back(bd.m_right.value);
    err.push_back(bd.m_right.err_est);

    out.density_l = clamp_density(-bd.m_left.value.real(), tol, "left");
    out.density_r = clamp_density(bd.m_right.value.real(), tol, "right");
    out.support_l = out.density_l > opts_.support_threshold;
    out.support_r = out.density_r > opts_.support_threshold;

    const auto S = [&](const std::vector<cplx>& v) {
      return assemble_scattering(seq_, n_, {v[0], v[1], v[2], v[3]}, v[4], v[5]);
    };
    out.s = S(x);
    out.s_err = propagate(S, x, err);

    const auto R = [&](const std::vector<cplx>& v) { return cplx{reflectionless_residual_from_m(a, v[4], v[5])}; };
    out.refl_residual = R(x).real();
    out.refl_err = propagate(R, x, err);

    try {
      out.proposition = diagonal_with_errors(a, x[4], x[5], err[4], err[5]);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::MDenominatorDegenerate) throw;
    }

    if (out.two_channel()) {
      out.unitarity_defect = (out.s.adjoint() * out.s - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff();
    } else if (out.support_l) {
      out.unitarity_defect = std::abs(std::norm(out.s(0, 0)) - 1.0);
    } else if (out.support_r) {
      out.unitarity_defect = std::abs(std::norm(out.s(1, 1)) - 1.0);
    }

    out.converged_l = bd.m_left.converged;
    out.converged_r = bd.m_right.converged;
    out.converged = out.converged_l && out.converged_r;
    for (const auto& bv : bd.inner) out.converged = out.converged && bv.converged;
  } catch (const Error& e) {
    out.error = e.kind();
    out.message = e.what();
    out.converged = out.converged_l = out.converged_r = false;
  }
  return out;
}

ScatteringSample scattering_matrix(const CoefficientSequence& seq, Site n, double theta,
                                   const ScatteringOptions& opts) {
  return ScatteringEngine(seq, n, opts).sample(theta);
}

DiagonalPair diagonal_via_M(const CoefficientSequence& seq, Site n, double theta, const ScatteringOptions& opts) {
  const RadialSchedule& sch = opts.schedule;
  const BoundaryValue ml = m_boundary(seq, Side::Left, n - 1, theta, sch, opts.solver);
  const BoundaryValue mr = m_boundary(seq, Side::Right, n, theta, sch, opts.solver);
  if (!ml.converged || !mr.converged) {
    fail(ErrorKind::NotConverged, "m boundary values did not converge at theta = " + std::to_string(theta));
  }
  return diagonal_with_errors(seq.alpha(n), ml.value, mr.value, ml.err_est, mr.err_est);
}

BoundaryValue reflectionless_residual(const CoefficientSequence& seq, Site n, double theta,
                                      const ScatteringOptions& opts) {
  const RadialSchedule& sch = opts.schedule;
  const BoundaryValue ml = m_boundary(seq, Side::Left, n - 1, theta, sch, opts.solver);
  const BoundaryValue mr = m_boundary(seq, Side::Right, n, theta, sch, opts.solver);
  if (!ml.converged || !mr.converged) {
    fail(ErrorKind::NotConverged, "m boundary values did not converge at theta = " + std::to_string(theta));
  }
  const cplx a = seq.alpha(n);
  BoundaryValue out;
  out.value = reflectionless_residual_from_m(a, ml.value, mr.value);
  out.err_est = propagate([&](const std::vector<cplx>& v) { return cplx{reflectionless_residual_from_m(a, v[0], v[1])}; },
                          std::vector<cplx>{ml.value, mr.value}, std::vector<double>{ml.err_est, mr.err_est});
  out.converged = true;
  return out;
}

const char* to_string(Classification c) noexcept {
  switch (c) {
    case Classification::OffDiagonal: return "off-diagonal";
    case Classification::Diagonal: return "diagonal";
    case Classification::Ambiguous: return "ambiguous";
    case Classification::NotConverged: return "not-converged";
    case Classification::Excluded: return "excluded";
  }
  return "unknown";
}

ThetaVerdict classify(const ScatteringSample& s, double tol) {
  ThetaVerdict v;
  v.theta = s.theta;
  if (s.error) return v;
  if (!s.converged) {
    v.by_matrix = v.by_residual = Classification::NotConverged;
    return v;
  }
  bool above = false, straddle = false;
  const auto channel = [&](bool active, double value, double err) {
    if (!active) return;
    above = above || value > tol;
    straddle = straddle || std::abs(value - tol) <= err;
  };
  channel(s.support_l, std::abs(s.s(0, 0)), s.s_err(0, 0));
  channel(s.support_r, std::abs(s.s(1, 1)), s.s_err(1, 1));
  v.by_matrix = straddle ? Classification::Ambiguous : above ? Classification::Diagonal : Classification::OffDiagonal;
  if (std::abs(s.refl_residual - tol) <= s.refl_err) {
    v.by_residual = Classification::Ambiguous;
  } else {
    v.by_residual = s.refl_residual <= tol ? Classification::OffDiagonal : Classification::Diagonal;
  }
  return v;
}

OffDiagonalityReport off_diagonality_report(const CoefficientSequence& seq, Site n,
                                            const std::vector<double>& grid, double tol,
                                            const ScatteringOptions& opts, unsigned workers) {
  const ScatteringEngine engine(seq, n, opts);
  OffDiagonalityReport rep;
  rep.samples = parallel_map(grid.size(), workers, [&](std::size_t i) { return engine.sample(grid[i]); });
  for (const auto& s : rep.samples) {
    const ThetaVerdict v = classify(s, tol);
    rep.verdicts.push_back(v);
    if (!s.usable()) continue;
    ++rep.converged;
    if (v.by_matrix == Classification::OffDiagonal) ++rep.off_diagonal;
    const bool amb = v.by_matrix == Classification::Ambiguous || v.by_residual == Classification::Ambiguous;
    if (amb) {
      ++rep.ambiguous;
    } else {
      ++rep.decided;
      if (v.by_matrix == v.by_residual) ++rep.agree;
    }
  }
  return rep;
}

std::vector<double> theta_grid(std::size_t count, double offset) {
  std::vector<double> out(count);
  for (std::size_t j = 0; j < count; ++j) {
    out[j] = 2.0 * std::numbers::pi * (static_cast<double>(j) + offset) / static_cast<double>(count);
  }
  return out;
}

}  // namespace cmv
