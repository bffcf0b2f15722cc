#include <cmath>

#include "cmv/cmv_operator.hpp"
#include "cmv/error.hpp"
#include "cmv/scattering.hpp"
#include "cmv/weyl.hpp"
#include "doctest.h"
#include "support/reference.hpp"

using cmv::CoefficientSequence;
using cmv::cplx;
using cmv::Site;

namespace {

const CoefficientSequence& random_seq() {
  static const CoefficientSequence s(cmv::RandomDecayParams{1, 0.5, 0.5});
  return s;
}

/// Inverts the left Moebius map: the m^{(l)}_{n-1} giving M^{(l)}_n = target.
cplx m_left_for(cplx alpha, cplx target) {
  const double a = (1.0 + alpha).real(), b = (1.0 - alpha).imag();
  const double c = (1.0 + alpha).imag(), d = (1.0 - alpha).real();
  const cplx i{0.0, 1.0};
  return (a - i * c * target) / (target * d - i * b);
}

}  // namespace

TEST_CASE("theta grid") {
  const auto g = cmv::theta_grid(4);
  REQUIRE(g.size() == 4);
  CHECK(g[0] == doctest::Approx(M_PI / 4));
  CHECK(g[3] == doctest::Approx(7 * M_PI / 4));
  CHECK(cmv::theta_grid(3, 0.0)[0] == 0.0);
}

TEST_CASE("free scattering matrix is off-diagonal at both parities") {
  for (Site n : {0, 1}) {
    const cmv::ScatteringEngine engine(CoefficientSequence::free(), n);
    for (double theta : {0.4, 2.2, 5.0}) {
      const auto s = engine.sample(theta);
      REQUIRE(s.usable());
      CHECK(s.two_channel());
      CHECK(std::abs(s.s(0, 0)) <= 1e-6);
      CHECK(std::abs(s.s(1, 1)) <= 1e-6);
      CHECK(std::abs(std::abs(s.s(0, 1)) - 1.0) <= 1e-6);
      CHECK(std::abs(std::abs(s.s(1, 0)) - 1.0) <= 1e-6);
      CHECK(s.refl_residual <= 1e-6);
    }
  }
}

TEST_CASE("random decaying sequence: unitarity and equal diagonal moduli") {
  for (Site n : {0, 1}) {
    const cmv::ScatteringEngine engine(random_seq(), n);
    for (double theta : cmv::theta_grid(6)) {
      const auto s = engine.sample(theta);
      INFO("n " << n << " theta " << theta);
      REQUIRE(s.usable());
      REQUIRE(s.two_channel());
      CHECK(s.unitarity_defect <= 1e-3);
      CHECK(std::abs(std::abs(s.s(0, 0)) - std::abs(s.s(1, 1))) <= 1e-3);
    }
  }
}

TEST_CASE("single barrier scatters with the barrier modulus") {
  const auto barrier = CoefficientSequence::single_barrier(0, 0.9);
  for (Site n : {0, 1, 2}) {
    const auto s = cmv::ScatteringEngine(barrier, n).sample(1.3);
    REQUIRE(s.usable());
    CHECK(std::abs(s.s(0, 0)) == doctest::Approx(0.9).epsilon(1e-6));
    CHECK(std::abs(s.s(0, 1)) == doctest::Approx(std::sqrt(1 - 0.81)).epsilon(1e-6));
    CHECK(s.unitarity_defect <= 1e-6);
  }
}

TEST_CASE("diagonal from m-values") {
  const auto free = cmv::diagonal_from_m(0.0, -1.0, 1.0);
  CHECK(std::abs(free.s_rr) == 0.0);
  CHECK(std::abs(free.s_ll) == 0.0);

  ref::Gen gen(51);
  for (int trial = 0; trial < 20; ++trial) {
    const cplx alpha = gen.disc(0.9);
    const cplx m_right = cplx{gen.uniform(0.1, 3.0), gen.uniform(-3.0, 3.0)};
    const cplx m_left = m_left_for(alpha, -std::conj(m_right));
    REQUIRE(std::abs(cmv::moebius_left(alpha, m_left) + std::conj(m_right)) <= 1e-12);
    CHECK(std::abs(cmv::diagonal_from_m(alpha, m_left, m_right).s_rr) <= 1e-12);
    CHECK(cmv::reflectionless_residual_from_m(alpha, m_left, m_right) <= 1e-12);
  }
  CHECK_THROWS_AS(cmv::diagonal_from_m(0.0, 1.0, 1.0), cmv::Error);
}

TEST_CASE("theorem and proposition diagonals agree") {
  for (Site n : {0, 1}) {
    const cmv::ScatteringEngine engine(random_seq(), n);
    for (double theta : cmv::theta_grid(8, 0.25)) {
      const auto s = engine.sample(theta);
      REQUIRE(s.usable());
      REQUIRE(s.proposition);
      const auto b = engine.boundary(theta);
      const auto d = cmv::diagonal_from_m(random_seq().alpha(n), b.m_left.value, b.m_right.value);
      INFO("n " << n << " theta " << theta);
      CHECK(d.s_ll == s.proposition->s_ll);
      CHECK(std::abs(d.s_ll - s.s(0, 0)) <= s.s_err(0, 0) + s.proposition->err_ll);
      CHECK(std::abs(d.s_rr - s.s(1, 1)) <= s.s_err(1, 1) + s.proposition->err_rr);
    }
  }
  const auto via_m = cmv::diagonal_via_M(random_seq(), 1, 2.0);
  const auto s = cmv::scattering_matrix(random_seq(), 1, 2.0);
  CHECK(std::abs(via_m.s_rr - s.s(1, 1)) <= via_m.err_rr + s.s_err(1, 1));
}

TEST_CASE("reflectionless residual") {
  const auto free = cmv::reflectionless_residual(CoefficientSequence::free(), 0, 0.9);
  CHECK(free.converged);
  CHECK(free.value.real() <= 1e-6);

  const auto barrier = CoefficientSequence::single_barrier(0, 0.9);
  cmv::ScatteringOptions wide;
  wide.solver.min_half_width = 2 * cmv::initial_half_width(wide.schedule.point(wide.schedule.levels, 0.9));
  for (Site n : {0, 1}) {
    const auto base = cmv::reflectionless_residual(barrier, n, 0.9);
    const auto doubled = cmv::reflectionless_residual(barrier, n, 0.9, wide);
    CHECK(base.value.real() > 1e-2);
    CHECK(std::abs(doubled.value - base.value) <= 0.1 * base.value.real());
  }
}

TEST_CASE("classification is independent of the decoupling site") {
  const auto grid = cmv::theta_grid(4);
  for (const auto& seq : {CoefficientSequence::free(), CoefficientSequence::single_barrier(0, 0.9)}) {
    std::vector<std::vector<cmv::Classification>> by_n;
    for (Site n : {0, 1, 2}) {
      const auto report = cmv::off_diagonality_report(seq, n, grid, 1e-3);
      CHECK(report.converged == grid.size());
      CHECK(report.agreement_fraction() == 1.0);
      std::vector<cmv::Classification> row;
      for (const auto& v : report.verdicts) row.push_back(v.by_matrix);
      by_n.push_back(row);
    }
    CHECK(by_n[0] == by_n[1]);
    CHECK(by_n[0] == by_n[2]);
  }
}

TEST_CASE("free sequence is reflectionless by both tests") {
  const auto report = cmv::off_diagonality_report(CoefficientSequence::free(), 1, cmv::theta_grid(8), 1e-3, {}, 2);
  CHECK(report.off_diagonal_fraction() == 1.0);
  CHECK(report.agreement_fraction() == 1.0);
  for (const auto& v : report.verdicts) CHECK(v.by_residual == cmv::Classification::OffDiagonal);
}

TEST_CASE("classify handles error bars and exclusions") {
  cmv::ScatteringSample s;
  s.converged = s.converged_l = s.converged_r = true;
  s.support_l = s.support_r = true;
  s.s << 0.0005, 1.0, 1.0, 0.0005;
  s.refl_residual = 0.0004;
  CHECK(cmv::classify(s, 1e-3).by_matrix == cmv::Classification::OffDiagonal);
  CHECK(cmv::classify(s, 1e-3).by_residual == cmv::Classification::OffDiagonal);
  s.s_err(0, 0) = 1e-3;
  CHECK(cmv::classify(s, 1e-3).by_matrix == cmv::Classification::Ambiguous);
  s.s_err(0, 0) = 0.0;
  s.s(1, 1) = 0.5;
  CHECK(cmv::classify(s, 1e-3).by_matrix == cmv::Classification::Diagonal);
  s.support_r = false;
  CHECK(cmv::classify(s, 1e-3).by_matrix == cmv::Classification::OffDiagonal);
  s.converged = false;
  CHECK(cmv::classify(s, 1e-3).by_matrix == cmv::Classification::NotConverged);
  s.error = cmv::ErrorKind::NearSpectrum;
  CHECK(cmv::classify(s, 1e-3).by_matrix == cmv::Classification::Excluded);
}

TEST_CASE("odd-site spectral representations of the neighbouring basis vectors") {
  ref::Gen gen(52);
  for (int trial = 0; trial < 10; ++trial) {
    const auto s = gen.sequence(-20, 20, 0.95);
    const Site n = 2 * gen.integer(-4, 4) + 1;
    const cmv::Window w(n - 8, n + 8);
    const auto cn = cmv::truncate(cmv::decouple(s, n), w);
    // rho_{n+1} delta_{n+1} = (C_n + alpha_{n+1}) delta_n
    for (Site i = w.a(); i <= w.b(); ++i) {
      const cplx lhs = i == n + 1 ? cplx{s.rho(n + 1)} : cplx{};
      const cplx rhs = cn.at(i, n) + (i == n ? s.alpha(n + 1) : cplx{});
      CHECK(std::abs(lhs - rhs) <= 1e-15);
    }
    // -rho_{n-1} delta_{n-2} = (C_n + conj alpha_{n-1}) delta_{n-1}
    for (Site i = w.a(); i <= w.b(); ++i) {
      const cplx lhs = i == n - 2 ? cplx{-s.rho(n - 1)} : cplx{};
      const cplx rhs = cn.at(i, n - 1) + (i == n - 1 ? std::conj(s.alpha(n - 1)) : cplx{});
      CHECK(std::abs(lhs - rhs) <= 1e-15);
    }
  }
}

TEST_CASE("odd-site decomposition of the defect columns") {
  ref::Gen gen(53);
  double worst_next = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const auto s = gen.sequence(-20, 20, 0.95);
    const Site n = 2 * gen.integer(-4, 4) + 1;
    const cmv::Window w(n - 8, n + 8);
    const auto c = cmv::truncate(s, w);
    const auto cn = cmv::truncate(cmv::decouple(s, n), w);
    const auto diff = [&](Site i, Site j) { return c.at(i, j) - cn.at(i, j); };
    const double rho = s.rho(n);
    double first = 0.0, with_next = 0.0, with_own = 0.0;
    for (Site i = w.a(); i <= w.b(); ++i) {
      first = std::max(first, std::abs(diff(i, n - 1) - ((s.alpha(n) - 1.0) * cn.at(i, n - 1) + rho * cn.at(i, n))));
      const cplx left = -rho * cn.at(i, n - 1);
      with_next = std::max(with_next, std::abs(diff(i, n) - (left + (std::conj(s.alpha(n + 1)) - 1.0) * cn.at(i, n))));
      with_own = std::max(with_own, std::abs(diff(i, n) - (left + (std::conj(s.alpha(n)) - 1.0) * cn.at(i, n))));
    }
    CHECK(first <= 1e-15);
    CHECK(with_own <= 1e-15);
    worst_next = std::max(worst_next, with_next);
  }
  // The alpha_{n+1} reading is reported only; the identity holds with alpha_n.
  WARN_MESSAGE(worst_next <= 1e-12, "right component with conj(alpha_{n+1}) misses by up to " << worst_next);
}
