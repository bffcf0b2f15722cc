#include <cmath>

#include "cmv/banded_solver.hpp"
#include "cmv/error.hpp"
#include "doctest.h"
#include "support/reference.hpp"

using cmv::CoefficientSequence;
using cmv::cplx;
using cmv::Site;

TEST_CASE("BandedLU against a dense solve") {
  ref::Gen gen(21);
  for (int trial = 0; trial < 20; ++trial) {
    const auto s = gen.sequence(-40, 40, 0.95);
    const cmv::Window w(-30, 30 + trial % 3);
    const cplx z = gen.on_circle(trial % 2 ? 0.6 : 1.4);
    const auto u = cmv::truncate(s, w);
    const cmv::BandedLU lu(u, z);
    const Eigen::MatrixXcd a = ref::factorized(s, w.a(), w.b());
    const auto n = a.rows();
    const Eigen::MatrixXcd inv = (a - z * Eigen::MatrixXcd::Identity(n, n)).inverse();
    for (Eigen::Index j : {Eigen::Index{0}, n / 2, n - 1}) {
      std::vector<cplx> b(static_cast<std::size_t>(n)), x(static_cast<std::size_t>(n));
      b[static_cast<std::size_t>(j)] = 1.0;
      x = b;
      lu.solve(x);
      CHECK(cmv::residual_inf(u, z, x, b) <= 1e-12);
      for (Eigen::Index i = 0; i < n; ++i) REQUIRE(std::abs(x[static_cast<std::size_t>(i)] - inv(i, j)) <= 1e-12);
    }
  }
}

TEST_CASE("BandedLU rejects the unit circle") {
  const auto u = cmv::truncate(CoefficientSequence::free(), cmv::Window(0, 20));
  CHECK_THROWS_AS(cmv::BandedLU(u, std::polar(1.0, 0.3)), cmv::Error);
}

TEST_CASE("edge closure reproduces the window solve on the core") {
  ref::Gen gen(22);
  for (int trial = 0; trial < 20; ++trial) {
    const Site n = gen.integer(-3, 3);
    const auto s = gen.sequence(-200, 200, 0.9);
    const cmv::Window w(n - 60 - trial, n + 57 + 2 * trial);
    const cplx z = gen.on_circle(trial % 2 ? 0.8 : 1.25);
    const cmv::CoefficientTable table(s, w.a(), w.b() + 1);
    const Site p = n - 8, q = n + 8;
    const auto closure = cmv::close_edges(table, w, p, q, z);
    for (const auto& seq : {s, cmv::decouple(s, n)}) {
      const Eigen::MatrixXcd core = cmv::core_matrix(seq, w, closure);
      Eigen::MatrixXcd rhs = Eigen::MatrixXcd::Zero(core.rows(), 2);
      for (Eigen::Index i = 2; i < core.rows() - 2; ++i) {
        rhs(i, 0) = gen.disc(1.0);
        rhs(i, 1) = gen.disc(1.0);
      }
      const Eigen::MatrixXcd x = cmv::solve_core(core, rhs);

      const Eigen::MatrixXcd a = ref::factorized(seq, w.a(), w.b());
      const auto m = a.rows();
      Eigen::MatrixXcd full_rhs = Eigen::MatrixXcd::Zero(m, 2);
      full_rhs.middleRows(p - w.a(), core.rows()) = rhs;
      const Eigen::MatrixXcd expect =
          (a - z * Eigen::MatrixXcd::Identity(m, m)).partialPivLu().solve(full_rhs).middleRows(p - w.a(), core.rows());
      CHECK(ref::max_abs(x - expect) <= 1e-11 * (1.0 + ref::max_abs(expect)));
    }
  }
}

TEST_CASE("edge closure with the core touching the window edge") {
  ref::Gen gen(23);
  const auto s = gen.sequence(-50, 50);
  const cmv::Window w(-20, 20);
  const cmv::CoefficientTable table(s, -20, 21);
  const cplx z{0.3, -0.4};
  const auto closure = cmv::close_edges(table, w, -20, -5, z);
  const Eigen::MatrixXcd core = cmv::core_matrix(s, w, closure);
  Eigen::MatrixXcd rhs = Eigen::MatrixXcd::Zero(core.rows(), 1);
  rhs(5, 0) = 1.0;
  const Eigen::MatrixXcd x = cmv::solve_core(core, rhs);
  const Eigen::MatrixXcd a = ref::factorized(s, -20, 20);
  const Eigen::MatrixXcd inv = (a - z * Eigen::MatrixXcd::Identity(a.rows(), a.rows())).inverse();
  for (Eigen::Index i = 0; i < core.rows(); ++i) CHECK(std::abs(x(i, 0) - inv(i, 5)) <= 1e-12);
  CHECK_THROWS_AS(cmv::close_edges(table, w, -4, 2, z), cmv::Error);
}

TEST_CASE("flush-denormals guard restores state") {
  volatile double tiny = 1e-310;
  {
    const cmv::FlushDenormalsGuard guard;
    (void)guard;
  }
  volatile double half = tiny / 2.0;
  CHECK(half > 0.0);
}
