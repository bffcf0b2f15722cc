#include <cmath>

#include "cmv/cmv_operator.hpp"
#include "cmv/error.hpp"
#include "cmv/weyl.hpp"
#include "doctest.h"
#include "support/reference.hpp"

using cmv::CoefficientSequence;
using cmv::cplx;
using cmv::Side;
using cmv::Site;
using cmv::Variant;
using cmv::Window;

namespace {

bool throws_kind(cmv::ErrorKind kind, const std::function<void()>& fn) {
  try {
    fn();
  } catch (const cmv::Error& e) {
    return e.kind() == kind;
  }
  return false;
}

/// Dense (U - z)^{-1} on [-h, h] from the factorized reference.
Eigen::MatrixXcd dense_inverse(const CoefficientSequence& s, Site h, cplx z) {
  const Eigen::MatrixXcd u = ref::factorized(s, -h, h);
  return (u - z * Eigen::MatrixXcd::Identity(u.rows(), u.cols())).inverse();
}

}  // namespace

TEST_CASE("free transfer matrices") {
  const auto free = CoefficientSequence::free();
  const cplx z{0.3, -0.8};
  const auto even = cmv::transfer(free, z, 4).m;
  CHECK(even(0, 0) == 0.0);
  CHECK(even(0, 1) == 1.0);
  CHECK(even(1, 0) == 1.0);
  CHECK(even(1, 1) == 0.0);
  const auto odd = cmv::transfer(free, z, -3).m;
  CHECK(odd(0, 0) == 0.0);
  CHECK(odd(0, 1) == z);
  CHECK(std::abs(odd(1, 0) - 1.0 / z) <= 1e-16);
  CHECK(odd(1, 1) == 0.0);
}

TEST_CASE("transfer rejects z = 0 at odd sites and decoupled sites") {
  const auto free = CoefficientSequence::free();
  CHECK(throws_kind(cmv::ErrorKind::InvalidArgument, [&] { cmv::transfer(free, 0.0, 1); }));
  CHECK_NOTHROW(cmv::transfer(free, 0.0, 2));
  CHECK(throws_kind(cmv::ErrorKind::InvalidArgument, [&] { cmv::transfer(cmv::decouple(free, 2), 0.5, 2); }));
}

TEST_CASE("property: det T = -1 and the closed-form inverse") {
  ref::Gen gen(41);
  for (int trial = 0; trial < 100; ++trial) {
    const cplx a = gen.disc(0.99);
    const Site k = gen.integer(-50, 50);
    const auto s = CoefficientSequence::explicit_list({{k, a}});
    const cplx z = gen.on_circle(gen.uniform(0.05, 3.0));
    const auto t = cmv::transfer(s, z, k);
    INFO("alpha " << a << " z " << z << " k " << k);
    CHECK(std::abs(t.det() + 1.0) <= 1e-12);
    CHECK(ref::max_abs(t.inverse() * t.m - Eigen::Matrix2cd::Identity()) <= 1e-10);
  }
}

TEST_CASE("Moebius maps reduce to inversion at alpha = 0") {
  ref::Gen gen(42);
  for (int trial = 0; trial < 20; ++trial) {
    const cplx m = gen.disc(3.0) + 0.1;
    CHECK(std::abs(cmv::moebius_left(0.0, m) - 1.0 / m) <= 1e-14 * std::abs(1.0 / m));
    CHECK(std::abs(cmv::moebius_hat_right(0.0, m) - 1.0 / m) <= 1e-14 * std::abs(1.0 / m));
  }
}

TEST_CASE("Moebius poles are reported") {
  const cplx a{0.3, 0.4};
  const cplx pole_l = -cplx{0.0, 1.0} * (1.0 + a).imag() / (1.0 - a).real();
  CHECK(throws_kind(cmv::ErrorKind::MoebiusPole, [&] { cmv::moebius_left(a, pole_l); }));
  const cplx pole_r = cplx{0.0, 1.0} * (1.0 - a).imag() / (1.0 - a).real();
  CHECK(throws_kind(cmv::ErrorKind::MoebiusPole, [&] { cmv::moebius_hat_right(a, pole_r); }));
}

TEST_CASE("M and hat-M at the identity branches") {
  ref::Gen gen(43);
  const auto s = gen.sequence(-20, 20);
  for (cplx z : {cplx{0.2, 0.5}, cplx{-1.3, 0.4}}) {
    CHECK(cmv::M_cap(s, Side::Right, 1, z) == cmv::m_function(s, Side::Right, 1, z));
    CHECK(cmv::Mhat_cap(s, Side::Left, 1, z) == cmv::m_function(s, Side::Left, 1, z));
    const cplx via_left = cmv::moebius_left(s.alpha(1), cmv::m_function(s, Side::Left, 0, z));
    CHECK(std::abs(cmv::M_cap(s, Side::Left, 1, z) - via_left) <= 1e-14 * std::abs(via_left));
  }
}

TEST_CASE("free M-functions") {
  const auto free = CoefficientSequence::free();
  for (cplx z : {cplx{0.0, 0.3}, cplx{0.5, -0.5}}) {
    for (Site n : {0, 1}) {
      CHECK(std::abs(cmv::M_cap(free, Side::Left, n, z) + 1.0) <= 1e-6);
      CHECK(std::abs(cmv::M_cap(free, Side::Right, n, z) - 1.0) <= 1e-6);
    }
  }
}

TEST_CASE("free hat-M boundary values satisfy the reflectionless relation") {
  const auto free = CoefficientSequence::free();
  const cmv::RadialSchedule sched;
  for (double theta : {0.7, 2.9}) {
    for (Site n : {0, 1}) {
      const auto l = cmv::radial_limit([&](cplx z) { return cmv::Mhat_cap(free, Side::Left, n - 1, z); }, theta, sched);
      const auto r = cmv::radial_limit([&](cplx z) { return cmv::Mhat_cap(free, Side::Right, n - 1, z); }, theta, sched);
      CHECK(std::abs(l.value + std::conj(r.value)) <= 1e-6);
    }
  }
}

TEST_CASE("Weyl solutions obey the recursion and decay on their half-line") {
  const CoefficientSequence s(cmv::RandomDecayParams{7, 0.4, 0.7});
  for (Variant variant : {Variant::Plain, Variant::Hat}) {
    for (Site n : {0, 1}) {
      for (cplx z : {cplx{0.3, 0.4}, cplx{1.2, -0.9}}) {
        const auto r = cmv::weyl_solutions(s, Side::Right, n, z, Window(n - 4, n + 120), variant);
        const auto l = cmv::weyl_solutions(s, Side::Left, n, z, Window(n - 120, n + 4), variant);
        CHECK(cmv::recursion_residual(s, r) <= 1e-10);
        CHECK(cmv::recursion_residual(s, l) <= 1e-10);
        const auto mass = [](const cmv::WeylPair& p, Site from, Site to) {
          double total = 0.0;
          for (Site k = from; k <= to; ++k) total += std::norm(p.u_at(k)) + std::norm(p.v_at(k));
          return total;
        };
        // Forward iteration picks up the growing mode near relative 1e-13, so
        // only the first few decades of decay are observable.
        CHECK(mass(r, n + 30, n + 39) <= 1e-4 * mass(r, n, n + 9));
        CHECK(mass(l, n - 39, n - 30) <= 1e-4 * mass(l, n - 9, n));
      }
    }
  }
}

TEST_CASE("Weyl solutions solve the eigenvalue equations") {
  ref::Gen gen(44);
  const auto s = gen.sequence(-10, 10, 0.8);
  const Window range(-30, 30);
  const Eigen::MatrixXcd c = ref::factorized([&](Site k) { return s.alpha(k); }, range.a() - 8, range.b() + 8);
  const auto at = [&](Site i, Site j) { return c(i - range.a() + 8, j - range.a() + 8); };
  for (Side side : {Side::Left, Side::Right}) {
    for (cplx z : {cplx{0.4, 0.2}, cplx{0.1, -1.3}}) {
      const auto p = cmv::weyl_solutions(s, side, 1, z, range, Variant::Plain);
      double worst_u = 0.0, worst_v = 0.0, scale = 0.0;
      for (Site k = range.a() + 2; k <= range.b() - 2; ++k) {
        cplx cu = 0.0, ctv = 0.0;
        for (Site j = k - 2; j <= k + 2; ++j) {
          cu += at(k, j) * p.u_at(j);
          ctv += at(j, k) * p.v_at(j);
        }
        worst_u = std::max(worst_u, std::abs(cu - z * p.u_at(k)));
        worst_v = std::max(worst_v, std::abs(ctv - z * p.v_at(k)));
        scale = std::max({scale, std::abs(p.u_at(k)), std::abs(p.v_at(k))});
      }
      CHECK(worst_u <= 1e-8 * scale);
      CHECK(worst_v <= 1e-8 * scale);
    }
  }
}

TEST_CASE("propagation overflow names the site") {
  const auto free = CoefficientSequence::free();
  const cplx z{0.0, 0.01};
  try {
    cmv::propagate_weyl(free, Side::Right, 0, z, Window(-400, 400), Variant::Plain, 0.3);
    FAIL("expected overflow");
  } catch (const cmv::Error& e) {
    CHECK(e.kind() == cmv::ErrorKind::PropagationOverflow);
    CHECK(std::string(e.what()).find("site") != std::string::npos);
  }
}

TEST_CASE("Weyl-solution Green's function against the dense inverse") {
  ref::Gen gen(45);
  const double moduli[] = {0.3, 0.7, 1.5};
  for (int trial = 0; trial < 20; ++trial) {
    const auto s = gen.sequence(-12, 12, 0.9);
    const cplx z = gen.on_circle(moduli[trial % 3]);
    const Site k = gen.integer(-6, 6), kp = gen.integer(-6, 6);
    const Site k0 = gen.integer(-3, 3);
    const Eigen::MatrixXcd g = dense_inverse(s, 200, z);
    const cplx expected = g(k + 200, kp + 200);
    INFO("trial " << trial << " z " << z << " k " << k << " k' " << kp << " k0 " << k0);
    const cplx plain = cmv::green_weyl(s, k, kp, z, k0, Variant::Plain);
    // Far off-diagonal entries are small differences of large products.
    const double scale = std::max(std::abs(expected), 1e-4);
    CHECK(std::abs(plain - expected) <= 1e-8 * scale);
    CHECK(std::abs(cmv::green_weyl(s, k, kp, z, k0 + 1, Variant::Plain) - plain) <= 1e-8 * scale);
    CHECK(std::abs(cmv::green_weyl(s, k, kp, z, k0, Variant::Hat) - plain) <= 1e-8 * scale);
  }
}

TEST_CASE("diagonal entries at both parities") {
  const CoefficientSequence s(cmv::RandomDecayParams{8, 0.5, 0.6});
  const cplx z{0.4, 0.2};
  const Eigen::MatrixXcd g = dense_inverse(s, 200, z);
  for (Site k : {-3, -2, 0, 1, 4, 5}) {
    for (Site k0 : {-1, 0, 1, 2}) {
      const cplx expected = g(k + 200, k + 200);
      CHECK(std::abs(cmv::green_weyl(s, k, k, z, k0, Variant::Plain) - expected) <= 1e-8 * std::abs(expected));
    }
  }
}
