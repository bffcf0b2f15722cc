#include <cmath>

#include "cmv/dynamics.hpp"
#include "cmv/error.hpp"
#include "doctest.h"

using cmv::CoefficientSequence;
using cmv::cplx;
using cmv::Site;
using cmv::WavePacket;
using cmv::Window;

namespace {

double norm(const std::vector<cplx>& psi) {
  double total = 0.0;
  for (const cplx& x : psi) total += std::norm(x);
  return std::sqrt(total);
}

}  // namespace

TEST_CASE("packets are normalized and stay off the edges") {
  const Window w(-1024, 1024);
  const auto psi = cmv::prepare(WavePacket{}, w);
  CHECK(std::abs(norm(psi) - 1.0) <= 1e-12);
  for (Site k = w.a(); k <= w.b(); ++k) {
    if (k % 2 != 0) CHECK(psi[w.offset(k)] == cplx{});
  }
  CHECK_THROWS_AS(cmv::prepare(WavePacket{-1000, 40.0, M_PI / 2}, w), cmv::Error);
}

TEST_CASE("evolution is unitary and invertible") {
  const CoefficientSequence s(cmv::RandomDecayParams{2, 0.05, 0.8});
  const Window w(-1024, 1024);
  const auto u = cmv::truncate(s, w);
  const auto psi = cmv::prepare(WavePacket{0, 30.0, 1.0}, w);
  for (long m : {1L, 7L, 150L}) {
    const auto forward = cmv::evolve(u, psi, m);
    CHECK(std::abs(norm(forward) - 1.0) <= 1e-12);
    const auto back = cmv::evolve(u, forward, -m);
    double gap = 0.0;
    for (std::size_t i = 0; i < psi.size(); ++i) gap = std::max(gap, std::abs(back[i] - psi[i]));
    CHECK(gap <= 1e-10);
  }
}

TEST_CASE("norm drift over ten thousand steps") {
  // Undamped strong disorder localizes the packet, so the edges are never reached.
  const CoefficientSequence s(cmv::RandomDecayParams{4, 0.0, 0.9});
  const Window w(-1500, 1500);
  const auto u = cmv::truncate(s, w);
  const auto psi = cmv::evolve(u, cmv::prepare(WavePacket{0, 40.0, M_PI / 2}, w), 10000);
  CHECK(std::abs(norm(psi) - 1.0) <= 1e-9);
}

TEST_CASE("edge contact is reported") {
  const Window w(-300, 300);
  const auto u = cmv::truncate(CoefficientSequence::free(), w);
  const auto psi = cmv::prepare(WavePacket{0, 20.0, M_PI / 2}, w);
  try {
    cmv::evolve(u, psi, 400);
    FAIL("expected edge contact");
  } catch (const cmv::Error& e) {
    CHECK(e.kind() == cmv::ErrorKind::EdgeContact);
  }
}

TEST_CASE("free packet crosses ballistically") {
  const Window w(-1024, 1024);
  const auto u = cmv::truncate(CoefficientSequence::free(), w);
  auto psi = cmv::prepare(WavePacket{-200, 40.0, M_PI / 2}, w);
  long crossing = -1;
  for (long m = 0; m <= 400 && crossing < 0; ++m) {
    if (cmv::mass_split(w, psi, 0).right >= 0.5) crossing = m;
    psi = cmv::evolve(u, psi, 1);
  }
  CHECK(crossing == 100);
}

TEST_CASE("probe partitions the mass") {
  const auto probe = cmv::reflection_probe(CoefficientSequence::single_barrier(0, 0.6), 0, WavePacket{}, 500,
                                           Window(-1024, 1024), 10);
  REQUIRE(!probe.series.empty());
  for (const auto& step : probe.series) {
    CHECK(std::abs(step.left_mass + step.right_mass + step.escaped - 1.0) <= 1e-10);
  }
  CHECK(probe.series.front().step == 0);
  CHECK(probe.steps == 500);
  CHECK_FALSE(probe.edge_contact);
}

TEST_CASE("free probe transmits and the barrier reflects") {
  const auto free = cmv::reflection_probe(CoefficientSequence::free(), 0, WavePacket{}, 6000, Window(-2048, 2048), 100);
  CHECK(free.left_mass <= 1e-3);

  const auto barrier = CoefficientSequence::single_barrier(0, 0.9);
  const auto small = cmv::reflection_probe(barrier, 0, WavePacket{}, 6000, Window(-2048, 2048), 100);
  const auto large = cmv::reflection_probe(barrier, 0, WavePacket{}, 6000, Window(-4096, 4096), 100);
  CHECK(small.left_mass > 0.5);
  CHECK(std::abs(large.left_mass - small.left_mass) <= 0.1 * small.left_mass);
  CHECK(free.left_mass < small.left_mass);
}

TEST_CASE("probe requires a left-concentrated packet") {
  CHECK_THROWS_AS(cmv::reflection_probe(CoefficientSequence::free(), 0, WavePacket{100, 20.0, M_PI / 2}, 10,
                                        Window(-1024, 1024)),
                  cmv::Error);
}
