#include "cmv/dynamics.hpp"

#include <cmath>
#include <string>

#include "cmv/error.hpp"

namespace cmv {

namespace {

double edge_mass(std::span<const cplx> psi) {
  double m = 0.0;
  const std::size_t n = psi.size();
  for (std::size_t i = 0; i < static_cast<std::size_t>(kEdgeZone) && i < n; ++i) {
    m += std::norm(psi[i]) + std::norm(psi[n - 1 - i]);
  }
  return m;
}

}  // namespace

std::vector<cplx> prepare(const WavePacket& packet, const Window& window) {
  if (!(packet.width > 0.0)) fail(ErrorKind::InvalidArgument, "packet width must be positive");
  std::vector<cplx> psi(window.size());
  double norm = 0.0;
  for (Site k = window.a(); k <= window.b(); ++k) {
    if (k % 2 != 0) continue;
    const double x = static_cast<double>(k - packet.center) / packet.width;
    const cplx v = std::exp(-0.5 * x * x) * std::polar(1.0, -0.5 * packet.theta0 * static_cast<double>(k));
    psi[window.offset(k)] = v;
    norm += std::norm(v);
  }
  if (!(norm > 0.0)) fail(ErrorKind::InvalidArgument, "packet has no mass inside the window");
  if (edge_mass(psi) > 1e-10 * norm) {
    fail(ErrorKind::InvalidArgument, "packet tail reaches the window edge");
  }
  const double s = 1.0 / std::sqrt(norm);
  for (auto& v : psi) v *= s;
  return psi;
}

MassSplit mass_split(const Window& window, std::span<const cplx> psi, Site n) {
  MassSplit out;
  for (Site k = window.a(); k <= window.b(); ++k) {
    const double m = std::norm(psi[window.offset(k)]);
    if (k < window.a() + kEdgeZone || k > window.b() - kEdgeZone) {
      out.escaped += m;
    } else if (k < n) {
      out.left += m;
    } else {
      out.right += m;
    }
  }
  return out;
}

std::vector<cplx> evolve(const BandedUnitary& u, std::vector<cplx> psi, long m) {
  if (psi.size() != u.size()) fail(ErrorKind::InvalidArgument, "state length does not match the window");
  std::vector<cplx> next(psi.size());
  const long steps = std::labs(m);
  for (long s = 0; s < steps; ++s) {
    if (m > 0) {
      u.apply(psi, next);
    } else {
      u.apply_adjoint(psi, next);
    }
    psi.swap(next);
    if (edge_mass(psi) > kEdgeMassLimit) {
      fail(ErrorKind::EdgeContact, "mass reached the window edge after " + std::to_string(s + 1) + " steps");
    }
  }
  return psi;
}

ProbeResult reflection_probe(const CoefficientSequence& seq, Site n, const WavePacket& packet, long horizon,
                             const Window& window, long stride) {
  if (horizon < 0) fail(ErrorKind::InvalidArgument, "horizon must be non-negative");
  if (stride < 1) fail(ErrorKind::InvalidArgument, "stride must be positive");
  const BandedUnitary u = truncate(seq, window);
  std::vector<cplx> psi = prepare(packet, window);
  const MassSplit start = mass_split(window, psi, n);
  if (start.right >= 1e-6) fail(ErrorKind::InvalidArgument, "packet is not concentrated left of the decoupling site");

  ProbeResult out;
  const auto record = [&](long step, const MassSplit& m) {
    out.series.push_back({step, m.left, m.right, m.escaped});
  };
  record(0, start);
  MassSplit last = start;
  std::vector<cplx> next(psi.size());
  for (long step = 1; step <= horizon; ++step) {
    u.apply(psi, next);
    if (edge_mass(next) > kEdgeMassLimit) {
      out.edge_contact = true;
      break;
    }
    psi.swap(next);
    last = mass_split(window, psi, n);
    out.steps = step;
    if (step % stride == 0) record(step, last);
  }
  if (out.series.back().step != out.steps) record(out.steps, last);
  out.left_mass = last.left;
  out.right_mass = last.right;
  out.escaped = last.escaped;
  return out;
}

}  // namespace cmv
