#include "cmv/oracle.hpp"

#include <cmath>
#include <string>

#include "cmv/error.hpp"
#include "cmv/resolvent.hpp"
#include "cmv/weyl.hpp"

namespace cmv {

Eigen::MatrixXcd to_dense(const BandedUnitary& u) {
  const auto n = static_cast<Eigen::Index>(u.size());
  const Site a = u.window().a();
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = std::max<Eigen::Index>(0, i - 2); j <= std::min<Eigen::Index>(n - 1, i + 2); ++j) {
      m(i, j) = u.at(a + i, a + j);
    }
  }
  return m;
}

Eigen::MatrixXcd dense_green(const CoefficientSequence& seq, const Window& window, cplx z) {
  if (window.size() > kOracleMaxSites) {
    fail(ErrorKind::InvalidArgument, "dense oracle is limited to " + std::to_string(kOracleMaxSites) + " sites");
  }
  Eigen::MatrixXcd a = to_dense(truncate(seq, window));
  a.diagonal().array() -= z;
  const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(a);
  if (!(lu.rcond() > 1e-14)) fail(ErrorKind::NearSpectrum, "dense U - z is numerically singular");
  return lu.inverse();
}

namespace {

/// Entries below this are compared absolutely at this scale.
constexpr double kTiny = 1e-6;

double edge_mass(const std::vector<cplx>& psi) {
  double m = 0.0;
  for (std::size_t i = 0; i < static_cast<std::size_t>(kEdgeZone); ++i) {
    m += std::norm(psi[i]) + std::norm(psi[psi.size() - 1 - i]);
  }
  return m;
}

/// psi <- U^m psi (U^* for negative m) with the edge check after every step.
void step(const BandedUnitary& u, std::vector<cplx>& psi, long m) {
  std::vector<cplx> next(psi.size());
  for (long s = 0; s < std::labs(m); ++s) {
    if (m > 0) {
      u.apply(psi, next);
    } else {
      u.apply_adjoint(psi, next);
    }
    psi.swap(next);
    if (edge_mass(psi) > kEdgeMassLimit) {
      fail(ErrorKind::EdgeContact, "finite-time propagation reached the window edge");
    }
  }
}

cplx dot(const std::vector<cplx>& x, const std::vector<cplx>& y) {
  cplx acc{};
  for (std::size_t i = 0; i < x.size(); ++i) acc += std::conj(x[i]) * y[i];
  return acc;
}

}  // namespace

Eigen::Matrix2cd finite_time_scattering(const CoefficientSequence& seq, Site n, const Window& window, long m_max,
                                        double t, const FiniteTimeOptions& opts) {
  if (m_max < 1) fail(ErrorKind::InvalidArgument, "m_max must be positive");
  if (!(t >= 0.0 && t <= 1.0)) fail(ErrorKind::InvalidArgument, "Abel parameter must lie in [0, 1]");
  const BandedUnitary c = truncate(seq, window);
  const BandedUnitary cn = truncate(seq.decoupled_at(n), window);
  const DefectOperator d = defect(seq, n);

  const auto packet = [&](WavePacket p) {
    p.center += n;
    return prepare(p, window);
  };
  const std::array<std::vector<cplx>, 2> f = {packet(opts.left), packet(opts.right)};

  // b holds C^{-k} W f_b, starting at k = -m_max.
  std::array<std::vector<cplx>, 2> b = f;
  for (auto& v : b) {
    step(cn, v, -m_max);
    step(c, v, 2 * m_max);
  }
  // a holds C_n^{-k-1} f_a, starting at k = -m_max.
  std::array<std::vector<cplx>, 2> a = f;
  for (auto& v : a) step(cn, v, m_max - 1);

  Eigen::Matrix2cd out = Eigen::Matrix2cd::Zero();
  std::vector<cplx> da(window.size());
  for (long k = -m_max; k < m_max; ++k) {
    const double weight = std::pow(t, static_cast<double>(std::labs(k)));
    if (weight != 0.0) {
      for (int i = 0; i < 2; ++i) {
        std::fill(da.begin(), da.end(), cplx{});
        d.apply_add(window, a[static_cast<std::size_t>(i)], da);
        for (int j = 0; j < 2; ++j) out(i, j) -= weight * dot(da, b[static_cast<std::size_t>(j)]);
      }
    }
    for (auto& v : a) step(cn, v, -1);
    for (auto& v : b) step(c, v, -1);
  }
  return out;
}

std::vector<OracleComparison> oracle_suite(const CoefficientSequence& seq, Site n, cplx z) {
  std::vector<OracleComparison> out;
  const auto add = [&](std::string name, double value, double tol) {
    out.push_back({std::move(name), value, tol, value <= tol});
  };
  const Window w(n - 255, n + 255);
  const BandedUnitary u = truncate(seq, w);
  const Eigen::MatrixXcd dense_u = to_dense(u);
  const auto size = dense_u.rows();

  add("truncation unitarity", (dense_u.adjoint() * dense_u - Eigen::MatrixXcd::Identity(size, size)).cwiseAbs().maxCoeff(),
      1e-12);

  const Eigen::MatrixXcd g = dense_green(seq, w, z);
  Eigen::MatrixXcd shifted = dense_u;
  shifted.diagonal().array() -= z;
  add("dense resolvent identity", (shifted * g - Eigen::MatrixXcd::Identity(size, size)).cwiseAbs().maxCoeff(), 1e-10);
  add("dense resolvent at zero is the adjoint", (dense_green(seq, w, cplx{}) - dense_u.adjoint()).cwiseAbs().maxCoeff(),
      1e-13);

  double banded = 0.0;
  for (Site j : {n - 2, n, n + 1}) {
    for (Site i = j - 6; i <= j + 6; ++i) {
      const cplx ref = g(static_cast<Eigen::Index>(w.offset(i)), static_cast<Eigen::Index>(w.offset(j)));
      const cplx val = green_truncated(seq, w, i, j, z);
      banded = std::max(banded, std::abs(val - ref) / std::max(std::abs(ref), kTiny));
    }
  }
  add("banded green vs dense", banded, 1e-10);

  double weyl_gap = 0.0;
  for (Variant v : {Variant::Plain, Variant::Hat}) {
    for (Site k : {n - 1, n, n + 1}) {
      for (Site kp : {n - 1, n, n + 2}) {
        const cplx ref = g(static_cast<Eigen::Index>(w.offset(k)), static_cast<Eigen::Index>(w.offset(kp)));
        const cplx val = green_weyl(seq, k, kp, z, n, v);
        weyl_gap = std::max(weyl_gap, std::abs(val - ref) / std::max(std::abs(ref), kTiny));
      }
    }
  }
  add("Weyl-solution green vs dense", weyl_gap, 1e-8);

  add("m-function normalisation at zero",
      std::max(std::abs(m_function(seq, Side::Left, n, cplx{}) + 1.0), std::abs(m_function(seq, Side::Right, n, cplx{}) - 1.0)),
      1e-12);
  return out;
}

}  // namespace cmv
