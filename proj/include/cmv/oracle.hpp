#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cmv/dynamics.hpp"

namespace cmv {

inline constexpr std::size_t kOracleMaxSites = 512;

Eigen::MatrixXcd to_dense(const BandedUnitary& u);

/// (U - z)^{-1} for the truncation by dense LU. Throws Error(InvalidArgument)
/// above kOracleMaxSites and Error(NearSpectrum) when U - z is numerically singular.
Eigen::MatrixXcd dense_green(const CoefficientSequence& seq, const Window& window, cplx z);

struct FiniteTimeOptions {
  WavePacket left{-60, 10.0, 1.5707963267948966};  // centre is relative to n
  WavePacket right{60, 10.0, 1.5707963267948966};  // centre is relative to n
};

/// Abel-summed time-domain estimate of <f_a, (s - 1) f_b> for a, b in {l, r}:
///   -sum_{|k| <= m_max, k < m_max} t^{|k|} <D C_n^{-k-1} f_a, C^{-k} W f_b>
/// with D = C - C_n and W = C^{m_max} C_n^{-m_max} on the truncation. Entry (0, 0) is l-l.
/// Throws Error(EdgeContact) if any propagated state reaches the window edge.
Eigen::Matrix2cd finite_time_scattering(const CoefficientSequence& seq, Site n, const Window& window, long m_max,
                                        double t, const FiniteTimeOptions& opts = {});

struct OracleComparison {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

/// Stationary-vs-brute-force comparisons on the 511-site window centred at n.
/// Relative gaps use max(|reference|, 1e-6) as the scale.
std::vector<OracleComparison> oracle_suite(const CoefficientSequence& seq, Site n, cplx z);

}  // namespace cmv
