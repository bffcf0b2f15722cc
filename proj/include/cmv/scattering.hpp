#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cmv/banded_solver.hpp"
#include "cmv/error.hpp"
#include "cmv/resolvent.hpp"

namespace cmv {

struct ScatteringOptions {
  RadialSchedule schedule;
  SolverOptions solver;
  /// A channel is active where its density exceeds this.
  double support_threshold = 1e-3;
};

/// Boundary values at e^{i theta} of everything the 2x2 matrix is built from.
struct BoundaryData {
  /// <(C - z)^{-1} (C - C_n) delta_p, (C - C_n)^* delta_q> for the four (p, q)
  /// pairs of the parity branch, in the order ll, lr, rl, rr.
  std::array<BoundaryValue, 4> inner;
  BoundaryValue m_left;   // m^{(l)}_{n-1}
  BoundaryValue m_right;  // m^{(r)}_n
  /// Largest relative change seen under window doubling at any radius.
  double window_change = 0.0;
  Site half_width = 0;
};

struct DiagonalPair {
  cplx s_ll;
  cplx s_rr;
  double err_ll = 0.0;
  double err_rr = 0.0;
};

struct ScatteringSample {
  double theta = 0.0;
  Site n = 0;
  Eigen::Matrix2cd s = Eigen::Matrix2cd::Zero();  // [[s_ll, s_lr], [s_rl, s_rr]]
  Eigen::Matrix2d s_err = Eigen::Matrix2d::Zero();
  double density_l = 0.0;
  double density_r = 0.0;
  bool support_l = false;
  bool support_r = false;
  /// ||s^* s - I|| restricted to the active channels.
  double unitarity_defect = 0.0;
  double refl_residual = 0.0;
  double refl_err = 0.0;
  bool converged_l = false;
  bool converged_r = false;
  bool converged = false;
  /// Diagonals recomputed from the m boundary values alone; empty if degenerate.
  std::optional<DiagonalPair> proposition;
  /// Set when the sample could not be computed; all numbers are then void.
  std::optional<ErrorKind> error;
  std::string message;

  bool two_channel() const { return support_l && support_r; }
  bool usable() const { return !error && converged; }
};

/// Per-theta evaluator for one (sequence, n) pair. Immutable after
/// construction; sample() may be called concurrently.
class ScatteringEngine {
 public:
  ScatteringEngine(CoefficientSequence seq, Site n, ScatteringOptions opts = {});

  const CoefficientSequence& sequence() const noexcept { return seq_; }
  Site site() const noexcept { return n_; }
  const ScatteringOptions& options() const noexcept { return opts_; }
  const DefectOperator& defect_operator() const noexcept { return defect_; }

  /// The four defect pairs (p, q) of the parity branch, in order ll, lr, rl, rr.
  std::array<std::pair<Site, Site>, 4> inner_pairs() const;

  /// Inner products and m-values at a single z, |z| != 1, on [n - L, n + L].
  struct PointData {
    std::array<cplx, 4> inner;
    cplx m_left;
    cplx m_right;
  };
  PointData at(cplx z, Site half_width) const;
  /// at() with the half-width doubled until every value is stable.
  PointData stabilized(cplx z, double* change = nullptr, Site* half_width = nullptr) const;

  BoundaryData boundary(double theta) const;

  /// Never throws for numerical failures; they land in sample.error.
  ScatteringSample sample(double theta) const;

 private:
  CoefficientSequence seq_;
  CoefficientSequence decoupled_;
  Site n_;
  ScatteringOptions opts_;
  DefectOperator defect_;
  std::shared_ptr<const CoefficientTable> table_;
};

/// Entries of the 2x2 matrix from boundary inputs. dl = -Re m_left and
/// dr = Re m_right are clamped at zero.
Eigen::Matrix2cd assemble_scattering(const CoefficientSequence& seq, Site n, const std::array<cplx, 4>& inner,
                                     cplx m_left, cplx m_right);

ScatteringSample scattering_matrix(const CoefficientSequence& seq, Site n, double theta,
                                   const ScatteringOptions& opts = {});

/// Diagonal entries from M^{(l/r)}_n and hat-M^{(l/r)}_{n-1}, given m^{(l)}_{n-1}
/// and m^{(r)}_n. Throws Error(MDenominatorDegenerate) below 1e-12.
DiagonalPair diagonal_from_m(cplx alpha_n, cplx m_left, cplx m_right);

DiagonalPair diagonal_via_M(const CoefficientSequence& seq, Site n, double theta, const ScatteringOptions& opts = {});

/// |M^{(l)}_n + conj M^{(r)}_n| from m^{(l)}_{n-1} and m^{(r)}_n.
double reflectionless_residual_from_m(cplx alpha_n, cplx m_left, cplx m_right);

BoundaryValue reflectionless_residual(const CoefficientSequence& seq, Site n, double theta,
                                      const ScatteringOptions& opts = {});

enum class Classification { OffDiagonal, Diagonal, Ambiguous, NotConverged, Excluded };
const char* to_string(Classification c) noexcept;

struct ThetaVerdict {
  double theta = 0.0;
  Classification by_matrix = Classification::Excluded;
  Classification by_residual = Classification::Excluded;
};

struct OffDiagonalityReport {
  std::vector<ScatteringSample> samples;
  std::vector<ThetaVerdict> verdicts;
  std::size_t converged = 0;
  std::size_t off_diagonal = 0;
  std::size_t ambiguous = 0;
  /// Samples where both classifications are decided and coincide.
  std::size_t agree = 0;
  std::size_t decided = 0;

  double off_diagonal_fraction() const { return converged ? double(off_diagonal) / double(converged) : 0.0; }
  double agreement_fraction() const { return decided ? double(agree) / double(decided) : 1.0; }
};

/// Classification of one sample against tol. Ambiguous when some error bar straddles tol.
ThetaVerdict classify(const ScatteringSample& s, double tol);

OffDiagonalityReport off_diagonality_report(const CoefficientSequence& seq, Site n,
                                            const std::vector<double>& theta_grid, double tol,
                                            const ScatteringOptions& opts = {}, unsigned workers = 1);

/// theta_j = 2 pi (j + offset) / count.
std::vector<double> theta_grid(std::size_t count, double offset = 0.5);

}  // namespace cmv
