#pragma once

#include <span>
#include <utility>
#include <vector>

#include "cmv/coefficients.hpp"

namespace cmv {

/// Finite section [a, b] of Z. Sites keep their absolute labels, so the parity
/// of every index is the parity of the full-line operator.
class Window {
 public:
  static constexpr Site kMinSpan = 8;

  /// Throws Error(InvalidArgument) unless b - a >= kMinSpan.
  Window(Site a, Site b);

  Site a() const noexcept { return a_; }
  Site b() const noexcept { return b_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(b_ - a_ + 1); }
  bool contains(Site k) const noexcept { return a_ <= k && k <= b_; }
  bool left_edge_even() const noexcept { return a_ % 2 == 0; }
  bool right_edge_even() const noexcept { return b_ % 2 == 0; }
  std::size_t offset(Site k) const noexcept { return static_cast<std::size_t>(k - a_); }

  /// [c - h, c + h]
  static Window centered(Site c, Site h) { return Window(c - h, c + h); }

  friend bool operator==(const Window&, const Window&) = default;

 private:
  Site a_;
  Site b_;
};

/// <delta_i, C delta_j> for any coefficient source exposing alpha(k) and rho(k).
/// Odd and even rows follow different patterns; the k-th diagonal entry is
/// -conj(alpha_k) alpha_{k+1}. Zero whenever |i - j| > 2.
template <class Coefficients>
cplx entry_from(const Coefficients& c, Site i, Site j) {
  const Site d = j - i;
  if (i % 2 != 0) {
    switch (d) {
      case -1: return -c.alpha(i + 1) * c.rho(i);
      case 0: return -std::conj(c.alpha(i)) * c.alpha(i + 1);
      case 1: return -c.alpha(i + 2) * c.rho(i + 1);
      case 2: return c.rho(i + 1) * c.rho(i + 2);
      default: return {};
    }
  }
  switch (d) {
    case -2: return c.rho(i - 1) * c.rho(i);
    case -1: return std::conj(c.alpha(i - 1)) * c.rho(i);
    case 0: return -std::conj(c.alpha(i)) * c.alpha(i + 1);
    case 1: return std::conj(c.alpha(i)) * c.rho(i + 1);
    default: return {};
  }
}

inline cplx entry(const CoefficientSequence& seq, Site i, Site j) { return entry_from(seq, i, j); }

/// Five-diagonal block of a CMV operator over a window. Band slot d = j - i + 2.
class BandedUnitary {
 public:
  static constexpr int kHalfBand = 2;
  static constexpr int kBandWidth = 2 * kHalfBand + 1;

  BandedUnitary(Window window, std::vector<cplx> band, std::vector<Site> decoupled_sites);

  const Window& window() const noexcept { return window_; }
  std::size_t size() const noexcept { return window_.size(); }
  const std::vector<Site>& decoupled_sites() const noexcept { return decoupled_; }

  /// Entry at absolute sites (i, j); zero outside the band or the window.
  cplx at(Site i, Site j) const noexcept;

  /// out = U in. Both spans are indexed by window offset.
  void apply(std::span<const cplx> in, std::span<cplx> out) const;
  /// out = U^* in.
  void apply_adjoint(std::span<const cplx> in, std::span<cplx> out) const;

  /// max |(U^* U - I)_{ij}|.
  double unitarity_defect() const;

 private:
  Window window_;
  std::vector<cplx> band_;
  std::vector<Site> decoupled_;
};

/// Block [a, b] of the operator of seq with extra decouplings alpha_a := 1 and
/// alpha_{b+1} := 1, which makes the block an exact direct summand and hence unitary.
BandedUnitary truncate(const CoefficientSequence& seq, const Window& window);

using SparseVector = std::vector<std::pair<Site, cplx>>;

/// C - C_n, the finite-rank difference between the coupled operator and the
/// operator decoupled at n.
class DefectOperator {
 public:
  struct Entry {
    Site row;
    Site col;
    cplx value;
  };

  DefectOperator(Site n, std::vector<Entry> entries);

  Site site() const noexcept { return n_; }
  const std::vector<Entry>& entries() const noexcept { return entries_; }

  /// (C - C_n) delta_j
  SparseVector column(Site j) const;
  /// (C - C_n)^* delta_i
  SparseVector adjoint_column(Site i) const;

  /// Sorted sites i with a nonzero row.
  std::vector<Site> range_sites() const;
  /// Sorted sites j with a nonzero column.
  std::vector<Site> domain_sites() const;

  /// out += (C - C_n) in over the given window (window-offset indexing).
  void apply_add(const Window& window, std::span<const cplx> in, std::span<cplx> out) const;

 private:
  Site n_;
  std::vector<Entry> entries_;
};

DefectOperator defect(const CoefficientSequence& seq, Site n);

}  // namespace cmv
