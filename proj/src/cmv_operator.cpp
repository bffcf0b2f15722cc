#include "cmv/cmv_operator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cmv/error.hpp"

namespace cmv {

Window::Window(Site a, Site b) : a_(a), b_(b) {
  if (b - a < kMinSpan) {
    fail(ErrorKind::InvalidArgument,
         "window [" + std::to_string(a) + ", " + std::to_string(b) + "] is shorter than the minimum span 8");
  }
}

BandedUnitary::BandedUnitary(Window window, std::vector<cplx> band, std::vector<Site> decoupled_sites)
    : window_(window), band_(std::move(band)), decoupled_(std::move(decoupled_sites)) {
  if (band_.size() != window_.size() * kBandWidth) {
    fail(ErrorKind::InvalidArgument, "band storage does not match the window size");
  }
}

cplx BandedUnitary::at(Site i, Site j) const noexcept {
  const Site d = j - i;
  if (d < -kHalfBand || d > kHalfBand || !window_.contains(i) || !window_.contains(j)) return {};
  return band_[window_.offset(i) * kBandWidth + static_cast<std::size_t>(d + kHalfBand)];
}

void BandedUnitary::apply(std::span<const cplx> in, std::span<cplx> out) const {
  const auto n = static_cast<std::ptrdiff_t>(size());
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    cplx acc{};
    const cplx* row = &band_[static_cast<std::size_t>(i) * kBandWidth];
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, i - kHalfBand);
    const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(n - 1, i + kHalfBand);
    for (std::ptrdiff_t j = lo; j <= hi; ++j) acc += row[j - i + kHalfBand] * in[static_cast<std::size_t>(j)];
    out[static_cast<std::size_t>(i)] = acc;
  }
}

void BandedUnitary::apply_adjoint(std::span<const cplx> in, std::span<cplx> out) const {
  const auto n = static_cast<std::ptrdiff_t>(size());
  std::fill(out.begin(), out.end(), cplx{});
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const cplx* row = &band_[static_cast<std::size_t>(i) * kBandWidth];
    const cplx xi = in[static_cast<std::size_t>(i)];
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, i - kHalfBand);
    const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(n - 1, i + kHalfBand);
    for (std::ptrdiff_t j = lo; j <= hi; ++j) out[static_cast<std::size_t>(j)] += std::conj(row[j - i + kHalfBand]) * xi;
  }
}

double BandedUnitary::unitarity_defect() const {
  // (U^* U)_{ij} = sum_k conj(U_ki) U_kj, nonzero only for |i - j| <= 4.
  double worst = 0.0;
  const Site a = window_.a(), b = window_.b();
  for (Site i = a; i <= b; ++i) {
    for (Site j = std::max(a, i - 4); j <= std::min(b, i + 4); ++j) {
      cplx acc{};
      for (Site k = std::max(a, std::max(i, j) - 2); k <= std::min(b, std::min(i, j) + 2); ++k) {
        acc += std::conj(at(k, i)) * at(k, j);
      }
      if (i == j) acc -= 1.0;
      worst = std::max(worst, std::abs(acc));
    }
  }
  return worst;
}

BandedUnitary truncate(const CoefficientSequence& seq, const Window& window) {
  const CoefficientSequence cut = seq.decoupled_at(window.a()).decoupled_at(window.b() + 1);
  std::vector<cplx> band(window.size() * BandedUnitary::kBandWidth);
  for (Site i = window.a(); i <= window.b(); ++i) {
    for (int d = -BandedUnitary::kHalfBand; d <= BandedUnitary::kHalfBand; ++d) {
      const Site j = i + d;
      if (!window.contains(j)) continue;
      band[window.offset(i) * BandedUnitary::kBandWidth + static_cast<std::size_t>(d + BandedUnitary::kHalfBand)] =
          entry(cut, i, j);
    }
  }
  return BandedUnitary(window, std::move(band), cut.decoupled_sites());
}

DefectOperator::DefectOperator(Site n, std::vector<Entry> entries) : n_(n), entries_(std::move(entries)) {}

SparseVector DefectOperator::column(Site j) const {
  SparseVector out;
  for (const auto& e : entries_) {
    if (e.col == j) out.emplace_back(e.row, e.value);
  }
  return out;
}

SparseVector DefectOperator::adjoint_column(Site i) const {
  SparseVector out;
  for (const auto& e : entries_) {
    if (e.row == i) out.emplace_back(e.col, std::conj(e.value));
  }
  return out;
}

std::vector<Site> DefectOperator::range_sites() const {
  std::vector<Site> out;
  for (const auto& e : entries_) out.push_back(e.row);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<Site> DefectOperator::domain_sites() const {
  std::vector<Site> out;
  for (const auto& e : entries_) out.push_back(e.col);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

void DefectOperator::apply_add(const Window& window, std::span<const cplx> in, std::span<cplx> out) const {
  for (const auto& e : entries_) {
    if (window.contains(e.row) && window.contains(e.col)) {
      out[window.offset(e.row)] += e.value * in[window.offset(e.col)];
    }
  }
}

DefectOperator defect(const CoefficientSequence& seq, Site n) {
  const CoefficientSequence cut = seq.decoupled_at(n);
  std::vector<DefectOperator::Entry> entries;
  // Every entry carrying alpha_n or rho_n sits in rows/cols n-2..n+1.
  for (Site i = n - 4; i <= n + 4; ++i) {
    for (Site j = i - 2; j <= i + 2; ++j) {
      const cplx d = entry(seq, i, j) - entry(cut, i, j);
      if (d != cplx{}) entries.push_back({i, j, d});
    }
  }
  return DefectOperator(n, std::move(entries));
}

}  // namespace cmv
