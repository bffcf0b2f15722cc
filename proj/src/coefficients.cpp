#include "cmv/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "cmv/error.hpp"

namespace cmv {

namespace detail {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double unit_double(std::uint64_t bits) noexcept { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

}  // namespace detail

namespace {

void require_in_disc(cplx a, const std::string& what) {
  if (!(std::abs(a) < 1.0)) {
    fail(ErrorKind::InvalidArgument, what + " has modulus " + std::to_string(std::abs(a)) + " >= 1");
  }
}

Site floor_mod(Site k, Site p) {
  Site r = k % p;
  return r < 0 ? r + p : r;
}

}  // namespace

CoefficientSequence::CoefficientSequence(SequenceParams params) : params_(std::move(params)) {
  std::visit(
      [](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, ConstantParams>) {
          require_in_disc(p.value, "constant value");
        } else if constexpr (std::is_same_v<P, BarrierParams>) {
          require_in_disc(p.value, "barrier value at site " + std::to_string(p.site));
        } else if constexpr (std::is_same_v<P, RandomDecayParams>) {
          if (!(p.rate >= 0.0) || !std::isfinite(p.rate)) {
            fail(ErrorKind::InvalidArgument, "random_decay rate must be finite and >= 0");
          }
          if (!(p.amplitude >= 0.0 && p.amplitude < 1.0)) {
            fail(ErrorKind::InvalidArgument, "random_decay amplitude must lie in [0, 1)");
          }
        } else if constexpr (std::is_same_v<P, PeriodicParams>) {
          if (p.period.empty()) fail(ErrorKind::InvalidArgument, "periodic sequence needs a non-empty period");
          for (std::size_t i = 0; i < p.period.size(); ++i) {
            require_in_disc(p.period[i], "periodic entry at index " + std::to_string(i));
          }
        } else if constexpr (std::is_same_v<P, ExplicitParams>) {
          for (const auto& [k, v] : p.values) require_in_disc(v, "explicit alpha at index " + std::to_string(k));
          require_in_disc(p.tail, "explicit tail value");
        }
      },
      params_);
}

cplx CoefficientSequence::raw_alpha(Site k) const {
  return std::visit(
      [k](const auto& p) -> cplx {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, FreeParams>) {
          return {};
        } else if constexpr (std::is_same_v<P, ConstantParams>) {
          return p.value;
        } else if constexpr (std::is_same_v<P, BarrierParams>) {
          return k == p.site ? p.value : cplx{};
        } else if constexpr (std::is_same_v<P, RandomDecayParams>) {
          const std::uint64_t key = detail::splitmix64(p.seed) ^ static_cast<std::uint64_t>(k);
          const std::uint64_t b1 = detail::splitmix64(key);
          const std::uint64_t b2 = detail::splitmix64(b1);
          const double radius = std::sqrt(detail::unit_double(b1));
          const double phase = 2.0 * std::numbers::pi * detail::unit_double(b2);
          const double scale = p.amplitude * std::exp(-p.rate * std::abs(static_cast<double>(k)));
          return std::polar(scale * radius, phase);
        } else if constexpr (std::is_same_v<P, PeriodicParams>) {
          return p.period[static_cast<std::size_t>(floor_mod(k, static_cast<Site>(p.period.size())))];
        } else {
          auto it = p.values.find(k);
          return it == p.values.end() ? p.tail : it->second;
        }
      },
      params_);
}

cplx CoefficientSequence::alpha(Site k) const {
  if (is_decoupled(k)) return {1.0, 0.0};
  return raw_alpha(k);
}

double CoefficientSequence::rho(Site k) const {
  if (is_decoupled(k)) return 0.0;
  return std::sqrt(1.0 - std::norm(raw_alpha(k)));
}

SequenceKind CoefficientSequence::kind() const noexcept { return static_cast<SequenceKind>(params_.index()); }

bool CoefficientSequence::is_decoupled(Site k) const {
  return !decoupled_.empty() && std::binary_search(decoupled_.begin(), decoupled_.end(), k);
}

CoefficientSequence CoefficientSequence::decoupled_at(Site n) const {
  CoefficientSequence out = *this;
  auto it = std::lower_bound(out.decoupled_.begin(), out.decoupled_.end(), n);
  if (it == out.decoupled_.end() || *it != n) out.decoupled_.insert(it, n);
  return out;
}

double CoefficientSequence::sup_modulus() const {
  return std::visit(
      [](const auto& p) -> double {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, FreeParams>) {
          return 0.0;
        } else if constexpr (std::is_same_v<P, ConstantParams> || std::is_same_v<P, BarrierParams>) {
          return std::abs(p.value);
        } else if constexpr (std::is_same_v<P, RandomDecayParams>) {
          return p.amplitude;
        } else if constexpr (std::is_same_v<P, PeriodicParams>) {
          double m = 0.0;
          for (auto v : p.period) m = std::max(m, std::abs(v));
          return m;
        } else {
          double m = std::abs(p.tail);
          for (const auto& [k, v] : p.values) m = std::max(m, std::abs(v));
          return m;
        }
      },
      params_);
}

const char* to_string(SequenceKind kind) noexcept {
  switch (kind) {
    case SequenceKind::Free: return "free";
    case SequenceKind::Constant: return "constant";
    case SequenceKind::SingleBarrier: return "single_barrier";
    case SequenceKind::RandomDecay: return "random_decay";
    case SequenceKind::Periodic: return "periodic";
    case SequenceKind::Explicit: return "explicit";
  }
  return "unknown";
}

}  // namespace cmv
