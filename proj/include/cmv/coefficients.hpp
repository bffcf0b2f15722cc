#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <variant>
#include <vector>

namespace cmv {

using cplx = std::complex<double>;
using Site = std::int64_t;

enum class SequenceKind { Free, Constant, SingleBarrier, RandomDecay, Periodic, Explicit };

struct FreeParams {};

struct ConstantParams {
  cplx value;
};

struct BarrierParams {
  Site site = 0;
  cplx value;
};

/// alpha_k = amplitude * exp(-rate |k|) * w_k, with w_k uniform in the open unit
/// disc drawn from SplitMix64 keyed on (seed, k). Counter-based, so alpha_k does
/// not depend on evaluation order.
struct RandomDecayParams {
  std::uint64_t seed = 1;
  double rate = 0.5;
  double amplitude = 0.5;
};

struct PeriodicParams {
  std::vector<cplx> period;  // alpha_k = period[k mod p]
};

struct ExplicitParams {
  std::map<Site, cplx> values;
  cplx tail;  // alpha_k for every k not in values
};

using SequenceParams =
    std::variant<FreeParams, ConstantParams, BarrierParams, RandomDecayParams, PeriodicParams, ExplicitParams>;

/// Verblunsky coefficients {alpha_k}_{k in Z}. Immutable after construction.
///
/// A sequence may carry decoupling marks: at a marked site alpha = 1 and rho = 0.
/// Such sequences sit outside the open-disc invariant on purpose and are only
/// meaningful as operator input.
class CoefficientSequence {
 public:
  /// Throws Error(InvalidArgument) if any parameter has modulus >= 1.
  explicit CoefficientSequence(SequenceParams params);

  static CoefficientSequence free() { return CoefficientSequence(FreeParams{}); }
  static CoefficientSequence constant(cplx value) { return CoefficientSequence(ConstantParams{value}); }
  static CoefficientSequence single_barrier(Site site, cplx value) {
    return CoefficientSequence(BarrierParams{site, value});
  }
  static CoefficientSequence random_decay(std::uint64_t seed, double rate, double amplitude = 0.5) {
    return CoefficientSequence(RandomDecayParams{seed, rate, amplitude});
  }
  static CoefficientSequence periodic(std::vector<cplx> period) {
    return CoefficientSequence(PeriodicParams{std::move(period)});
  }
  static CoefficientSequence explicit_list(std::map<Site, cplx> values, cplx tail = {}) {
    return CoefficientSequence(ExplicitParams{std::move(values), tail});
  }

  cplx alpha(Site k) const;
  double rho(Site k) const;

  SequenceKind kind() const noexcept;
  const SequenceParams& params() const noexcept { return params_; }

  bool is_decoupled(Site k) const;
  bool has_decouplings() const noexcept { return !decoupled_.empty(); }
  /// Sorted, unique.
  const std::vector<Site>& decoupled_sites() const noexcept { return decoupled_; }

  /// Copy with alpha_n := 1 (rho_n := 0) and the site recorded as decoupled.
  CoefficientSequence decoupled_at(Site n) const;

  /// Largest |alpha_k| the generator can produce away from decoupled sites.
  double sup_modulus() const;

 private:
  cplx raw_alpha(Site k) const;

  SequenceParams params_;
  std::vector<Site> decoupled_;
};

inline cplx alpha_at(const CoefficientSequence& seq, Site k) { return seq.alpha(k); }
inline double rho_at(const CoefficientSequence& seq, Site k) { return seq.rho(k); }
inline CoefficientSequence decouple(const CoefficientSequence& seq, Site n) { return seq.decoupled_at(n); }

const char* to_string(SequenceKind kind) noexcept;

namespace detail {
/// SplitMix64 finalizer (Steele, Lea, Flood 2014).
std::uint64_t splitmix64(std::uint64_t x) noexcept;
/// Uniform double in [0, 1) from the top 53 bits.
double unit_double(std::uint64_t bits) noexcept;
}  // namespace detail

}  // namespace cmv
