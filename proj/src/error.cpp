#include "cmv/error.hpp"

namespace cmv {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::NearSpectrum: return "near-spectrum";
    case ErrorKind::NotConverged: return "not-converged";
    case ErrorKind::NegativeDensity: return "negative-density";
    case ErrorKind::MoebiusPole: return "moebius-pole";
    case ErrorKind::WronskianDegenerate: return "wronskian-degenerate";
    case ErrorKind::MDenominatorDegenerate: return "m-denominator-degenerate";
    case ErrorKind::PropagationOverflow: return "propagation-overflow";
    case ErrorKind::EdgeContact: return "edge-contact";
    case ErrorKind::ConfigSchema: return "config-schema";
  }
  return "unknown";
}

}  // namespace cmv
