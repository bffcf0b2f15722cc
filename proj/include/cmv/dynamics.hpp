#pragma once

#include <span>
#include <vector>

#include "cmv/cmv_operator.hpp"

namespace cmv {

/// Gaussian envelope on the even sublattice with phase e^{-i theta0 k / 2}.
/// Even sites carry the right-moving channel of the free operator.
struct WavePacket {
  Site center = -400;
  double width = 40.0;
  double theta0 = 1.5707963267948966;
};

/// Sites within this distance of either window end form the edge zone.
inline constexpr Site kEdgeZone = 3;
/// Edge-zone mass beyond which evolution is considered unreliable.
inline constexpr double kEdgeMassLimit = 1e-6;

/// Unit-norm samples of the packet on the window. Throws Error(InvalidArgument)
/// if the mass that falls in the edge zone before normalization exceeds 1e-10.
std::vector<cplx> prepare(const WavePacket& packet, const Window& window);

struct MassSplit {
  double left = 0.0;     // sites < n outside the edge zone
  double right = 0.0;    // sites >= n outside the edge zone
  double escaped = 0.0;  // edge zone
};

MassSplit mass_split(const Window& window, std::span<const cplx> psi, Site n);

/// U^m psi; negative m applies U^*. Throws Error(EdgeContact) at the first step
/// whose edge-zone mass exceeds kEdgeMassLimit.
std::vector<cplx> evolve(const BandedUnitary& u, std::vector<cplx> psi, long m);

struct ProbeStep {
  long step = 0;
  double left_mass = 0.0;
  double right_mass = 0.0;
  double escaped = 0.0;
};

struct ProbeResult {
  double left_mass = 0.0;
  double right_mass = 0.0;
  double escaped = 0.0;
  /// Steps actually taken; less than the horizon after edge contact.
  long steps = 0;
  bool edge_contact = false;
  std::vector<ProbeStep> series;
};

/// Evolves the packet under the truncation of seq to window and splits the mass
/// about n. Stops early at edge contact and reports the last reliable step.
/// Throws Error(InvalidArgument) unless the packet starts with right mass < 1e-6.
ProbeResult reflection_probe(const CoefficientSequence& seq, Site n, const WavePacket& packet, long horizon,
                             const Window& window, long stride = 1);

}  // namespace cmv
