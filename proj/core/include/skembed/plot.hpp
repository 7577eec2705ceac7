#pragma once

#include "skembed/costs.hpp"

#include <string>
#include <vector>

namespace skembed {

struct BarrierCells {
  std::vector<bool> reachable;
  std::vector<bool> stopped;  ///< positive stopped mass
  std::vector<bool> contact;
  Vec slack;                  ///< V - psi
};

/// Static SVG grid over (aux index, base state): stopped cells dark, other
/// contact cells mid-tone, continuation cells shaded by contact slack,
/// unreachable cells blank.
std::string barrier_svg(const AugmentedChain& aug, const BarrierCells& cells, const std::string& title);

}  // namespace skembed
