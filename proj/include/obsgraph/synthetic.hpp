#pragma once

#include "obsgraph/system.hpp"

#include <cstdint>

namespace obsgraph {

/// Graph-only system made of directed cycles of 3 to 6 states (lengths drawn
/// from `seed`), each cycle linked to the next by one edge, so the first
/// cycle is the only root SCC. One output measures state s0. Cycles are added
/// until the edge count reaches `min_edges`.
[[nodiscard]] DynSystem chain_of_cycles(std::size_t min_edges, std::uint64_t seed = 42);

} // namespace obsgraph
