#pragma once

#include <cstdint>
#include <vector>

#include "fairswap/random.hpp"

namespace fairswap::topology {

using Graph = std::vector<std::vector<std::uint32_t>>;

/// Connected simple graph where every vertex has `degree` neighbours.
/// Requires degree < n and n * degree even. Throws InvalidConfig otherwise.
Graph random_regular(std::size_t n, std::size_t degree, Rng& rng);

/// Hop distance from the nearest source; unreachable vertices get SIZE_MAX.
std::vector<std::size_t> bfs_distances(const Graph& graph, const std::vector<std::uint32_t>& sources);

[[nodiscard]] bool connected(const Graph& graph);

/// Picks `count` vertices spread across the graph: each choice maximises the
/// hop distance to everything already chosen (`taken` included), ties broken
/// at random.
std::vector<std::uint32_t> spread_out(const Graph& graph, std::size_t count, const std::vector<std::uint32_t>& taken,
                                      Rng& rng);

}  // namespace fairswap::topology
