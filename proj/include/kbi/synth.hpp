#ifndef KBI_SYNTH_HPP
#define KBI_SYNTH_HPP

#include "kbi/blau.hpp"
#include "kbi/spin.hpp"

#include <cstdint>

namespace kbi {

/// side x side grid of sites at integer coordinates with two scalar distance
/// dimensions x and y; `spins_per_cell` spins at each of the side^2 cells.
Population make_grid(int side, std::int64_t spins_per_cell);

/// One graph draw plus one Glauber draw, summarised; the "observed data" of
/// simulation studies. Graph and spin randomness come from dedicated
/// substreams of (seed, stream), so a pinned J = 0 run can skip the graph
/// without disturbing the spins.
Summary generate_snapshot(const Population& pop, const DistanceTable& dt, const ModelParams& mp,
                          const GlauberOptions& opt, std::uint64_t seed, std::uint64_t stream = 0);

} // namespace kbi

#endif // KBI_SYNTH_HPP
