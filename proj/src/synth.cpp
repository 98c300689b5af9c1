#include "kbi/synth.hpp"

#include "kbi/errors.hpp"

#include <string>

namespace kbi {

Population make_grid(int side, std::int64_t spins_per_cell) {
    if (side < 1) throw ConfigError("make_grid: side must be >= 1");
    if (spins_per_cell < 1) throw ConfigError("make_grid: spins_per_cell must be >= 1");
    DimSchema schema;
    schema.scalar_dims = {"x", "y"};
    std::vector<Site> sites;
    sites.reserve(static_cast<std::size_t>(side) * static_cast<std::size_t>(side));
    for (int x = 0; x < side; ++x)
        for (int y = 0; y < side; ++y) {
            Site s;
            s.id = "g" + std::to_string(x) + "_" + std::to_string(y);
            s.coords = {static_cast<double>(x), static_cast<double>(y)};
            s.population = spins_per_cell;
            sites.push_back(std::move(s));
        }
    return Population(std::move(schema), std::move(sites));
}

Summary generate_snapshot(const Population& pop, const DistanceTable& dt, const ModelParams& mp,
                          const GlauberOptions& opt, std::uint64_t seed, std::uint64_t stream) {
    auto graph_rng = derive_stream(seed, stream, sub::graph);
    auto spin_rng = derive_stream(seed, stream, sub::spins);
    const Graph g = mp.coupling != 0.0 ? sample_graph(pop, dt, mp.kernel, graph_rng)
                                       : Graph{pop.total_spins(), {}};
    const SpinConfig sc = glauber_sample(pop, g, mp, opt, spin_rng);
    return summarise(sc, pop);
}

} // namespace kbi
