#ifndef KBI_KERNEL_HPP
#define KBI_KERNEL_HPP

#include "kbi/blau.hpp"
#include "kbi/rng.hpp"

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

namespace kbi {

/// Logistic connectivity kernel: rho = 1 / (1 + exp(bias + sum_k coef_k d_k)).
/// Positive coefficients are homophily; negative ones are representable.
struct KernelParams {
    double bias = 0.0;               // theta0, overall density term
    std::vector<double> coef;        // theta_k, aligned with DistanceTable dims

    /// bias shift that keeps expected per-spin connectivity when the
    /// population is resampled from n_from to n_to spins (low-density regime).
    static double rescale_bias(double bias, std::int64_t n_from, std::int64_t n_to);
};

/// Undirected simple graph over spins; each edge stored once with i < j.
struct Graph {
    std::int64_t num_spins = 0;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;

    std::size_t edge_count() const { return edges.size(); }
};

/// Neighbor lists in CSR form for the samplers.
struct Adjacency {
    std::vector<std::uint32_t> offsets;   // size N+1
    std::vector<std::uint32_t> neighbors; // size 2E
};
Adjacency build_adjacency(const Graph& g);

/// Connection probability between two sites. The exp argument is clamped to
/// +-700 so extreme parameters saturate to 0/1 instead of overflowing.
double kernel_prob(const DistanceTable& dt, const KernelParams& kp, std::size_t site_i,
                   std::size_t site_j);

/// Sample a graph: per unordered site pair the edge count is Binomial over
/// the pair slots at that block's kernel probability, then endpoints are a
/// uniform subset without duplicates. Spins at a site share coordinates, so
/// this is distributed exactly as independent per-pair Bernoulli trials.
Graph sample_graph(const Population& pop, const DistanceTable& dt, const KernelParams& kp,
                   Xoshiro256& rng);

struct DegreeStats {
    double mean = 0.0;
    double variance = 0.0;
    std::vector<std::int64_t> histogram; // index = degree
};
DegreeStats degree_stats(const Graph& g);

struct LinkDistanceStats {
    double median_spatial_km = 0.0;          // NaN when no spatial dim
    std::vector<double> per_dim_median;      // aligned with raw_dt dims
};
/// Medians of raw (unstandardised) distances over the graph's edges.
LinkDistanceStats link_distance_stats(const Graph& g, const Population& pop,
                                      const DistanceTable& raw_dt);

/// Same edge count, endpoints re-drawn uniformly over all unordered spin
/// pairs (density-preserving, not degree-preserving).
Graph randomise_links(const Graph& g, Xoshiro256& rng);

/// Debug dump, one "i j" pair per line. Not a stability contract.
void write_edge_list(const Graph& g, const std::filesystem::path& path);

} // namespace kbi

#endif // KBI_KERNEL_HPP
