#ifndef KBI_SPIN_HPP
#define KBI_SPIN_HPP

#include "kbi/blau.hpp"
#include "kbi/kernel.hpp"
#include "kbi/rng.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace kbi {

/// Linear external fields: per-spin bias h0 + sum_k coef_k z_ik over the
/// scalar coordinate dimensions.
struct FieldParams {
    double h0 = 0.0;
    std::vector<double> coef; // aligned with schema.scalar_dims
};

struct ModelParams {
    double beta = 1.0;   // inverse temperature, >= 0
    double coupling = 0.0; // J, connection strength
    FieldParams fields;
    KernelParams kernel;
};

/// +-1 state per spin.
struct SpinConfig {
    std::vector<std::int8_t> values;

    std::int64_t size() const { return static_cast<std::int64_t>(values.size()); }
};

/// Per-site fraction of down (-1) spins with the site weights alongside.
struct Summary {
    std::vector<double> fractions; // S_z in [0,1], length C
    std::vector<double> weights;   // n_z
};

/// Per-site external field value h0 + h . z.
std::vector<double> site_fields(const Population& pop, const FieldParams& fp);

/// H = -sum_i b_i sigma_i - J sum_(i,j) in E sigma_i sigma_j,
/// each undirected edge counted once.
double hamiltonian(const SpinConfig& sc, const Population& pop, const Graph& g,
                   const FieldParams& fp, double coupling);

enum class SpinInit {
    field_aligned, // sign of the local field, ties resolved uniformly
    random,
};

struct GlauberOptions {
    std::int64_t sweeps = 2000;
    SpinInit init = SpinInit::field_aligned;
    /// Spins held fixed during sweeps; they still contribute to their
    /// neighbours' local fields. Parallel arrays, values in {-1,+1}.
    std::vector<std::int64_t> pinned_index;
    std::vector<std::int8_t> pinned_value;
};

/// Random-sequential single-spin Glauber dynamics: each sweep performs N
/// updates on uniformly chosen spins with flip probability
/// 1/(1+exp(beta * dH)). Stationary law is the Boltzmann distribution.
SpinConfig glauber_sample(const Population& pop, const Graph& g, const ModelParams& mp,
                          const GlauberOptions& opt, Xoshiro256& rng);

/// In-place continuation from an existing configuration (used by the
/// oracle-equivalence tests to retain states along one chain).
void glauber_sweeps(SpinConfig& sc, const Population& pop, const Adjacency& adj,
                    const ModelParams& mp, std::int64_t sweeps, Xoshiro256& rng,
                    const std::vector<std::int8_t>* pinned_mask = nullptr);

/// Exact Boltzmann distribution by full enumeration; the small-system
/// oracle. probs[s] indexes states by bitmask (bit i set = spin i up).
struct BoltzmannTable {
    std::vector<double> probs;
    double log_z = 0.0;
    double z = 0.0;
};
BoltzmannTable exact_boltzmann(const Population& pop, const Graph& g, const ModelParams& mp);

Summary summarise(const SpinConfig& sc, const Population& pop);

/// Weighted mean absolute error between summaries (Eq. of the ABC
/// discrepancy): sum_z n_z |S_z - S'_z| / sum_z n_z. Bounded in [0,1].
double eta(const Summary& a, const Summary& b);

/// m = mean spin in [-1,1].
double magnetisation(const SpinConfig& sc);

/// Fraction of edges whose endpoint spins disagree; the alignment
/// diagnostic for strong-coupling degeneracy.
double unaligned_edge_fraction(const SpinConfig& sc, const Graph& g);

struct MagnetisationPoint {
    double beta = 0.0;
    double mean_abs_m = 0.0;
};

/// Average |m| per beta over `reps` fresh (graph, spin) samples each.
std::vector<MagnetisationPoint> magnetisation_sweep(const Population& pop,
                                                    const DistanceTable& dt,
                                                    const ModelParams& mp,
                                                    const std::vector<double>& beta_grid,
                                                    int reps, const GlauberOptions& opt,
                                                    std::uint64_t seed, unsigned workers);

/// Summary CSV: `site_id,n,S`. Also the observed-data input format.
void save_summary(const Summary& s, const Population& pop, const std::filesystem::path& path);

} // namespace kbi

#endif // KBI_SPIN_HPP
