#include "kbi/spin.hpp"

#include "kbi/csv.hpp"
#include "kbi/errors.hpp"
#include "kbi/parallel.hpp"

#include <cmath>
#include <fstream>
#include <limits>

namespace kbi {

std::vector<double> site_fields(const Population& pop, const FieldParams& fp) {
    if (fp.coef.size() != pop.schema().scalar_dims.size())
        throw ConfigError("site_fields: field has " + std::to_string(fp.coef.size()) +
                          " coefficients for " + std::to_string(pop.schema().scalar_dims.size()) +
                          " scalar dimensions");
    std::vector<double> b(pop.site_count());
    for (std::size_t z = 0; z < pop.site_count(); ++z) {
        double v = fp.h0;
        const auto& coords = pop.sites()[z].coords;
        for (std::size_t k = 0; k < fp.coef.size(); ++k) v += fp.coef[k] * coords[k];
        b[z] = v;
    }
    return b;
}

double hamiltonian(const SpinConfig& sc, const Population& pop, const Graph& g,
                   const FieldParams& fp, double coupling) {
    if (sc.size() != pop.total_spins()) throw DataError("hamiltonian: spin/population mismatch");
    const auto b = site_fields(pop, fp);
    const auto& site_of = pop.site_of_spin();
    double h = 0.0;
    for (std::int64_t i = 0; i < sc.size(); ++i)
        h -= b[site_of[static_cast<std::size_t>(i)]] * sc.values[static_cast<std::size_t>(i)];
    double pair_sum = 0.0;
    for (const auto& [i, j] : g.edges)
        pair_sum += static_cast<double>(sc.values[i]) * static_cast<double>(sc.values[j]);
    return h - coupling * pair_sum;
}

void glauber_sweeps(SpinConfig& sc, const Population& pop, const Adjacency& adj,
                    const ModelParams& mp, std::int64_t sweeps, Xoshiro256& rng,
                    const std::vector<std::int8_t>* pinned_mask) {
    const auto n = static_cast<std::uint64_t>(sc.size());
    const auto b = site_fields(pop, mp.fields);
    const auto& site_of = pop.site_of_spin();
    const double beta = mp.beta;
    const double coupling = mp.coupling;
    auto* spins = sc.values.data();

    for (std::int64_t t = 0; t < sweeps; ++t) {
        for (std::uint64_t k = 0; k < n; ++k) {
            const auto i = static_cast<std::size_t>(rng.uniform_below(n));
            if (pinned_mask && (*pinned_mask)[i]) continue;
            double local = b[site_of[i]];
            if (coupling != 0.0) {
                std::int64_t neigh_sum = 0;
                for (std::uint32_t e = adj.offsets[i]; e < adj.offsets[i + 1]; ++e)
                    neigh_sum += spins[adj.neighbors[e]];
                local += coupling * static_cast<double>(neigh_sum);
            }
            const double delta_h = 2.0 * static_cast<double>(spins[i]) * local;
            const double flip_prob = 1.0 / (1.0 + std::exp(beta * delta_h));
            if (rng.next_double() < flip_prob) spins[i] = static_cast<std::int8_t>(-spins[i]);
        }
    }
}

SpinConfig glauber_sample(const Population& pop, const Graph& g, const ModelParams& mp,
                          const GlauberOptions& opt, Xoshiro256& rng) {
    if (opt.sweeps < 1) throw ConfigError("glauber_sample: sweeps must be >= 1");
    if (mp.beta < 0.0) throw ConfigError("glauber_sample: beta must be >= 0");
    const auto n = static_cast<std::size_t>(pop.total_spins());

    SpinConfig sc;
    sc.values.resize(n);
    const auto b = site_fields(pop, mp.fields);
    const auto& site_of = pop.site_of_spin();
    for (std::size_t i = 0; i < n; ++i) {
        if (opt.init == SpinInit::field_aligned) {
            const double f = b[site_of[i]];
            if (f > 0.0)
                sc.values[i] = 1;
            else if (f < 0.0)
                sc.values[i] = -1;
            else
                sc.values[i] = rng.bernoulli(0.5) ? 1 : -1;
        } else {
            sc.values[i] = rng.bernoulli(0.5) ? 1 : -1;
        }
    }

    std::vector<std::int8_t> mask;
    const std::vector<std::int8_t>* mask_ptr = nullptr;
    if (!opt.pinned_index.empty()) {
        if (opt.pinned_index.size() != opt.pinned_value.size())
            throw ConfigError("glauber_sample: pinned index/value size mismatch");
        mask.assign(n, 0);
        for (std::size_t k = 0; k < opt.pinned_index.size(); ++k) {
            const auto i = static_cast<std::size_t>(opt.pinned_index[k]);
            if (i >= n) throw ConfigError("glauber_sample: pinned index out of range");
            mask[i] = 1;
            sc.values[i] = opt.pinned_value[k];
        }
        mask_ptr = &mask;
    }

    const Adjacency adj = build_adjacency(g);
    glauber_sweeps(sc, pop, adj, mp, opt.sweeps, rng, mask_ptr);
    return sc;
}

BoltzmannTable exact_boltzmann(const Population& pop, const Graph& g, const ModelParams& mp) {
    const std::int64_t n = pop.total_spins();
    if (n > 20) throw DataError("exact_boltzmann: N = " + std::to_string(n) + " exceeds 20");
    const auto b = site_fields(pop, mp.fields);
    const auto& site_of = pop.site_of_spin();
    const auto states = std::size_t{1} << n;

    std::vector<double> neg_beta_h(states);
    double max_term = -std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < states; ++s) {
        double h = 0.0;
        for (std::int64_t i = 0; i < n; ++i) {
            const double sigma = (s >> i) & 1 ? 1.0 : -1.0;
            h -= b[site_of[static_cast<std::size_t>(i)]] * sigma;
        }
        double pair_sum = 0.0;
        for (const auto& [i, j] : g.edges) {
            const double si = (s >> i) & 1 ? 1.0 : -1.0;
            const double sj = (s >> j) & 1 ? 1.0 : -1.0;
            pair_sum += si * sj;
        }
        h -= mp.coupling * pair_sum;
        neg_beta_h[s] = -mp.beta * h;
        max_term = std::max(max_term, neg_beta_h[s]);
    }
    double sum = 0.0;
    for (const double t : neg_beta_h) sum += std::exp(t - max_term);

    BoltzmannTable table;
    table.log_z = max_term + std::log(sum);
    table.z = std::exp(table.log_z);
    table.probs.resize(states);
    for (std::size_t s = 0; s < states; ++s)
        table.probs[s] = std::exp(neg_beta_h[s] - table.log_z);
    return table;
}

Summary summarise(const SpinConfig& sc, const Population& pop) {
    if (sc.size() != pop.total_spins()) throw DataError("summarise: spin/population mismatch");
    Summary s;
    s.fractions.resize(pop.site_count());
    s.weights.resize(pop.site_count());
    for (std::size_t z = 0; z < pop.site_count(); ++z) {
        const std::int64_t lo = pop.spin_offset(z);
        const std::int64_t hi = pop.spin_offset(z + 1);
        std::int64_t down = 0;
        for (std::int64_t i = lo; i < hi; ++i)
            if (sc.values[static_cast<std::size_t>(i)] < 0) ++down;
        s.fractions[z] = static_cast<double>(down) / static_cast<double>(hi - lo);
        s.weights[z] = static_cast<double>(hi - lo);
    }
    return s;
}

double eta(const Summary& a, const Summary& b) {
    if (a.fractions.size() != b.fractions.size() || a.weights != b.weights)
        throw DataError("eta: mismatched summary units");
    double acc = 0.0, total = 0.0;
    for (std::size_t z = 0; z < a.fractions.size(); ++z) {
        acc += a.weights[z] * std::abs(a.fractions[z] - b.fractions[z]);
        total += a.weights[z];
    }
    return acc / total;
}

double magnetisation(const SpinConfig& sc) {
    std::int64_t sum = 0;
    for (const auto v : sc.values) sum += v;
    return static_cast<double>(sum) / static_cast<double>(sc.values.size());
}

double unaligned_edge_fraction(const SpinConfig& sc, const Graph& g) {
    if (g.edges.empty()) return 0.0;
    std::size_t unaligned = 0;
    for (const auto& [i, j] : g.edges)
        if (sc.values[i] != sc.values[j]) ++unaligned;
    return static_cast<double>(unaligned) / static_cast<double>(g.edges.size());
}

std::vector<MagnetisationPoint> magnetisation_sweep(const Population& pop,
                                                    const DistanceTable& dt,
                                                    const ModelParams& mp,
                                                    const std::vector<double>& beta_grid,
                                                    int reps, const GlauberOptions& opt,
                                                    std::uint64_t seed, unsigned workers) {
    if (beta_grid.empty()) throw ConfigError("magnetisation_sweep: empty beta grid");
    if (reps < 1) throw ConfigError("magnetisation_sweep: reps must be >= 1");
    const std::size_t tasks = beta_grid.size() * static_cast<std::size_t>(reps);
    std::vector<double> abs_m(tasks);
    parallel_for(tasks, workers, [&](std::size_t t) {
        const std::size_t bi = t / static_cast<std::size_t>(reps);
        ModelParams local = mp;
        local.beta = beta_grid[bi];
        auto graph_rng = derive_stream(seed, t, sub::graph);
        auto spin_rng = derive_stream(seed, t, sub::spins);
        const Graph g = local.coupling != 0.0 ? sample_graph(pop, dt, local.kernel, graph_rng)
                                              : Graph{pop.total_spins(), {}};
        const SpinConfig sc = glauber_sample(pop, g, local, opt, spin_rng);
        abs_m[t] = std::abs(magnetisation(sc));
    });
    std::vector<MagnetisationPoint> curve(beta_grid.size());
    for (std::size_t bi = 0; bi < beta_grid.size(); ++bi) {
        double acc = 0.0;
        for (int r = 0; r < reps; ++r)
            acc += abs_m[bi * static_cast<std::size_t>(reps) + static_cast<std::size_t>(r)];
        curve[bi] = {beta_grid[bi], acc / reps};
    }
    return curve;
}

void save_summary(const Summary& s, const Population& pop, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    out << "site_id,n,S\n";
    for (std::size_t z = 0; z < pop.site_count(); ++z)
        out << pop.sites()[z].id << ',' << pop.sites()[z].population << ','
            << csv::format_double(s.fractions[z]) << '\n';
}

} // namespace kbi
