#include "kbi/kernel.hpp"

#include "kbi/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <unordered_set>

namespace kbi {

double KernelParams::rescale_bias(double bias, std::int64_t n_from, std::int64_t n_to) {
    if (n_from <= 0 || n_to <= 0)
        throw ConfigError("rescale_bias: population sizes must be positive");
    return bias - std::log(static_cast<double>(n_from) / static_cast<double>(n_to));
}

double kernel_prob(const DistanceTable& dt, const KernelParams& kp, std::size_t site_i,
                   std::size_t site_j) {
    double arg = kp.bias;
    for (std::size_t k = 0; k < dt.dim_count(); ++k)
        arg += kp.coef[k] * dt.at(k, site_i, site_j);
    arg = std::clamp(arg, -700.0, 700.0);
    return 1.0 / (1.0 + std::exp(arg));
}

namespace {

std::int64_t draw_binomial(std::int64_t trials, double p, Xoshiro256& rng) {
    if (trials <= 0 || p <= 0.0) return 0;
    if (p >= 1.0) return trials;
    std::binomial_distribution<std::int64_t> dist(trials, p);
    return dist(rng);
}

// Unrank c in [0, n(n-1)/2) to the c-th unordered pair (u,v), u < v < n,
// ordered lexicographically. Float guess plus integer fixup.
std::pair<std::int64_t, std::int64_t> unrank_pair(std::int64_t c, std::int64_t n) {
    const double nn = static_cast<double>(2 * n - 1);
    auto first_of = [n](std::int64_t u) { return u * (2 * n - u - 1) / 2; };
    auto u = static_cast<std::int64_t>((nn - std::sqrt(nn * nn - 8.0 * static_cast<double>(c))) / 2.0);
    u = std::clamp<std::int64_t>(u, 0, n - 2);
    while (u > 0 && first_of(u) > c) --u;
    while (u < n - 2 && first_of(u + 1) <= c) ++u;
    const std::int64_t v = u + 1 + (c - first_of(u));
    return {u, v};
}

// m distinct codes uniform over [0, total). Rejection against a set when
// sparse, partial Fisher-Yates over the enumerated range when dense.
void sample_distinct_codes(std::int64_t total, std::int64_t m, Xoshiro256& rng,
                           std::vector<std::uint64_t>& out) {
    out.clear();
    if (m <= 0) return;
    if (2 * m >= total) {
        std::vector<std::uint64_t> all(static_cast<std::size_t>(total));
        std::iota(all.begin(), all.end(), 0);
        for (std::int64_t i = 0; i < m; ++i) {
            const auto j = i + static_cast<std::int64_t>(
                                   rng.uniform_below(static_cast<std::uint64_t>(total - i)));
            std::swap(all[static_cast<std::size_t>(i)], all[static_cast<std::size_t>(j)]);
        }
        all.resize(static_cast<std::size_t>(m));
        out = std::move(all);
        return;
    }
    if (m <= 32) {
        while (static_cast<std::int64_t>(out.size()) < m) {
            const std::uint64_t c = rng.uniform_below(static_cast<std::uint64_t>(total));
            if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
        }
        return;
    }
    std::unordered_set<std::uint64_t> seen;
    seen.reserve(static_cast<std::size_t>(m) * 2);
    while (static_cast<std::int64_t>(seen.size()) < m) {
        const std::uint64_t c = rng.uniform_below(static_cast<std::uint64_t>(total));
        if (seen.insert(c).second) out.push_back(c);
    }
}

} // namespace

Graph sample_graph(const Population& pop, const DistanceTable& dt, const KernelParams& kp,
                   Xoshiro256& rng) {
    if (dt.site_count() != pop.site_count())
        throw DataError("sample_graph: population/table size mismatch");
    if (kp.coef.size() != dt.dim_count())
        throw ConfigError("sample_graph: kernel has " + std::to_string(kp.coef.size()) +
                          " coefficients for " + std::to_string(dt.dim_count()) + " dimensions");

    Graph g;
    g.num_spins = pop.total_spins();
    const std::size_t c = pop.site_count();
    std::vector<std::uint64_t> codes;

    for (std::size_t a = 0; a < c; ++a) {
        const std::int64_t na = pop.sites()[a].population;
        const std::int64_t off_a = pop.spin_offset(a);
        for (std::size_t b = a; b < c; ++b) {
            const std::int64_t nb = pop.sites()[b].population;
            const std::int64_t off_b = pop.spin_offset(b);
            const std::int64_t slots = (a == b) ? na * (na - 1) / 2 : na * nb;
            if (slots == 0) continue;
            const double rho = kernel_prob(dt, kp, a, b);
            const std::int64_t m = draw_binomial(slots, rho, rng);
            if (m == 0) continue;
            sample_distinct_codes(slots, m, rng, codes);
            for (const std::uint64_t code : codes) {
                std::int64_t i, j;
                if (a == b) {
                    auto [u, v] = unrank_pair(static_cast<std::int64_t>(code), na);
                    i = off_a + u;
                    j = off_a + v;
                } else {
                    i = off_a + static_cast<std::int64_t>(code) / nb;
                    j = off_b + static_cast<std::int64_t>(code) % nb;
                }
                g.edges.emplace_back(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));
            }
        }
    }
    return g;
}

Adjacency build_adjacency(const Graph& g) {
    Adjacency adj;
    const auto n = static_cast<std::size_t>(g.num_spins);
    adj.offsets.assign(n + 1, 0);
    for (const auto& [i, j] : g.edges) {
        ++adj.offsets[i + 1];
        ++adj.offsets[j + 1];
    }
    for (std::size_t k = 1; k <= n; ++k) adj.offsets[k] += adj.offsets[k - 1];
    adj.neighbors.resize(2 * g.edges.size());
    std::vector<std::uint32_t> cursor(adj.offsets.begin(), adj.offsets.end() - 1);
    for (const auto& [i, j] : g.edges) {
        adj.neighbors[cursor[i]++] = j;
        adj.neighbors[cursor[j]++] = i;
    }
    return adj;
}

DegreeStats degree_stats(const Graph& g) {
    DegreeStats st;
    const auto n = static_cast<std::size_t>(g.num_spins);
    if (n == 0) return st;
    std::vector<std::int64_t> degree(n, 0);
    for (const auto& [i, j] : g.edges) {
        ++degree[i];
        ++degree[j];
    }
    const auto max_deg = *std::max_element(degree.begin(), degree.end());
    st.histogram.assign(static_cast<std::size_t>(max_deg) + 1, 0);
    double sum = 0.0, sumsq = 0.0;
    for (const auto d : degree) {
        ++st.histogram[static_cast<std::size_t>(d)];
        sum += static_cast<double>(d);
        sumsq += static_cast<double>(d) * static_cast<double>(d);
    }
    st.mean = sum / static_cast<double>(n);
    st.variance = sumsq / static_cast<double>(n) - st.mean * st.mean;
    return st;
}

namespace {

double median_inplace(std::vector<double>& v) {
    const std::size_t n = v.size();
    auto mid = v.begin() + static_cast<std::ptrdiff_t>(n / 2);
    std::nth_element(v.begin(), mid, v.end());
    if (n % 2 == 1) return *mid;
    const double hi = *mid;
    const double lo = *std::max_element(v.begin(), mid);
    return 0.5 * (lo + hi);
}

} // namespace

LinkDistanceStats link_distance_stats(const Graph& g, const Population& pop,
                                      const DistanceTable& raw_dt) {
    if (g.edges.empty()) throw DataError("link_distance_stats: empty graph");
    const auto& site_of = pop.site_of_spin();
    LinkDistanceStats st;
    st.median_spatial_km = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> values(g.edges.size());
    for (std::size_t k = 0; k < raw_dt.dim_count(); ++k) {
        for (std::size_t e = 0; e < g.edges.size(); ++e)
            values[e] = raw_dt.at(k, site_of[g.edges[e].first], site_of[g.edges[e].second]);
        const double med = median_inplace(values);
        st.per_dim_median.push_back(med);
        if (raw_dt.dims()[k].name == "distance") st.median_spatial_km = med;
    }
    return st;
}

Graph randomise_links(const Graph& g, Xoshiro256& rng) {
    Graph out;
    out.num_spins = g.num_spins;
    const std::int64_t n = g.num_spins;
    const std::int64_t total = n * (n - 1) / 2;
    const auto m = static_cast<std::int64_t>(g.edges.size());
    if (m > total) throw DataError("randomise_links: more edges than unordered pairs");
    std::vector<std::uint64_t> codes;
    sample_distinct_codes(total, m, rng, codes);
    out.edges.reserve(codes.size());
    for (const std::uint64_t code : codes) {
        auto [u, v] = unrank_pair(static_cast<std::int64_t>(code), n);
        out.edges.emplace_back(static_cast<std::uint32_t>(u), static_cast<std::uint32_t>(v));
    }
    return out;
}

void write_edge_list(const Graph& g, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    for (const auto& [i, j] : g.edges) out << i << ' ' << j << '\n';
}

} // namespace kbi
