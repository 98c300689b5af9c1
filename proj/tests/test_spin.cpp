#include "kbi/spin.hpp"

#include "kbi/errors.hpp"
#include "kbi/synth.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <cmath>

using namespace kbi;

namespace {

ModelParams params_1d(double beta, double coupling, double h_x) {
    ModelParams mp;
    mp.beta = beta;
    mp.coupling = coupling;
    mp.fields.coef = {h_x};
    mp.kernel.coef = {0.0};
    return mp;
}

std::size_t state_index(const SpinConfig& sc) {
    std::size_t s = 0;
    for (std::size_t i = 0; i < sc.values.size(); ++i)
        if (sc.values[i] > 0) s |= std::size_t{1} << i;
    return s;
}

} // namespace

TEST_SUITE("spin") {

TEST_CASE("hamiltonian hand values") {
    SUBCASE("one spin in unit field") {
        const auto pop = test::line_population({1.0}, {1});
        SpinConfig sc{{1}};
        const Graph g{1, {}};
        CHECK(hamiltonian(sc, pop, g, {0.0, {1.0}}, 123.0) == doctest::Approx(-1.0));
    }
    SUBCASE("two aligned spins, one edge, J=1") {
        const auto pop = test::line_population({0.0, 0.0}, {1, 1});
        SpinConfig sc{{1, 1}};
        const Graph g{2, {{0, 1}}};
        CHECK(hamiltonian(sc, pop, g, {0.0, {0.0}}, 1.0) == doctest::Approx(-1.0));
    }
    SUBCASE("global flip leaves H unchanged when fields vanish") {
        const auto pop = test::line_population({0.3, -0.7, 1.1}, {2, 1, 2});
        const Graph g{5, {{0, 2}, {1, 4}, {3, 4}}};
        auto rng = derive_stream(3, 0);
        SpinConfig sc;
        for (int i = 0; i < 5; ++i) sc.values.push_back(rng.bernoulli(0.5) ? 1 : -1);
        SpinConfig flipped = sc;
        for (auto& v : flipped.values) v = static_cast<std::int8_t>(-v);
        const FieldParams none{0.0, {0.0}};
        CHECK(hamiltonian(sc, pop, g, none, 1.7) ==
              doctest::Approx(hamiltonian(flipped, pop, g, none, 1.7)));
    }
}

TEST_CASE("exact_boltzmann closed forms") {
    const auto pop = test::line_population({1.0}, {1});
    const Graph g{1, {}};
    SUBCASE("single spin, zero field") {
        const auto table = exact_boltzmann(pop, g, params_1d(1.0, 0.0, 0.0));
        CHECK(table.probs[0] == doctest::Approx(0.5));
        CHECK(table.probs[1] == doctest::Approx(0.5));
    }
    SUBCASE("single spin, unit field at beta 1") {
        const auto table = exact_boltzmann(pop, g, params_1d(1.0, 0.0, 1.0));
        const double e = std::exp(1.0);
        CHECK(table.probs[1] == doctest::Approx(e / (e + 1.0 / e)));
        CHECK(table.probs[1] == doctest::Approx(0.8808).epsilon(1e-4));
    }
    SUBCASE("probabilities sum to one") {
        const auto pop8 = test::line_population({0.1, -0.4, 0.9}, {3, 3, 2});
        const Graph g8{8, {{0, 1}, {2, 5}, {6, 7}, {3, 4}}};
        const auto table = exact_boltzmann(pop8, g8, params_1d(0.7, 0.9, -0.6));
        double sum = 0.0;
        for (const double p : table.probs) sum += p;
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("N above 20 is rejected") {
        const auto big = test::line_population({0.0}, {21});
        CHECK_THROWS_AS(exact_boltzmann(big, Graph{21, {}}, params_1d(1, 0, 0)), DataError);
    }
}

TEST_CASE("detailed balance holds for the flip rule") {
    // p(s) P(s->s') == p(s') P(s'->s) for single-spin-flip pairs
    auto rng = derive_stream(17, 0);
    for (int rep = 0; rep < 5; ++rep) {
        const int n = 3 + static_cast<int>(rng.uniform_below(4)); // 3..6
        std::vector<double> xs(static_cast<std::size_t>(n));
        for (auto& x : xs) x = rng.uniform(-1.0, 1.0);
        const auto pop = test::line_population(xs, std::vector<std::int64_t>(xs.size(), 1));
        Graph g{n, {}};
        for (std::uint32_t i = 0; i < static_cast<std::uint32_t>(n); ++i)
            for (std::uint32_t j = i + 1; j < static_cast<std::uint32_t>(n); ++j)
                if (rng.bernoulli(0.4)) g.edges.emplace_back(i, j);
        const auto mp = params_1d(rng.uniform(0.1, 1.5), rng.uniform(-1.5, 1.5),
                                  rng.uniform(-1.0, 1.0));
        const auto table = exact_boltzmann(pop, g, mp);
        const auto b = site_fields(pop, mp.fields);
        const Adjacency adj = build_adjacency(g);

        for (std::size_t s = 0; s < table.probs.size(); ++s) {
            for (int i = 0; i < n; ++i) {
                const std::size_t s2 = s ^ (std::size_t{1} << i);
                const double sigma = (s >> i) & 1 ? 1.0 : -1.0;
                double local = b[static_cast<std::size_t>(i)];
                for (std::uint32_t e = adj.offsets[static_cast<std::size_t>(i)];
                     e < adj.offsets[static_cast<std::size_t>(i) + 1]; ++e) {
                    const auto jn = adj.neighbors[e];
                    local += mp.coupling * ((s2 >> jn) & 1 ? 1.0 : -1.0);
                }
                const double dh_fwd = 2.0 * sigma * local;
                const double p_fwd = 1.0 / (1.0 + std::exp(mp.beta * dh_fwd));
                const double p_bwd = 1.0 / (1.0 + std::exp(-mp.beta * dh_fwd));
                const double lhs = table.probs[s] * p_fwd;
                const double rhs = table.probs[s2] * p_bwd;
                CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(lhs)));
            }
        }
    }
}

TEST_CASE("glauber at infinite temperature is uniform per spin") {
    const auto pop = test::line_population({0.0, 1.0}, {200, 200});
    const Graph g{400, {}};
    GlauberOptions opt;
    opt.sweeps = 20;
    opt.init = SpinInit::random;
    double mean0 = 0.0, mean1 = 0.0;
    const int reps = 50;
    for (int r = 0; r < reps; ++r) {
        auto rng = derive_stream(31, static_cast<std::uint64_t>(r));
        const auto sc = glauber_sample(pop, g, params_1d(0.0, 1.0, 1.0), opt, rng);
        const auto s = summarise(sc, pop);
        mean0 += s.fractions[0];
        mean1 += s.fractions[1];
    }
    CHECK(mean0 / reps == doctest::Approx(0.5).epsilon(0.05));
    CHECK(mean1 / reps == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("strong positive fields align every spin up") {
    const auto pop = test::line_population({1.0, 2.0, 0.5}, {30, 30, 30});
    const Graph g{90, {}};
    GlauberOptions opt;
    opt.sweeps = 50;
    opt.init = SpinInit::random;
    auto rng = derive_stream(32, 0);
    const auto sc = glauber_sample(pop, g, params_1d(50.0, 0.0, 1.0), opt, rng);
    const auto s = summarise(sc, pop);
    for (const double f : s.fractions) CHECK(f == 0.0); // fraction of down spins
}

TEST_CASE("glauber long-run distribution matches the exact oracle on K10") {
    // N=10 complete graph, beta=0.3, J=1, no field
    const auto pop = test::line_population(std::vector<double>(10, 0.0),
                                           std::vector<std::int64_t>(10, 1));
    Graph g{10, {}};
    for (std::uint32_t i = 0; i < 10; ++i)
        for (std::uint32_t j = i + 1; j < 10; ++j) g.edges.emplace_back(i, j);
    const auto mp = params_1d(0.3, 1.0, 0.0);
    const auto table = exact_boltzmann(pop, g, mp);

    const Adjacency adj = build_adjacency(g);
    auto rng = derive_stream(33, 0);
    SpinConfig sc;
    sc.values.assign(10, 1);
    glauber_sweeps(sc, pop, adj, mp, 1000, rng); // burn-in
    std::vector<std::int64_t> counts(1024, 0);
    const int retained = 1000000;
    // the h=0 fixture is exactly bimodal; thin hard enough to decorrelate
    // the mode-switching
    for (int r = 0; r < retained; ++r) {
        glauber_sweeps(sc, pop, adj, mp, 40, rng);
        ++counts[state_index(sc)];
    }
    const double tv = test::total_variation(counts, table.probs);
    INFO("TV distance ", tv);
    CHECK(tv < 0.02);
}

TEST_CASE("summarise counts down spins") {
    const auto pop = test::line_population({0.0}, {100});
    SpinConfig sc;
    SUBCASE("all down") {
        sc.values.assign(100, -1);
        CHECK(summarise(sc, pop).fractions[0] == 1.0);
    }
    SUBCASE("all up") {
        sc.values.assign(100, 1);
        CHECK(summarise(sc, pop).fractions[0] == 0.0);
    }
    SUBCASE("25 of 100 down") {
        sc.values.assign(100, 1);
        for (int i = 0; i < 25; ++i) sc.values[static_cast<std::size_t>(i)] = -1;
        CHECK(summarise(sc, pop).fractions[0] == doctest::Approx(0.25));
    }
}

TEST_CASE("eta hand values") {
    const Summary a{{0.2, 0.4}, {100.0, 100.0}};
    const Summary b{{0.3, 0.5}, {100.0, 100.0}};
    CHECK(eta(a, a) == 0.0);
    CHECK(eta(a, b) == doctest::Approx(0.1));
    const Summary zero{{0.0, 0.0}, {100.0, 100.0}};
    const Summary one{{1.0, 1.0}, {100.0, 100.0}};
    CHECK(eta(zero, one) == doctest::Approx(1.0));
    const Summary mismatched{{0.1}, {50.0}};
    CHECK_THROWS_AS(eta(a, mismatched), DataError);
}

TEST_CASE("eta is a bounded pseudo-metric") {
    auto rng = derive_stream(44, 0);
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t c = 1 + rng.uniform_below(6);
        std::vector<double> w(c);
        for (auto& x : w) x = 1.0 + static_cast<double>(rng.uniform_below(50));
        auto draw = [&] {
            Summary s;
            s.weights = w;
            s.fractions.resize(c);
            for (auto& f : s.fractions) f = rng.next_double();
            return s;
        };
        const auto a = draw(), b = draw(), c3 = draw();
        const double ab = eta(a, b), ba = eta(b, a), ac = eta(a, c3), cb = eta(c3, b);
        CHECK(ab == doctest::Approx(ba));
        CHECK(ab >= 0.0);
        CHECK(ab <= 1.0);
        CHECK(ab <= ac + cb + 1e-12);
    }
}

TEST_CASE("magnetisation basics") {
    SpinConfig sc;
    sc.values.assign(10, 1);
    CHECK(magnetisation(sc) == 1.0);
    for (std::size_t i = 0; i < 5; ++i) sc.values[i] = -1;
    CHECK(magnetisation(sc) == 0.0);
}

TEST_CASE("unaligned edge fraction") {
    SpinConfig sc{{1, 1, -1}};
    const Graph g{3, {{0, 1}, {1, 2}}};
    CHECK(unaligned_edge_fraction(sc, g) == doctest::Approx(0.5));
    CHECK(unaligned_edge_fraction(sc, Graph{3, {}}) == 0.0);
}

TEST_CASE("magnetisation sweep endpoints and the null couplings") {
    const auto pop = make_grid(4, 8); // N=128
    const auto dt = standardise(raw_distances(pop));
    GlauberOptions opt;
    opt.sweeps = 60;
    opt.init = SpinInit::random;
    ModelParams mp;
    mp.fields.coef = {0.0, 0.0};
    mp.kernel.coef = {1.0, 1.0};
    mp.kernel.bias = 2.5;

    SUBCASE("beta zero point is near zero") {
        mp.coupling = 2.0;
        const auto curve = magnetisation_sweep(pop, dt, mp, {0.0}, 6, opt, 5, 2);
        CHECK(curve[0].mean_abs_m < 0.25);
    }
    SUBCASE("no coupling, no field stays near zero for all beta") {
        mp.coupling = 0.0;
        const auto curve = magnetisation_sweep(pop, dt, mp, {0.0, 1.0, 2.0}, 6, opt, 6, 2);
        for (const auto& pt : curve) CHECK(pt.mean_abs_m < 0.25);
    }
    SUBCASE("ferromagnetic homophilous fixture orders as beta grows") {
        mp.coupling = 4.0;
        const auto curve =
            magnetisation_sweep(pop, dt, mp, {0.0, 0.2, 0.4, 0.8, 1.6}, 6, opt, 7, 2);
        CHECK(curve.back().mean_abs_m - curve.front().mean_abs_m > 0.3);
        for (std::size_t i = 1; i < curve.size(); ++i)
            CHECK(curve[i].mean_abs_m >= curve[i - 1].mean_abs_m - 0.12);
    }
}

TEST_CASE("empty beta grid is rejected") {
    const auto pop = make_grid(2, 2);
    const auto dt = standardise(raw_distances(pop));
    ModelParams mp;
    mp.fields.coef = {0.0, 0.0};
    mp.kernel.coef = {0.0, 0.0};
    CHECK_THROWS_AS(magnetisation_sweep(pop, dt, mp, {}, 1, {}, 1, 1), ConfigError);
}

} // TEST_SUITE
