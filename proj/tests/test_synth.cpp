#include "kbi/synth.hpp"

#include "kbi/errors.hpp"

#include <doctest.h>

using namespace kbi;

namespace {

ModelParams grid_params(double beta, double coupling, double h_x, double h_y, double bias,
                        double theta_x, double theta_y) {
    ModelParams mp;
    mp.beta = beta;
    mp.coupling = coupling;
    mp.fields.coef = {h_x, h_y};
    mp.kernel.bias = bias;
    mp.kernel.coef = {theta_x, theta_y};
    return mp;
}

} // namespace

TEST_SUITE("synth") {

TEST_CASE("make_grid shapes") {
    SUBCASE("paper-scale grid") {
        const auto pop = make_grid(10, 100);
        CHECK(pop.site_count() == 100);
        CHECK(pop.total_spins() == 10000);
    }
    SUBCASE("single site") {
        const auto pop = make_grid(1, 1);
        CHECK(pop.site_count() == 1);
        CHECK(pop.total_spins() == 1);
    }
    SUBCASE("2x2 grid has max x-distance 1") {
        const auto pop = make_grid(2, 1);
        CHECK(pop.site_count() == 4);
        const auto dt = raw_distances(pop);
        double max_x = 0.0;
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = 0; j < 4; ++j) max_x = std::max(max_x, dt.at(0, i, j));
        CHECK(max_x == 1.0);
    }
    SUBCASE("invalid arguments") {
        CHECK_THROWS_AS(make_grid(0, 1), ConfigError);
        CHECK_THROWS_AS(make_grid(2, 0), ConfigError);
    }
}

TEST_CASE("snapshot regeneration with the same seed is bit-identical") {
    const auto pop = make_grid(4, 5);
    const auto dt = standardise(raw_distances(pop));
    const auto mp = grid_params(0.3, 2.0, 1.0, -1.0, 3.0, 1.0, 0.5);
    GlauberOptions opt;
    opt.sweeps = 50;
    const auto a = generate_snapshot(pop, dt, mp, opt, 42, 0);
    const auto b = generate_snapshot(pop, dt, mp, opt, 42, 0);
    CHECK(a.fractions == b.fractions);
    const auto c = generate_snapshot(pop, dt, mp, opt, 43, 0);
    CHECK(a.fractions != c.fractions);
}

TEST_CASE("snapshot limits") {
    const auto pop = make_grid(3, 40);
    const auto dt = standardise(raw_distances(pop));
    GlauberOptions opt;
    opt.sweeps = 40;
    SUBCASE("infinite temperature stays near one half") {
        const auto s = generate_snapshot(pop, dt, grid_params(0.0, 3.0, 1.0, -1.0, 3.0, 1, 1),
                                         opt, 7, 0);
        double mean = 0.0;
        for (const double f : s.fractions) mean += f;
        mean /= static_cast<double>(s.fractions.size());
        CHECK(mean == doctest::Approx(0.5).epsilon(0.15));
    }
    SUBCASE("strong positive field with J=0 drives fraction-down to zero") {
        ModelParams mp = grid_params(60.0, 0.0, 1.0, 1.0, 3.0, 1, 1);
        mp.fields.h0 = 1.0; // strictly positive field even at the origin cell
        const auto s = generate_snapshot(pop, dt, mp, opt, 8, 0);
        for (const double f : s.fractions) CHECK(f == 0.0);
    }
}

} // TEST_SUITE
