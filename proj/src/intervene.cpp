#include "kbi/intervene.hpp"

#include "kbi/errors.hpp"
#include "kbi/parallel.hpp"
#include "kbi/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace kbi {

double polarisation(const std::vector<double>& values) {
    const std::size_t n = values.size();
    if (n < 2) throw DataError("polarisation: need at least two units");
    // sum_{i<j} |s_i - s_j| via the sorted order: each s_(k) enters with
    // coefficient (2k - n + 1).
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k)
        acc += (2.0 * static_cast<double>(k) - static_cast<double>(n) + 1.0) * sorted[k];
    const double pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
    return acc / pairs;
}

namespace {

struct ContextTransform {
    Population pop;
    DistanceTable dt;
    bool randomise_links = false;
    std::vector<std::int64_t> pinned_index;
    std::vector<std::int8_t> pinned_value;
    std::vector<std::size_t> excluded_sites;
};

ContextTransform transform_context(const Population& pop, const DistanceTable& dt,
                                   const Scenario& sc) {
    ContextTransform out{pop, dt, false, {}, {}, {}};

    if (const auto* inc = std::get_if<IncomeRedistribution>(&sc)) {
        if (inc->k_low < 0 || inc->k_high < 0)
            throw ConfigError("income redistribution: counts must be >= 0");
        const auto c = static_cast<int>(pop.site_count());
        if (inc->k_low + inc->k_high > c)
            throw ConfigError("income redistribution: k_low + k_high exceeds site count");
        const int k = pop.schema().scalar_index(inc->dimension);
        if (k < 0) throw ConfigError("unknown dimension '" + inc->dimension + "'");

        std::vector<std::size_t> order(pop.site_count());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return pop.sites()[a].coords[static_cast<std::size_t>(k)] <
                   pop.sites()[b].coords[static_cast<std::size_t>(k)];
        });
        std::vector<std::size_t> selected(order.begin(), order.begin() + inc->k_low);
        selected.insert(selected.end(), order.end() - inc->k_high, order.end());
        if (selected.empty()) return out;

        double wsum = 0.0, zsum = 0.0;
        for (const auto z : selected) {
            const double w = static_cast<double>(pop.sites()[z].population);
            wsum += w;
            zsum += w * pop.sites()[z].coords[static_cast<std::size_t>(k)];
        }
        const double target = zsum / wsum;
        std::vector<std::pair<std::size_t, double>> changes;
        changes.reserve(selected.size());
        for (const auto z : selected) changes.emplace_back(z, target);
        out.pop = pop.with_coords(inc->dimension, changes);
        out.dt = dt.with_dim_restandardised(out.pop, inc->dimension);
        return out;
    }
    if (const auto* pin = std::get_if<PinSpins>(&sc)) {
        if (pin->fraction < 0.0 || pin->fraction > 1.0)
            throw ConfigError("pin_spins: fraction must be in [0,1]");
        if (pin->value != 1 && pin->value != -1)
            throw ConfigError("pin_spins: value must be +1 or -1");
        std::vector<std::size_t> members;
        const int z = pop.site_index(pin->unit);
        if (z >= 0) {
            members.push_back(static_cast<std::size_t>(z));
        } else {
            auto it = pop.groups().find(pin->unit);
            if (it == pop.groups().end())
                throw ConfigError("pin_spins: unknown site or group '" + pin->unit + "'");
            members = it->second;
        }
        for (const auto m : members) {
            const auto count = static_cast<std::int64_t>(
                std::llround(pin->fraction * static_cast<double>(pop.sites()[m].population)));
            for (std::int64_t i = 0; i < count; ++i) {
                out.pinned_index.push_back(pop.spin_offset(m) + i);
                out.pinned_value.push_back(static_cast<std::int8_t>(pin->value));
            }
        }
        if (pin->exclude_from_summary) out.excluded_sites = members;
        return out;
    }
    if (std::get_if<RandomiseLinks>(&sc)) {
        out.randomise_links = true;
        return out;
    }
    // remaining scenarios act on parameters only; validate names here
    if (const auto* rh = std::get_if<RemoveHomophily>(&sc)) {
        if (rh->dimensions.empty()) throw ConfigError("remove_homophily: no dimension listed");
        for (const auto& d : rh->dimensions)
            if (dt.dim_index(d) < 0) throw ConfigError("unknown dimension '" + d + "'");
    }
    if (const auto* ds = std::get_if<DensityShift>(&sc)) {
        if (ds->multiplier.has_value() == ds->delta.has_value())
            throw ConfigError("density_shift: give exactly one of multiplier or delta");
        if (ds->multiplier && *ds->multiplier <= 0.0)
            throw ConfigError("density_shift: multiplier must be > 0");
    }
    if (const auto* ss = std::get_if<StrengthShift>(&sc)) {
        if (ss->multiplier < 0.0) throw ConfigError("strength_shift: multiplier must be >= 0");
    }
    if (const auto* ns = std::get_if<NoiseShift>(&sc)) {
        if (ns->beta < 0.0) throw ConfigError("noise_shift: beta must be >= 0");
    }
    if (const auto* fs = std::get_if<FieldShift>(&sc)) {
        if (pop.schema().scalar_index(fs->dimension) < 0)
            throw ConfigError("unknown dimension '" + fs->dimension + "'");
    }
    return out;
}

ModelParams transform_params(const ModelParams& mp, const DistanceTable& dt,
                             const DimSchema& schema, const Scenario& sc) {
    ModelParams out = mp;
    if (const auto* rh = std::get_if<RemoveHomophily>(&sc)) {
        for (const auto& d : rh->dimensions)
            out.kernel.coef[static_cast<std::size_t>(dt.dim_index(d))] = 0.0;
    } else if (const auto* ds = std::get_if<DensityShift>(&sc)) {
        out.kernel.bias = ds->multiplier ? out.kernel.bias * *ds->multiplier
                                         : out.kernel.bias + *ds->delta;
    } else if (const auto* ss = std::get_if<StrengthShift>(&sc)) {
        out.coupling *= ss->multiplier;
    } else if (const auto* ns = std::get_if<NoiseShift>(&sc)) {
        out.beta = ns->beta;
    } else if (const auto* fs = std::get_if<FieldShift>(&sc)) {
        out.fields.coef[static_cast<std::size_t>(schema.scalar_index(fs->dimension))] += fs->delta;
    }
    return out;
}

Summary simulate_arm(const Population& pop, const DistanceTable& dt, const ModelParams& mp,
                     const GlauberOptions& base_opt, bool randomise,
                     const std::vector<std::int64_t>& pinned_index,
                     const std::vector<std::int8_t>& pinned_value, std::uint64_t seed,
                     std::uint64_t stream) {
    auto graph_rng = derive_stream(seed, stream, sub::graph);
    Graph g = mp.coupling != 0.0 ? sample_graph(pop, dt, mp.kernel, graph_rng)
                                 : Graph{pop.total_spins(), {}};
    if (randomise) g = randomise_links(g, graph_rng);
    GlauberOptions opt = base_opt;
    opt.pinned_index = pinned_index;
    opt.pinned_value = pinned_value;
    auto spin_rng = derive_stream(seed, stream, sub::spins);
    const SpinConfig sc = glauber_sample(pop, g, mp, opt, spin_rng);
    return summarise(sc, pop);
}

} // namespace

ScenarioContext apply_scenario(const ScenarioContext& base, const Scenario& sc) {
    auto t = transform_context(base.pop, base.dt, sc);
    ScenarioContext out{std::move(t.pop),
                        std::move(t.dt),
                        transform_params(base.params, base.dt, base.pop.schema(), sc),
                        t.randomise_links || base.randomise_links,
                        std::move(t.pinned_index),
                        std::move(t.pinned_value),
                        std::move(t.excluded_sites)};
    return out;
}

InterventionResult run_scenario(const Population& pop, const DistanceTable& dt,
                                const GaussianPosterior& gp, const Scenario& sc, int reps,
                                const SamplerConfig& cfg, std::uint64_t seed, unsigned workers) {
    if (reps < 1) throw ConfigError("run_scenario: reps must be >= 1");
    const auto t = transform_context(pop, dt, sc);

    std::vector<std::size_t> reported;
    for (std::size_t z = 0; z < pop.site_count(); ++z)
        if (std::find(t.excluded_sites.begin(), t.excluded_sites.end(), z) ==
            t.excluded_sites.end())
            reported.push_back(z);
    if (reported.size() < 2) throw DataError("run_scenario: fewer than two reported sites");

    GlauberOptions opt;
    opt.sweeps = cfg.sweeps;
    opt.init = cfg.init;

    InterventionResult result;
    result.reported_site_ids.reserve(reported.size());
    for (const auto z : reported) result.reported_site_ids.push_back(pop.sites()[z].id);
    result.outcomes_base.resize(static_cast<std::size_t>(reps));
    result.outcomes_scenario.resize(static_cast<std::size_t>(reps));
    result.pol_base_reps.resize(static_cast<std::size_t>(reps));
    result.pol_scen_reps.resize(static_cast<std::size_t>(reps));

    parallel_for(static_cast<std::size_t>(reps), workers, [&](std::size_t r) {
        // paired parameter draw for both arms
        auto prop_rng = derive_stream(seed, 2 * r, sub::proposal);
        const ModelParams theta = gp.draw(prop_rng);
        const ModelParams theta_scen = transform_params(theta, dt, pop.schema(), sc);

        const Summary base_sum =
            simulate_arm(pop, dt, theta, opt, false, {}, {}, seed, 2 * r);
        const Summary scen_sum =
            simulate_arm(t.pop, t.dt, theta_scen, opt, t.randomise_links, t.pinned_index,
                         t.pinned_value, seed, 2 * r + 1);

        auto pick = [&](const Summary& s) {
            std::vector<double> v;
            v.reserve(reported.size());
            for (const auto z : reported) v.push_back(s.fractions[z]);
            return v;
        };
        result.outcomes_base[r] = pick(base_sum);
        result.outcomes_scenario[r] = pick(scen_sum);
        result.pol_base_reps[r] = polarisation(result.outcomes_base[r]);
        result.pol_scen_reps[r] = polarisation(result.outcomes_scenario[r]);
    });

    result.polarisation_base =
        std::accumulate(result.pol_base_reps.begin(), result.pol_base_reps.end(), 0.0) / reps;
    result.polarisation_scenario =
        std::accumulate(result.pol_scen_reps.begin(), result.pol_scen_reps.end(), 0.0) / reps;
    return result;
}

} // namespace kbi
