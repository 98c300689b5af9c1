#include "kbi/predict.hpp"

#include "kbi/csv.hpp"
#include "kbi/errors.hpp"
#include "kbi/parallel.hpp"
#include "kbi/synth.hpp"

#include <cmath>
#include <set>

namespace kbi {

SplitSpec load_split(const std::filesystem::path& path) {
    const auto table = csv::read(path);
    if (table.header != std::vector<std::string>{"id", "role"})
        throw DataError(path.string() + ": expected header id,role");
    SplitSpec split;
    std::set<std::string> seen;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const std::string where = path.string() + " row " + std::to_string(r + 2);
        if (!seen.insert(row[0]).second) throw DataError(where + ": duplicate id '" + row[0] + "'");
        if (row[1] == "train")
            split.train_ids.push_back(row[0]);
        else if (row[1] == "test")
            split.test_ids.push_back(row[0]);
        else
            throw DataError(where + ": role must be train or test, got '" + row[1] + "'");
    }
    return split;
}

PredictionResult predict(const Population& pop, const DistanceTable& dt, const PosteriorSet& ps,
                         const Observation& test_obs, int T, int reps, const SamplerConfig& cfg,
                         std::uint64_t seed, unsigned workers) {
    if (test_obs.units().empty()) throw DataError("predict: empty test set");
    if (T < 1 || static_cast<std::size_t>(T) > ps.samples.size())
        throw ConfigError("predict: T must satisfy 1 <= T <= kept samples");
    if (reps < 1) throw ConfigError("predict: reps must be >= 1");

    GlauberOptions opt;
    opt.sweeps = cfg.sweeps;
    opt.init = cfg.init;

    const std::size_t sims = static_cast<std::size_t>(T) * static_cast<std::size_t>(reps);
    const std::size_t nunits = test_obs.units().size();
    bool any_truth = false;
    for (const auto& u : test_obs.units()) any_truth |= u.value.has_value();

    std::vector<std::vector<double>> per_sim(sims);
    std::vector<double> distances(sims, 0.0);
    parallel_for(sims, workers, [&](std::size_t s) {
        const std::size_t t = s / static_cast<std::size_t>(reps);
        const ModelParams mp = ps.layout.unpack(ps.samples[t].params);
        const Summary sim = generate_snapshot(pop, dt, mp, opt, seed, s);
        per_sim[s] = test_obs.unit_values(sim);
        if (any_truth) distances[s] = test_obs.distance(sim);
    });

    PredictionResult result;
    result.simulations = static_cast<int>(sims);
    for (std::size_t k = 0; k < nunits; ++k) {
        PredictionUnit u;
        u.id = test_obs.units()[k].id;
        u.truth = test_obs.units()[k].value;
        double mean = 0.0;
        for (std::size_t s = 0; s < sims; ++s) mean += per_sim[s][k];
        mean /= static_cast<double>(sims);
        double var = 0.0;
        for (std::size_t s = 0; s < sims; ++s)
            var += (per_sim[s][k] - mean) * (per_sim[s][k] - mean);
        var = sims > 1 ? var / static_cast<double>(sims - 1) : 0.0;
        u.mean = mean;
        u.stddev = std::sqrt(var);
        result.units.push_back(std::move(u));
    }

    if (any_truth) {
        double mean = 0.0;
        for (const double d : distances) mean += d;
        mean /= static_cast<double>(sims);
        double var = 0.0;
        for (const double d : distances) var += (d - mean) * (d - mean);
        var = sims > 1 ? var / static_cast<double>(sims - 1) : 0.0;
        result.mean_test_distance = mean;
        result.sem = std::sqrt(var / static_cast<double>(sims));
    } else {
        result.mean_test_distance = std::numeric_limits<double>::quiet_NaN();
        result.sem = std::numeric_limits<double>::quiet_NaN();
    }
    return result;
}

double null_prediction(const Observation& train_obs) {
    double acc = 0.0, total = 0.0;
    for (const auto& u : train_obs.units()) {
        if (!u.value) throw DataError("null_prediction: training unit '" + u.id + "' unobserved");
        acc += u.weight * *u.value;
        total += u.weight;
    }
    if (total == 0.0) throw DataError("null_prediction: empty training set");
    return acc / total;
}

double null_test_distance(const Observation& test_obs, double prediction) {
    double acc = 0.0, total = 0.0;
    for (const auto& u : test_obs.units()) {
        if (!u.value) continue;
        acc += u.weight * std::abs(prediction - *u.value);
        total += u.weight;
    }
    if (total == 0.0) throw DataError("null_test_distance: no observed test units");
    return acc / total;
}

} // namespace kbi
