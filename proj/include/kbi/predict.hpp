#ifndef KBI_PREDICT_HPP
#define KBI_PREDICT_HPP

#include "kbi/abc.hpp"
#include "kbi/observation.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace kbi {

/// Train/test partition. Train entries are site ids with observed outcomes;
/// test entries may be site or group ids.
struct SplitSpec {
    std::vector<std::string> train_ids;
    std::vector<std::string> test_ids;
};

/// CSV `id,role` with role in {train,test}.
SplitSpec load_split(const std::filesystem::path& path);

struct PredictionUnit {
    std::string id;
    double mean = 0.0;
    double stddev = 0.0;
    std::optional<double> truth;
};

struct PredictionResult {
    std::vector<PredictionUnit> units;
    /// Mean over simulations of the population-weighted test distance
    /// (NaN when no test unit carries a true outcome).
    double mean_test_distance = 0.0;
    double sem = 0.0;
    int simulations = 0;
};

/// Simulate the whole system for each of the T lowest-training-distance
/// parameter sets (`reps` spin draws each) and evaluate on the test units.
PredictionResult predict(const Population& pop, const DistanceTable& dt, const PosteriorSet& ps,
                         const Observation& test_obs, int T, int reps, const SamplerConfig& cfg,
                         std::uint64_t seed, unsigned workers);

/// Weighted average outcome over the training units; the null prediction.
double null_prediction(const Observation& train_obs);

/// Closed-form test distance of a constant prediction.
double null_test_distance(const Observation& test_obs, double prediction);

} // namespace kbi

#endif // KBI_PREDICT_HPP
