#ifndef KBI_OBSERVATION_HPP
#define KBI_OBSERVATION_HPP

#include "kbi/blau.hpp"
#include "kbi/spin.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace kbi {

/// Observed outcomes at mixed resolution: a unit is either a single site or
/// a group of sites (e.g. a Borough whose wards were not released). Group
/// values compare against the population-weighted mean of member sites.
class Observation {
  public:
    struct Unit {
        std::string id;
        std::vector<std::size_t> site_idx;
        double weight = 0.0;               // sum of member populations
        std::optional<double> value;       // observed fraction, may be absent
    };

    /// One unit per site that carries an observed fraction.
    static Observation from_population(const Population& pop);

    /// CSV `site_id,n,S`; ids may name sites or groups. Overrides any
    /// fractions embedded in the population file.
    static Observation from_csv(const Population& pop, const std::filesystem::path& path);

    /// Units restricted to the given ids (site or group); order preserved.
    Observation subset(const Population& pop, const std::vector<std::string>& ids) const;

    const std::vector<Unit>& units() const { return units_; }
    bool all_observed() const;

    /// Simulated per-unit fractions (groups aggregated by population weight).
    std::vector<double> unit_values(const Summary& sim) const;

    /// Weighted mean absolute error between the simulation and the observed
    /// values, over units that carry a value.
    double distance(const Summary& sim) const;

  private:
    std::vector<Unit> units_;
};

} // namespace kbi

#endif // KBI_OBSERVATION_HPP
