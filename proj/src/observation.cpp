#include "kbi/observation.hpp"

#include "kbi/csv.hpp"
#include "kbi/errors.hpp"

#include <cmath>
#include <set>

namespace kbi {

namespace {

Observation::Unit site_unit(const Population& pop, std::size_t z) {
    Observation::Unit u;
    u.id = pop.sites()[z].id;
    u.site_idx = {z};
    u.weight = static_cast<double>(pop.sites()[z].population);
    return u;
}

Observation::Unit group_unit(const Population& pop, const std::string& id,
                             const std::vector<std::size_t>& members) {
    Observation::Unit u;
    u.id = id;
    u.site_idx = members;
    for (const auto z : members) u.weight += static_cast<double>(pop.sites()[z].population);
    return u;
}

} // namespace

Observation Observation::from_population(const Population& pop) {
    Observation obs;
    for (std::size_t z = 0; z < pop.site_count(); ++z) {
        if (!pop.sites()[z].observed_fraction) continue;
        auto u = site_unit(pop, z);
        u.value = pop.sites()[z].observed_fraction;
        obs.units_.push_back(std::move(u));
    }
    if (obs.units_.empty()) throw DataError("population carries no observed fractions");
    return obs;
}

Observation Observation::from_csv(const Population& pop, const std::filesystem::path& path) {
    const auto table = csv::read(path);
    if (table.header != std::vector<std::string>{"site_id", "n", "S"})
        throw DataError(path.string() + ": expected header site_id,n,S");
    Observation obs;
    std::set<std::string> seen;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const std::string where = path.string() + " row " + std::to_string(r + 2);
        if (!seen.insert(row[0]).second) throw DataError(where + ": duplicate unit '" + row[0] + "'");
        Unit u;
        const int z = pop.site_index(row[0]);
        if (z >= 0) {
            u = site_unit(pop, static_cast<std::size_t>(z));
        } else {
            auto it = pop.groups().find(row[0]);
            if (it == pop.groups().end())
                throw DataError(where + ": unknown site or group '" + row[0] + "'");
            u = group_unit(pop, row[0], it->second);
        }
        if (!row[2].empty()) {
            const double s = csv::parse_double(row[2], where + " (S)");
            if (s < 0.0 || s > 1.0) throw DataError(where + ": S outside [0,1]");
            u.value = s;
        }
        obs.units_.push_back(std::move(u));
    }
    if (obs.units_.empty()) throw DataError(path.string() + ": no observation rows");
    return obs;
}

Observation Observation::subset(const Population& pop, const std::vector<std::string>& ids) const {
    Observation out;
    for (const auto& id : ids) {
        bool found = false;
        for (const auto& u : units_)
            if (u.id == id) {
                out.units_.push_back(u);
                found = true;
                break;
            }
        if (found) continue;
        // Units without an observation row are still predictable targets.
        const int z = pop.site_index(id);
        if (z >= 0) {
            out.units_.push_back(site_unit(pop, static_cast<std::size_t>(z)));
            const auto& s = pop.sites()[static_cast<std::size_t>(z)];
            if (s.observed_fraction) out.units_.back().value = s.observed_fraction;
        } else {
            auto it = pop.groups().find(id);
            if (it == pop.groups().end()) throw DataError("unknown site or group '" + id + "'");
            out.units_.push_back(group_unit(pop, id, it->second));
        }
    }
    if (out.units_.empty()) throw DataError("subset selects no units");
    return out;
}

bool Observation::all_observed() const {
    for (const auto& u : units_)
        if (!u.value) return false;
    return true;
}

std::vector<double> Observation::unit_values(const Summary& sim) const {
    std::vector<double> out(units_.size());
    for (std::size_t k = 0; k < units_.size(); ++k) {
        const auto& u = units_[k];
        double acc = 0.0;
        for (const auto z : u.site_idx) acc += sim.weights[z] * sim.fractions[z];
        out[k] = acc / u.weight;
    }
    return out;
}

double Observation::distance(const Summary& sim) const {
    const auto values = unit_values(sim);
    double acc = 0.0, total = 0.0;
    for (std::size_t k = 0; k < units_.size(); ++k) {
        if (!units_[k].value) continue;
        acc += units_[k].weight * std::abs(values[k] - *units_[k].value);
        total += units_[k].weight;
    }
    if (total == 0.0) throw DataError("distance: no observed units");
    return acc / total;
}

} // namespace kbi
