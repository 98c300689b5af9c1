#include "kbi/blau.hpp"

#include "kbi/csv.hpp"
#include "kbi/errors.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace kbi {

std::vector<std::string> DimSchema::distance_dims() const {
    auto dims = scalar_dims;
    if (has_spatial) dims.push_back("distance");
    return dims;
}

int DimSchema::scalar_index(const std::string& name) const {
    for (std::size_t i = 0; i < scalar_dims.size(); ++i)
        if (scalar_dims[i] == name) return static_cast<int>(i);
    return -1;
}

Population::Population(DimSchema schema, std::vector<Site> sites)
    : schema_(std::move(schema)), sites_(std::move(sites)) {
    offsets_.reserve(sites_.size() + 1);
    offsets_.push_back(0);
    for (std::size_t z = 0; z < sites_.size(); ++z) {
        const Site& s = sites_[z];
        if (s.population < 1)
            throw DataError("site '" + s.id + "': population must be >= 1, got " +
                            std::to_string(s.population));
        if (s.observed_fraction && (*s.observed_fraction < 0.0 || *s.observed_fraction > 1.0))
            throw DataError("site '" + s.id + "': observed fraction outside [0,1]");
        if (s.coords.size() != schema_.scalar_dims.size())
            throw DataError("site '" + s.id + "': expected " +
                            std::to_string(schema_.scalar_dims.size()) + " coordinates, got " +
                            std::to_string(s.coords.size()));
        if (!index_.emplace(s.id, z).second)
            throw DataError("duplicate site id '" + s.id + "'");
        if (!s.group.empty()) groups_[s.group].push_back(z);
        total_spins_ += s.population;
        offsets_.push_back(total_spins_);
    }
    if (sites_.empty()) throw DataError("population has no sites");
}

const std::vector<std::uint32_t>& Population::site_of_spin() const {
    if (site_of_.empty()) {
        site_of_.resize(static_cast<std::size_t>(total_spins_));
        for (std::size_t z = 0; z < sites_.size(); ++z)
            for (std::int64_t i = offsets_[z]; i < offsets_[z + 1]; ++i)
                site_of_[static_cast<std::size_t>(i)] = static_cast<std::uint32_t>(z);
    }
    return site_of_;
}

int Population::site_index(const std::string& id) const {
    auto it = index_.find(id);
    return it == index_.end() ? -1 : static_cast<int>(it->second);
}

Population Population::with_coords(
    const std::string& dim, const std::vector<std::pair<std::size_t, double>>& changes) const {
    const int k = schema_.scalar_index(dim);
    if (k < 0) throw ConfigError("unknown dimension '" + dim + "'");
    auto sites = sites_;
    for (const auto& [z, value] : changes) sites.at(z).coords[static_cast<std::size_t>(k)] = value;
    return Population(schema_, std::move(sites));
}

Population load_population(const std::filesystem::path& path,
                           const std::map<std::string, double>& multipliers) {
    const auto table = csv::read(path);
    const auto& h = table.header;
    if (h.empty() || h[0] != "id")
        throw DataError(path.string() + ": first column must be 'id'");

    DimSchema schema;
    schema.multipliers = multipliers;
    bool has_group = !h.empty() && h.back() == "group";
    const std::size_t ncols = h.size() - (has_group ? 1 : 0);

    // id, <scalar dims...>, [x_km, y_km,] n, S
    if (ncols < 3 || h[ncols - 2] != "n" || h[ncols - 1] != "S")
        throw DataError(path.string() + ": header must end with n,S[,group]");
    std::size_t dim_end = ncols - 2;
    if (dim_end >= 3 && h[dim_end - 2] == "x_km" && h[dim_end - 1] == "y_km") {
        schema.has_spatial = true;
        dim_end -= 2;
    }
    for (std::size_t c = 1; c < dim_end; ++c) {
        if (h[c] == "x_km" || h[c] == "y_km")
            throw DataError(path.string() + ": x_km,y_km must be adjacent and precede n");
        schema.scalar_dims.push_back(h[c]);
    }
    for (const auto& [name, m] : multipliers)
        if (schema.scalar_index(name) < 0)
            throw ConfigError("multiplier for unknown dimension '" + name + "'");

    std::vector<Site> sites;
    sites.reserve(table.rows.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const std::string where = path.string() + " row " + std::to_string(r + 2);
        Site site;
        std::size_t c = 0;
        site.id = row[c++];
        if (site.id.empty()) throw DataError(where + ": empty id");
        for (const auto& dim : schema.scalar_dims) {
            double v = csv::parse_double(row[c++], where + " (" + dim + ")");
            auto it = multipliers.find(dim);
            if (it != multipliers.end()) v *= it->second;
            site.coords.push_back(v);
        }
        if (schema.has_spatial) {
            site.x_km = csv::parse_double(row[c++], where + " (x_km)");
            site.y_km = csv::parse_double(row[c++], where + " (y_km)");
        }
        site.population = csv::parse_int(row[c++], where + " (n)");
        if (!row[c].empty())
            site.observed_fraction = csv::parse_double(row[c], where + " (S)");
        ++c;
        if (has_group) site.group = row[c];
        sites.push_back(std::move(site));
    }
    return Population(std::move(schema), std::move(sites));
}

void save_population(const Population& pop, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    const auto& schema = pop.schema();
    out << "id";
    for (const auto& d : schema.scalar_dims) out << ',' << d;
    if (schema.has_spatial) out << ",x_km,y_km";
    out << ",n,S";
    bool any_group = false;
    for (const auto& s : pop.sites()) any_group |= !s.group.empty();
    if (any_group) out << ",group";
    out << '\n';
    for (const auto& s : pop.sites()) {
        out << s.id;
        for (double v : s.coords) out << ',' << csv::format_double(v);
        if (schema.has_spatial)
            out << ',' << csv::format_double(s.x_km) << ',' << csv::format_double(s.y_km);
        out << ',' << s.population << ',';
        if (s.observed_fraction) out << csv::format_double(*s.observed_fraction);
        if (any_group) out << ',' << s.group;
        out << '\n';
    }
}

DistanceTable::DistanceTable(std::size_t site_count, std::vector<Dim> dims, bool standardised)
    : site_count_(site_count), dims_(std::move(dims)), standardised_(standardised) {}

int DistanceTable::dim_index(const std::string& name) const {
    for (std::size_t i = 0; i < dims_.size(); ++i)
        if (dims_[i].name == name) return static_cast<int>(i);
    return -1;
}

DistanceTable raw_distances(const Population& pop) {
    const auto& sites = pop.sites();
    const std::size_t c = sites.size();
    std::vector<DistanceTable::Dim> dims;

    const auto& scalar = pop.schema().scalar_dims;
    for (std::size_t k = 0; k < scalar.size(); ++k) {
        DistanceTable::Dim dim;
        dim.name = scalar[k];
        dim.values.resize(c * c);
        for (std::size_t i = 0; i < c; ++i)
            for (std::size_t j = 0; j <= i; ++j) {
                const double d = std::abs(sites[i].coords[k] - sites[j].coords[k]);
                dim.values[i * c + j] = d;
                dim.values[j * c + i] = d;
            }
        dims.push_back(std::move(dim));
    }
    if (pop.schema().has_spatial) {
        DistanceTable::Dim dim;
        dim.name = "distance";
        dim.values.resize(c * c);
        for (std::size_t i = 0; i < c; ++i)
            for (std::size_t j = 0; j <= i; ++j) {
                const double d = std::hypot(sites[i].x_km - sites[j].x_km,
                                            sites[i].y_km - sites[j].y_km);
                dim.values[i * c + j] = d;
                dim.values[j * c + i] = d;
            }
        dims.push_back(std::move(dim));
    }
    return DistanceTable(c, std::move(dims), false);
}

namespace {

// Off-diagonal mean and population std over unordered pairs.
std::pair<double, double> offdiag_moments(const std::vector<double>& values, std::size_t c) {
    double sum = 0.0, sumsq = 0.0;
    const double npairs = 0.5 * static_cast<double>(c) * static_cast<double>(c - 1);
    for (std::size_t i = 0; i < c; ++i)
        for (std::size_t j = i + 1; j < c; ++j) {
            const double d = values[i * c + j];
            sum += d;
            sumsq += d * d;
        }
    const double mean = sum / npairs;
    const double var = sumsq / npairs - mean * mean;
    return {mean, std::sqrt(std::max(var, 0.0))};
}

} // namespace

DistanceTable standardise(const DistanceTable& dt) {
    const std::size_t c = dt.site_count();
    if (c < 2) throw DataError("standardise: need at least two sites");
    std::vector<DistanceTable::Dim> dims = dt.dims();
    for (auto& dim : dims) {
        const auto [mean, sd] = offdiag_moments(dim.values, c);
        if (!(sd > 0.0))
            throw DataError("standardise: dimension '" + dim.name + "' has zero variance");
        const double scale = 1.0 / (2.0 * sd);
        for (auto& v : dim.values) v = (v - mean) * scale;
        dim.mean = mean;
        dim.std_dev = sd;
    }
    return DistanceTable(c, std::move(dims), true);
}

DistanceTable DistanceTable::with_dim_restandardised(const Population& pop,
                                                     const std::string& name) const {
    if (!standardised_) throw ConfigError("with_dim_restandardised: table is not standardised");
    const int k = dim_index(name);
    if (k < 0) throw ConfigError("unknown distance dimension '" + name + "'");
    const int sk = pop.schema().scalar_index(name);
    if (sk < 0) throw ConfigError("dimension '" + name + "' is not a scalar coordinate");

    auto dims = dims_;
    auto& dim = dims[static_cast<std::size_t>(k)];
    const double scale = 1.0 / (2.0 * dim.std_dev);
    const auto& sites = pop.sites();
    const std::size_t c = site_count_;
    if (sites.size() != c) throw DataError("population/table size mismatch");
    for (std::size_t i = 0; i < c; ++i)
        for (std::size_t j = 0; j <= i; ++j) {
            const double d = std::abs(sites[i].coords[static_cast<std::size_t>(sk)] -
                                      sites[j].coords[static_cast<std::size_t>(sk)]);
            const double v = (d - dim.mean) * scale;
            dim.values[i * c + j] = v;
            dim.values[j * c + i] = v;
        }
    return DistanceTable(c, std::move(dims), true);
}

} // namespace kbi
