#ifndef KBI_BLAU_HPP
#define KBI_BLAU_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace kbi {

/// Column layout of a population: named scalar dimensions (age, income, ...)
/// plus an optional (x_km,y_km) spatial pair that collapses to a single
/// Euclidean "distance" dimension. Multipliers rescale coordinates at
/// ingestion (default 1).
struct DimSchema {
    std::vector<std::string> scalar_dims;
    bool has_spatial = false;
    std::map<std::string, double> multipliers;

    /// Distance-dimension names: scalar dims in order, then "distance"
    /// when a spatial block exists.
    std::vector<std::string> distance_dims() const;
    int scalar_index(const std::string& name) const; // -1 when absent
};

/// One populated Blau-space coordinate (ward, grid cell).
struct Site {
    std::string id;
    std::vector<double> coords; // scalar dims, schema order
    double x_km = 0.0;          // spatial block, valid iff schema.has_spatial
    double y_km = 0.0;
    std::int64_t population = 0;            // n_z, spins at this site
    std::optional<double> observed_fraction; // S_z in [0,1], may be missing
    std::string group; // optional coarser unit (e.g. Borough), "" = none
};

/// Immutable after construction; share read-only across workers.
class Population {
  public:
    Population(DimSchema schema, std::vector<Site> sites);

    const DimSchema& schema() const { return schema_; }
    const std::vector<Site>& sites() const { return sites_; }
    std::size_t site_count() const { return sites_.size(); }
    std::int64_t total_spins() const { return total_spins_; }

    /// Spin index range of site z: [offset(z), offset(z+1)).
    std::int64_t spin_offset(std::size_t z) const { return offsets_[z]; }
    /// Site owning a spin index; lookup table of size N.
    const std::vector<std::uint32_t>& site_of_spin() const;

    int site_index(const std::string& id) const; // -1 when absent
    /// group id -> member site indices (insertion order).
    const std::map<std::string, std::vector<std::size_t>>& groups() const { return groups_; }

    /// Copy with one scalar coordinate changed (site index -> new value).
    Population with_coords(const std::string& dim,
                           const std::vector<std::pair<std::size_t, double>>& changes) const;

  private:
    DimSchema schema_;
    std::vector<Site> sites_;
    std::vector<std::int64_t> offsets_;
    std::int64_t total_spins_ = 0;
    std::map<std::string, std::size_t> index_;
    std::map<std::string, std::vector<std::size_t>> groups_;
    mutable std::vector<std::uint32_t> site_of_; // built on first use
};

/// Header `id,<dim1>,...,<dimK>[,x_km,y_km],n,S[,group]`; empty S = missing.
Population load_population(const std::filesystem::path& path,
                           const std::map<std::string, double>& multipliers = {});
void save_population(const Population& pop, const std::filesystem::path& path);

/// Per-dimension C x C pairwise site distances.
class DistanceTable {
  public:
    struct Dim {
        std::string name;
        std::vector<double> values; // C*C, symmetric, row-major
        double mean = 0.0;          // standardisation parameters (off-diagonal)
        double std_dev = 0.0;
    };

    DistanceTable(std::size_t site_count, std::vector<Dim> dims, bool standardised);

    std::size_t site_count() const { return site_count_; }
    std::size_t dim_count() const { return dims_.size(); }
    bool standardised() const { return standardised_; }
    const std::vector<Dim>& dims() const { return dims_; }
    int dim_index(const std::string& name) const; // -1 when absent

    double at(std::size_t dim, std::size_t i, std::size_t j) const {
        return dims_[dim].values[i * site_count_ + j];
    }

    /// Re-derive one dimension from new coordinates but map it through
    /// previously fitted (mean, 2*std) so kernel coefficients keep their
    /// meaning. Only valid on a standardised table.
    DistanceTable with_dim_restandardised(const Population& pop, const std::string& dim) const;

  private:
    std::size_t site_count_;
    std::vector<Dim> dims_;
    bool standardised_;
};

/// Per-dimension |z_ik - z_jk|; the spatial pair collapses to one Euclidean
/// distance dimension (km).
DistanceTable raw_distances(const Population& pop);

/// Affine map d' = (d - mean) / (2 std) per dimension, fitted on off-diagonal
/// entries and applied to the whole matrix (diagonal becomes the image of 0,
/// typically negative). Off-diagonal entries end up with mean 0, std 0.5.
DistanceTable standardise(const DistanceTable& dt);

} // namespace kbi

#endif // KBI_BLAU_HPP
