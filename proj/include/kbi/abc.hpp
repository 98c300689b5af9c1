#ifndef KBI_ABC_HPP
#define KBI_ABC_HPP

#include "kbi/blau.hpp"
#include "kbi/observation.hpp"
#include "kbi/spin.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace kbi {

/// Canonical parameter vector shared by priors, posterior files and the
/// Gaussian fit: beta, J, h0, h_<scalar dims...>, theta0, theta_<dist dims...>.
class ParamLayout {
  public:
    static ParamLayout for_schema(const DimSchema& schema);

    const std::vector<std::string>& names() const { return names_; }
    std::size_t size() const { return names_.size(); }
    int index(const std::string& name) const; // -1 when absent

    std::vector<double> pack(const ModelParams& mp) const;
    ModelParams unpack(const std::vector<double>& v) const;

    bool operator==(const ParamLayout&) const = default;

  private:
    std::vector<std::string> names_;
    std::size_t scalar_dims_ = 0;
    std::size_t dist_dims_ = 0;
};

/// Per-parameter uniform prior bounds or pinned values. Every parameter of
/// the layout must be covered exactly once; h0 defaults to pinned 0.
class PriorSpec {
  public:
    explicit PriorSpec(ParamLayout layout);

    void pin(const std::string& name, double value);
    void range(const std::string& name, double lo, double hi);

    /// Throws ConfigError when a parameter is uncovered, doubly covered,
    /// has lo >= hi, or allows negative beta.
    void validate() const;

    ModelParams draw(Xoshiro256& rng) const;
    std::vector<std::string> free_names() const;
    const ParamLayout& layout() const { return layout_; }
    bool is_pinned(const std::string& name) const;
    std::pair<double, double> bounds(const std::string& name) const;

  private:
    struct Entry {
        enum class Kind { unset, pinned, uniform } kind = Kind::unset;
        double value = 0.0, lo = 0.0, hi = 0.0;
    };
    ParamLayout layout_;
    std::vector<Entry> entries_;

    Entry& entry(const std::string& name);
};

struct SamplerConfig {
    std::int64_t sweeps = 2000;
    SpinInit init = SpinInit::field_aligned;
};

struct PosteriorSample {
    std::vector<double> params; // packed, full layout
    double eta = 0.0;
    std::uint64_t draw_index = 0;
};

struct PosteriorSet {
    ParamLayout layout;
    std::vector<std::string> free_names;
    std::vector<PosteriorSample> samples; // ascending (eta, draw_index)
    std::uint64_t budget = 0;
};

/// Rejection ABC: `budget` independent (draw parameters -> sample graph ->
/// sample spins -> summarise -> distance) evaluations; the `keep` lowest-
/// distance draws are returned. Pure function of (seed, priors, data);
/// worker count only changes wall time.
PosteriorSet run_abc(const Population& pop, const DistanceTable& dt, const PriorSpec& priors,
                     const Observation& observed, std::uint64_t budget, std::uint64_t keep,
                     const SamplerConfig& cfg, std::uint64_t seed, unsigned workers);

struct MarginalHistogram {
    std::string name;
    std::vector<double> edges;        // bins+1
    std::vector<std::int64_t> counts; // bins
    std::vector<double> kde_x, kde_y; // Gaussian KDE, Silverman bandwidth
};
std::vector<MarginalHistogram> marginal_histograms(const PosteriorSet& ps, int bins);

/// Multivariate Gaussian over the free parameters (sample mean/covariance).
class GaussianPosterior {
  public:
    GaussianPosterior(ParamLayout layout, std::vector<std::string> free_names,
                      std::vector<double> pinned_template, std::vector<double> mean,
                      std::vector<double> cov);

    const std::vector<std::string>& names() const { return names_; }
    const std::vector<double>& mean() const { return mean_; }
    const std::vector<double>& cov() const { return cov_; }
    const ParamLayout& layout() const { return layout_; }
    const std::vector<double>& pinned_template() const { return template_; }

    /// Draw model parameters; beta is clamped at 0.
    ModelParams draw(Xoshiro256& rng) const;

  private:
    ParamLayout layout_;
    std::vector<std::string> names_;
    std::vector<double> template_; // packed params carrying pinned values
    std::vector<double> mean_;
    std::vector<double> cov_;  // d*d
    std::vector<double> chol_; // lower factor of cov
};

GaussianPosterior gaussian_fit(const PosteriorSet& ps);

struct CoverageEntry {
    std::string name;
    double lo = 0.0, hi = 0.0;
    bool inside = false;
};
/// Central `level` interval of each free marginal vs the true value.
std::vector<CoverageEntry> coverage_check(const PosteriorSet& ps, const ModelParams& truth,
                                          double level);

/// Posterior CSV: draw_index,eta,<all parameter columns>.
void save_posterior(const PosteriorSet& ps, const std::filesystem::path& path);
PosteriorSet load_posterior(const ParamLayout& layout, const std::vector<std::string>& free_names,
                            const std::filesystem::path& path);

} // namespace kbi

#endif // KBI_ABC_HPP
