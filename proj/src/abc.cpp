#include "kbi/abc.hpp"

#include "kbi/csv.hpp"
#include "kbi/errors.hpp"
#include "kbi/linalg.hpp"
#include "kbi/parallel.hpp"
#include "kbi/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

namespace kbi {

ParamLayout ParamLayout::for_schema(const DimSchema& schema) {
    ParamLayout layout;
    layout.scalar_dims_ = schema.scalar_dims.size();
    layout.names_ = {"beta", "J", "h0"};
    for (const auto& d : schema.scalar_dims) layout.names_.push_back("h_" + d);
    layout.names_.push_back("theta0");
    const auto dist = schema.distance_dims();
    layout.dist_dims_ = dist.size();
    for (const auto& d : dist) layout.names_.push_back("theta_" + d);
    return layout;
}

int ParamLayout::index(const std::string& name) const {
    for (std::size_t i = 0; i < names_.size(); ++i)
        if (names_[i] == name) return static_cast<int>(i);
    return -1;
}

std::vector<double> ParamLayout::pack(const ModelParams& mp) const {
    if (mp.fields.coef.size() != scalar_dims_ || mp.kernel.coef.size() != dist_dims_)
        throw ConfigError("pack: parameter/layout dimension mismatch");
    std::vector<double> v;
    v.reserve(size());
    v.push_back(mp.beta);
    v.push_back(mp.coupling);
    v.push_back(mp.fields.h0);
    v.insert(v.end(), mp.fields.coef.begin(), mp.fields.coef.end());
    v.push_back(mp.kernel.bias);
    v.insert(v.end(), mp.kernel.coef.begin(), mp.kernel.coef.end());
    return v;
}

ModelParams ParamLayout::unpack(const std::vector<double>& v) const {
    if (v.size() != size()) throw ConfigError("unpack: wrong parameter vector length");
    ModelParams mp;
    std::size_t c = 0;
    mp.beta = v[c++];
    mp.coupling = v[c++];
    mp.fields.h0 = v[c++];
    mp.fields.coef.assign(v.begin() + static_cast<std::ptrdiff_t>(c),
                          v.begin() + static_cast<std::ptrdiff_t>(c + scalar_dims_));
    c += scalar_dims_;
    mp.kernel.bias = v[c++];
    mp.kernel.coef.assign(v.begin() + static_cast<std::ptrdiff_t>(c),
                          v.begin() + static_cast<std::ptrdiff_t>(c + dist_dims_));
    return mp;
}

PriorSpec::PriorSpec(ParamLayout layout)
    : layout_(std::move(layout)), entries_(layout_.size()) {}

PriorSpec::Entry& PriorSpec::entry(const std::string& name) {
    const int i = layout_.index(name);
    if (i < 0) throw ConfigError("unknown parameter '" + name + "'");
    auto& e = entries_[static_cast<std::size_t>(i)];
    if (e.kind != Entry::Kind::unset)
        throw ConfigError("parameter '" + name + "' specified twice");
    return e;
}

void PriorSpec::pin(const std::string& name, double value) {
    auto& e = entry(name);
    e.kind = Entry::Kind::pinned;
    e.value = value;
}

void PriorSpec::range(const std::string& name, double lo, double hi) {
    auto& e = entry(name);
    if (!(lo < hi))
        throw ConfigError("parameter '" + name + "': lower bound " + csv::format_double(lo) +
                          " must be below upper bound " + csv::format_double(hi));
    e.kind = Entry::Kind::uniform;
    e.lo = lo;
    e.hi = hi;
}

void PriorSpec::validate() const {
    bool any = false;
    for (std::size_t i = 0; i < entries_.size(); ++i)
        any |= entries_[i].kind != Entry::Kind::unset;
    if (!any) throw ConfigError("empty priors: no parameter is pinned or given a range");
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        const auto& e = entries_[i];
        const auto& name = layout_.names()[i];
        if (e.kind == Entry::Kind::unset) {
            if (name == "h0") continue; // defaults to pinned 0
            throw ConfigError("parameter '" + name + "' is neither pinned nor given a prior");
        }
        if (name == "beta") {
            if (e.kind == Entry::Kind::pinned && e.value < 0.0)
                throw ConfigError("beta pinned below 0");
            if (e.kind == Entry::Kind::uniform && e.lo < 0.0)
                throw ConfigError("beta prior extends below 0");
        }
    }
}

ModelParams PriorSpec::draw(Xoshiro256& rng) const {
    std::vector<double> v(entries_.size());
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        const auto& e = entries_[i];
        switch (e.kind) {
        case Entry::Kind::pinned: v[i] = e.value; break;
        case Entry::Kind::uniform: v[i] = rng.uniform(e.lo, e.hi); break;
        case Entry::Kind::unset: v[i] = 0.0; break; // h0 default
        }
    }
    return layout_.unpack(v);
}

std::vector<std::string> PriorSpec::free_names() const {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < entries_.size(); ++i)
        if (entries_[i].kind == Entry::Kind::uniform) out.push_back(layout_.names()[i]);
    return out;
}

bool PriorSpec::is_pinned(const std::string& name) const {
    const int i = layout_.index(name);
    if (i < 0) throw ConfigError("unknown parameter '" + name + "'");
    return entries_[static_cast<std::size_t>(i)].kind != Entry::Kind::uniform;
}

std::pair<double, double> PriorSpec::bounds(const std::string& name) const {
    const int i = layout_.index(name);
    if (i < 0) throw ConfigError("unknown parameter '" + name + "'");
    const auto& e = entries_[static_cast<std::size_t>(i)];
    if (e.kind != Entry::Kind::uniform) throw ConfigError("parameter '" + name + "' is pinned");
    return {e.lo, e.hi};
}

PosteriorSet run_abc(const Population& pop, const DistanceTable& dt, const PriorSpec& priors,
                     const Observation& observed, std::uint64_t budget, std::uint64_t keep,
                     const SamplerConfig& cfg, std::uint64_t seed, unsigned workers) {
    priors.validate();
    if (budget == 0) throw ConfigError("budget must be >= 1");
    if (keep == 0 || keep > budget)
        throw ConfigError("keep must satisfy 1 <= keep <= budget");
    if (pop.site_count() != dt.site_count())
        throw DataError("run_abc: population/distance table mismatch");
    bool any_value = false;
    for (const auto& u : observed.units()) {
        any_value |= u.value.has_value();
        for (const auto z : u.site_idx)
            if (z >= pop.site_count()) throw DataError("run_abc: observation/population mismatch");
    }
    if (!any_value) throw DataError("run_abc: observation carries no values");

    GlauberOptions opt;
    opt.sweeps = cfg.sweeps;
    opt.init = cfg.init;

    std::vector<PosteriorSample> all(budget);
    parallel_for(budget, workers, [&](std::size_t i) {
        auto prop_rng = derive_stream(seed, i, sub::proposal);
        const ModelParams mp = priors.draw(prop_rng);
        const Summary sim = generate_snapshot(pop, dt, mp, opt, seed, i);
        all[i] = {priors.layout().pack(mp), observed.distance(sim), i};
    });

    std::sort(all.begin(), all.end(), [](const PosteriorSample& a, const PosteriorSample& b) {
        if (a.eta != b.eta) return a.eta < b.eta;
        return a.draw_index < b.draw_index;
    });
    all.resize(keep);

    PosteriorSet ps;
    ps.layout = priors.layout();
    ps.free_names = priors.free_names();
    ps.samples = std::move(all);
    ps.budget = budget;
    return ps;
}

namespace {

std::vector<double> free_column(const PosteriorSet& ps, const std::string& name) {
    const int idx = ps.layout.index(name);
    if (idx < 0) throw ConfigError("unknown parameter '" + name + "'");
    std::vector<double> col(ps.samples.size());
    for (std::size_t k = 0; k < ps.samples.size(); ++k)
        col[k] = ps.samples[k].params[static_cast<std::size_t>(idx)];
    return col;
}

} // namespace

std::vector<MarginalHistogram> marginal_histograms(const PosteriorSet& ps, int bins) {
    if (ps.samples.empty()) throw DataError("marginal_histograms: empty posterior set");
    if (bins < 1) throw ConfigError("marginal_histograms: bins must be >= 1");
    std::vector<MarginalHistogram> out;
    for (const auto& name : ps.free_names) {
        MarginalHistogram h;
        h.name = name;
        auto col = free_column(ps, name);
        const auto [mn_it, mx_it] = std::minmax_element(col.begin(), col.end());
        double lo = *mn_it, hi = *mx_it;
        int nb = bins;
        if (lo == hi) { // degenerate: single spike
            lo -= 0.5;
            hi += 0.5;
            nb = 1;
        }
        const double width = (hi - lo) / nb;
        h.edges.resize(static_cast<std::size_t>(nb) + 1);
        for (int b = 0; b <= nb; ++b) h.edges[static_cast<std::size_t>(b)] = lo + width * b;
        h.counts.assign(static_cast<std::size_t>(nb), 0);
        for (const double v : col) {
            auto b = static_cast<std::int64_t>((v - lo) / width);
            b = std::clamp<std::int64_t>(b, 0, nb - 1);
            ++h.counts[static_cast<std::size_t>(b)];
        }

        // Gaussian KDE with Silverman's bandwidth on a fixed grid.
        const double n = static_cast<double>(col.size());
        double mean = 0.0;
        for (const double v : col) mean += v;
        mean /= n;
        double var = 0.0;
        for (const double v : col) var += (v - mean) * (v - mean);
        var /= std::max(n - 1.0, 1.0);
        const double sd = std::sqrt(var);
        const double bw = sd > 0.0 ? 1.06 * sd * std::pow(n, -0.2) : 0.0;
        if (bw > 0.0) {
            const int grid = 128;
            const double g_lo = lo - 3.0 * bw, g_hi = hi + 3.0 * bw;
            for (int gix = 0; gix < grid; ++gix) {
                const double x = g_lo + (g_hi - g_lo) * gix / (grid - 1);
                double dens = 0.0;
                for (const double v : col) {
                    const double t = (x - v) / bw;
                    dens += std::exp(-0.5 * t * t);
                }
                dens /= n * bw * std::sqrt(2.0 * 3.14159265358979323846);
                h.kde_x.push_back(x);
                h.kde_y.push_back(dens);
            }
        } else {
            h.kde_x = {mean};
            h.kde_y = {1.0};
        }
        out.push_back(std::move(h));
    }
    return out;
}

GaussianPosterior::GaussianPosterior(ParamLayout layout, std::vector<std::string> free_names,
                                     std::vector<double> pinned_template, std::vector<double> mean,
                                     std::vector<double> cov)
    : layout_(std::move(layout)), names_(std::move(free_names)), template_(std::move(pinned_template)),
      mean_(std::move(mean)), cov_(std::move(cov)) {
    const std::size_t d = names_.size();
    if (mean_.size() != d || cov_.size() != d * d || template_.size() != layout_.size())
        throw ConfigError("GaussianPosterior: inconsistent dimensions");
    if (!linalg::cholesky(cov_, d, chol_))
        throw DataError("GaussianPosterior: covariance is not positive semidefinite");
}

ModelParams GaussianPosterior::draw(Xoshiro256& rng) const {
    const std::size_t d = names_.size();
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> z(d);
    for (auto& v : z) v = normal(rng);
    std::vector<double> packed = template_;
    for (std::size_t i = 0; i < d; ++i) {
        double x = mean_[i];
        for (std::size_t k = 0; k <= i; ++k) x += chol_[i * d + k] * z[k];
        packed[static_cast<std::size_t>(layout_.index(names_[i]))] = x;
    }
    const int beta_idx = layout_.index("beta");
    packed[static_cast<std::size_t>(beta_idx)] = std::max(0.0, packed[static_cast<std::size_t>(beta_idx)]);
    return layout_.unpack(packed);
}

GaussianPosterior gaussian_fit(const PosteriorSet& ps) {
    const std::size_t k = ps.samples.size();
    if (k < 2) throw DataError("gaussian_fit: need at least two samples");
    const std::size_t d = ps.free_names.size();
    std::vector<std::vector<double>> cols(d);
    for (std::size_t j = 0; j < d; ++j) cols[j] = free_column(ps, ps.free_names[j]);

    std::vector<double> mean(d, 0.0);
    for (std::size_t j = 0; j < d; ++j) {
        for (const double v : cols[j]) mean[j] += v;
        mean[j] /= static_cast<double>(k);
    }
    std::vector<double> cov(d * d, 0.0);
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = a; b < d; ++b) {
            double s = 0.0;
            for (std::size_t r = 0; r < k; ++r)
                s += (cols[a][r] - mean[a]) * (cols[b][r] - mean[b]);
            s /= static_cast<double>(k - 1);
            cov[a * d + b] = s;
            cov[b * d + a] = s;
        }
    return GaussianPosterior(ps.layout, ps.free_names, ps.samples.front().params, std::move(mean),
                             std::move(cov));
}

std::vector<CoverageEntry> coverage_check(const PosteriorSet& ps, const ModelParams& truth,
                                          double level) {
    if (ps.samples.empty()) throw DataError("coverage_check: empty posterior set");
    if (level <= 0.0 || level > 1.0) throw ConfigError("coverage_check: level must be in (0,1]");
    const auto packed = ps.layout.pack(truth);
    std::vector<CoverageEntry> out;
    for (const auto& name : ps.free_names) {
        auto col = free_column(ps, name);
        std::sort(col.begin(), col.end());
        const double tail = (1.0 - level) / 2.0;
        auto quantile = [&](double q) {
            const double pos = q * static_cast<double>(col.size() - 1);
            const auto i = static_cast<std::size_t>(pos);
            const double frac = pos - static_cast<double>(i);
            return i + 1 < col.size() ? col[i] * (1.0 - frac) + col[i + 1] * frac : col[i];
        };
        CoverageEntry e;
        e.name = name;
        e.lo = quantile(tail);
        e.hi = quantile(1.0 - tail);
        const double t = packed[static_cast<std::size_t>(ps.layout.index(name))];
        e.inside = e.lo <= t && t <= e.hi;
        out.push_back(e);
    }
    return out;
}

void save_posterior(const PosteriorSet& ps, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    out << "draw_index,eta";
    for (const auto& name : ps.layout.names()) out << ',' << name;
    out << '\n';
    for (const auto& s : ps.samples) {
        out << s.draw_index << ',' << csv::format_double(s.eta);
        for (const double v : s.params) out << ',' << csv::format_double(v);
        out << '\n';
    }
}

PosteriorSet load_posterior(const ParamLayout& layout, const std::vector<std::string>& free_names,
                            const std::filesystem::path& path) {
    const auto table = csv::read(path);
    if (table.header.size() != layout.size() + 2 || table.header[0] != "draw_index" ||
        table.header[1] != "eta")
        throw DataError(path.string() + ": unexpected posterior header");
    for (std::size_t i = 0; i < layout.size(); ++i)
        if (table.header[i + 2] != layout.names()[i])
            throw DataError(path.string() + ": parameter column mismatch at '" +
                            table.header[i + 2] + "'");
    PosteriorSet ps;
    ps.layout = layout;
    ps.free_names = free_names;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const std::string where = path.string() + " row " + std::to_string(r + 2);
        PosteriorSample s;
        s.draw_index = static_cast<std::uint64_t>(csv::parse_int(row[0], where));
        s.eta = csv::parse_double(row[1], where);
        for (std::size_t i = 0; i < layout.size(); ++i)
            s.params.push_back(csv::parse_double(row[i + 2], where));
        ps.samples.push_back(std::move(s));
    }
    ps.budget = ps.samples.size();
    return ps;
}

} // namespace kbi
