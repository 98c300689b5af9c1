#include "kbi/calibrate.hpp"

#include "kbi/errors.hpp"
#include "kbi/linalg.hpp"

namespace kbi {

OlsResult ols(const Population& pop, const std::vector<std::string>& dims, bool weighted) {
    if (dims.empty()) throw ConfigError("ols: no dimensions given");
    std::vector<std::size_t> cols;
    for (const auto& d : dims) {
        const int k = pop.schema().scalar_index(d);
        if (k < 0) throw ConfigError("ols: unknown dimension '" + d + "'");
        cols.push_back(static_cast<std::size_t>(k));
    }

    std::vector<std::size_t> rows;
    for (std::size_t z = 0; z < pop.site_count(); ++z)
        if (pop.sites()[z].observed_fraction) rows.push_back(z);
    const std::size_t p = dims.size() + 1; // intercept first
    if (rows.size() < p)
        throw DataError("ols: " + std::to_string(rows.size()) + " observed sites for " +
                        std::to_string(p) + " coefficients");

    // normal equations X'WX b = X'Wy
    std::vector<double> xtx(p * p, 0.0), xty(p, 0.0);
    for (const auto z : rows) {
        const auto& site = pop.sites()[z];
        std::vector<double> x(p, 1.0);
        for (std::size_t k = 0; k < cols.size(); ++k) x[k + 1] = site.coords[cols[k]];
        const double w = weighted ? static_cast<double>(site.population) : 1.0;
        const double y = *site.observed_fraction;
        for (std::size_t a = 0; a < p; ++a) {
            xty[a] += w * x[a] * y;
            for (std::size_t b = 0; b < p; ++b) xtx[a * p + b] += w * x[a] * x[b];
        }
    }

    std::vector<double> l;
    if (!linalg::cholesky(xtx, p, l) || !linalg::full_rank(l, p))
        throw DataError("ols: design matrix is rank deficient");
    const auto b = linalg::solve_cholesky(l, p, xty);

    OlsResult result;
    result.dims = dims;
    result.intercept = b[0];
    result.coef.assign(b.begin() + 1, b.end());
    return result;
}

} // namespace kbi
