#ifndef KBI_CALIBRATE_HPP
#define KBI_CALIBRATE_HPP

#include "kbi/blau.hpp"

#include <string>
#include <vector>

namespace kbi {

struct OlsResult {
    std::vector<std::string> dims;
    std::vector<double> coef;
    double intercept = 0.0;
};

/// Least squares of observed site fractions on the listed coordinate
/// dimensions plus an intercept; optionally population-weighted. Used to
/// anchor pinned field coefficients.
OlsResult ols(const Population& pop, const std::vector<std::string>& dims, bool weighted = false);

} // namespace kbi

#endif // KBI_CALIBRATE_HPP
