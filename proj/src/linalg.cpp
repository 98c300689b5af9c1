#include "kbi/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace kbi::linalg {

bool cholesky(const std::vector<double>& a, std::size_t n, std::vector<double>& l, double tol) {
    l.assign(n * n, 0.0);
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, std::abs(a[i * n + i]));
    const double cutoff = tol * std::max(scale, 1.0);

    for (std::size_t j = 0; j < n; ++j) {
        double d = a[j * n + j];
        for (std::size_t k = 0; k < j; ++k) d -= l[j * n + k] * l[j * n + k];
        if (d <= cutoff) {
            if (d < -cutoff) return false;
            // semidefinite direction: zero column
            for (std::size_t i = j; i < n; ++i) l[i * n + j] = 0.0;
            continue;
        }
        const double root = std::sqrt(d);
        l[j * n + j] = root;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a[i * n + j];
            for (std::size_t k = 0; k < j; ++k) s -= l[i * n + k] * l[j * n + k];
            l[i * n + j] = s / root;
        }
    }
    return true;
}

std::vector<double> solve_cholesky(const std::vector<double>& l, std::size_t n,
                                   const std::vector<double>& b) {
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= l[i * n + k] * y[k];
        y[i] = s / l[i * n + i];
    }
    std::vector<double> x(n);
    for (std::size_t ii = n; ii-- > 0;) {
        double s = y[ii];
        for (std::size_t k = ii + 1; k < n; ++k) s -= l[k * n + ii] * x[k];
        x[ii] = s / l[ii * n + ii];
    }
    return x;
}

bool full_rank(const std::vector<double>& l, std::size_t n, double tol) {
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, l[i * n + i]);
    for (std::size_t i = 0; i < n; ++i)
        if (l[i * n + i] <= tol * std::max(scale, 1.0)) return false;
    return true;
}

} // namespace kbi::linalg
