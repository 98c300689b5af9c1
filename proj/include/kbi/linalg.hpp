#ifndef KBI_LINALG_HPP
#define KBI_LINALG_HPP

#include <cstddef>
#include <vector>

// Dense helpers for the handful-of-parameters problems in this codebase
// (normal equations, posterior covariances). Row-major storage.

namespace kbi::linalg {

/// Cholesky factor L (lower) of a symmetric positive semidefinite matrix.
/// Diagonal pivots below `tol` times the largest diagonal are treated as
/// zero (their column of L is zeroed). Returns false on a negative pivot
/// beyond tolerance, i.e. the matrix is not PSD.
bool cholesky(const std::vector<double>& a, std::size_t n, std::vector<double>& l,
              double tol = 1e-12);

/// Solve A x = b given the Cholesky factor of A. Requires strictly positive
/// pivots (use for full-rank systems).
std::vector<double> solve_cholesky(const std::vector<double>& l, std::size_t n,
                                   const std::vector<double>& b);

/// True when every diagonal pivot of l is strictly positive (full rank).
bool full_rank(const std::vector<double>& l, std::size_t n, double tol = 1e-12);

} // namespace kbi::linalg

#endif // KBI_LINALG_HPP
