#ifndef KBI_ERRORS_HPP
#define KBI_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace kbi {

/// Invalid run configuration: bad priors, bad scenario parameters, bad flags.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid or inconsistent input data: malformed CSV, broken invariants.
struct DataError : std::runtime_error {
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace kbi

#endif // KBI_ERRORS_HPP
