#ifndef KBI_MANIFEST_HPP
#define KBI_MANIFEST_HPP

#include <cstdint>
#include <filesystem>
#include <string>

namespace kbi::manifest {

inline constexpr const char* version = "0.1.0";

std::uint64_t fnv1a64(const void* data, std::size_t size);
std::uint64_t hash_file(const std::filesystem::path& path);
std::string hex64(std::uint64_t value);

} // namespace kbi::manifest

#endif // KBI_MANIFEST_HPP
