#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace pvlog {

/// SHA-256 of arbitrary bytes, lowercase hex.
std::string sha256_hex(std::string_view bytes);

/// FNV-1a 64-bit. Used only for deterministic mock seeding, never for content addressing.
std::uint64_t fnv1a64(std::string_view s);

/// splitmix64 finalizer; mixes seeds for mock providers.
std::uint64_t mix64(std::uint64_t x);

/// Combines two seeds into one.
inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b) {
    return mix64(a ^ mix64(b));
}

/// Uniform double in [0, 1) derived from a seed (stateless, platform-stable).
double seeded_unit(std::uint64_t seed);

std::string base64_encode(std::string_view bytes);
std::string base64_decode(std::string_view text);

/// Fixed-point formatting, e.g. format_fixed(0.5, 4) == "0.5000".
std::string format_fixed(double v, int decimals);

std::string read_file(const std::filesystem::path& p);
void write_file(const std::filesystem::path& p, std::string_view bytes);

/// write-temp-then-rename; the visible file is never partially written.
void atomic_write_file(const std::filesystem::path& p, std::string_view bytes);

/// Runs fn(i) for i in [0, n) on up to max_parallel threads. Rethrows the
/// first exception after all workers finish.
void parallel_for(std::size_t n, int max_parallel, const std::function<void(std::size_t)>& fn);

} // namespace pvlog
