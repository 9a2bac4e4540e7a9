#pragma once
// Platform-stable hashing and keyed pseudo-random draws. Everything here is
// fully specified (FNV-1a, SplitMix64, std::mt19937_64) so draws are identical
// across compilers, standard libraries and hosts.

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <random>
#include <string>
#include <string_view>

namespace ccprobe {

// FNV-1a over the fields, each followed by a 0x1f unit separator so that
// ("ab","c") and ("a","bc") hash differently.
std::uint64_t stable_hash(std::initializer_list<std::string_view> fields) noexcept;

std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Engine seeded from hash(seed, fields...).
std::mt19937_64 keyed_engine(std::uint64_t seed,
                             std::initializer_list<std::string_view> fields);

// Unbiased draw in [0, n) by rejection. n must be > 0.
std::uint64_t uniform_index(std::mt19937_64& engine, std::uint64_t n);

// Deterministic value in [0, 1) keyed by (seed, fields...).
double keyed_unit(std::uint64_t seed,
                  std::initializer_list<std::string_view> fields) noexcept;

// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::string_view bytes);
// Streams the file; throws DataError when unreadable.
std::string sha256_file(const std::filesystem::path& path);

}  // namespace ccprobe
