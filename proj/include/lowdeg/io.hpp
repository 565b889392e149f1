#pragma once

// Output helpers: atomic file writes, stable hashes, provenance blocks.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>

namespace lowdeg {

std::uint64_t fnv1a64(std::span<const std::byte> bytes);
std::uint64_t fnv1a64(std::string_view text);
std::uint64_t fnv1a64(std::span<const double> values);

/// 16 lowercase hex digits.
std::string hex64(std::uint64_t value);

/// Writes to a sibling temporary file and renames it over `path`.
void atomic_write(const std::filesystem::path& path, std::string_view contents);

/// Library version string.
std::string_view version();

}  // namespace lowdeg
