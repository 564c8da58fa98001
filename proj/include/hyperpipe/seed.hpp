#pragma once

#include <cstdint>
#include <initializer_list>
#include <string>
#include <variant>
#include <vector>

namespace hyperpipe {

using ScopePart = std::variant<std::string, std::int64_t>;
using ScopePath = std::vector<ScopePart>;

/// Seed for a named scope of a run: the first 8 bytes (little-endian) of
/// SHA-256 over the master seed and the type-tagged path components.
std::uint64_t derive_seed(std::uint64_t master, const ScopePath& path);

}  // namespace hyperpipe
