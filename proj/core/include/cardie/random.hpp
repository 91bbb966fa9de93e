#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace cardie {

using Rng = std::mt19937_64;

/// Independent, reproducible stream seed for a keyed sub-task (e.g. one image id).
std::uint64_t derive_seed(std::uint64_t seed, std::string_view key);

inline Rng make_rng(std::uint64_t seed, std::string_view key) { return Rng(derive_seed(seed, key)); }

}  // namespace cardie
