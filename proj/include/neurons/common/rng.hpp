#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace neurons {

using Rng = std::mt19937_64;

/// Derives an independent seed for a named sub-stream ("data", "init",
/// "mixco", "eval", ...) from a single root seed.
std::uint64_t derive_seed(std::uint64_t root, std::string_view stream);

inline Rng make_rng(std::uint64_t root, std::string_view stream) {
    return Rng(derive_seed(root, stream));
}

std::string serialize_rng(const Rng& rng);
Rng deserialize_rng(const std::string& text);

/// Beta(a, b) via the two-gamma construction.
double sample_beta(Rng& rng, double a, double b);

}  // namespace neurons
