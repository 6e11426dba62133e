#include "neurons/common/rng.hpp"

#include <sstream>

#include "neurons/common/error.hpp"

namespace neurons {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t root, std::string_view stream) {
    std::uint64_t h = splitmix64(root);
    for (unsigned char c : stream) h = splitmix64(h ^ c);
    return h;
}

std::string serialize_rng(const Rng& rng) {
    std::ostringstream os;
    os << rng;
    return os.str();
}

Rng deserialize_rng(const std::string& text) {
    std::istringstream is(text);
    Rng rng;
    is >> rng;
    if (!is) throw IntegrityError("malformed RNG state");
    return rng;
}

double sample_beta(Rng& rng, double a, double b) {
    if (a <= 0.0 || b <= 0.0) throw DomainError("beta parameters must be positive");
    std::gamma_distribution<double> ga(a, 1.0);
    std::gamma_distribution<double> gb(b, 1.0);
    const double x = ga(rng);
    const double y = gb(rng);
    if (x + y == 0.0) return 0.5;
    return x / (x + y);
}

}  // namespace neurons
