#include "genprior/rng.hpp"

#include <bit>
#include <cmath>
#include <numbers>

namespace genprior {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t mix64(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ULL;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBULL;
    x ^= x >> 31;
    return x;
}

std::uint64_t hash_words(std::initializer_list<std::uint64_t> words) {
    std::uint64_t h = mix64(0x6A09E667F3BCC909ULL);
    for (std::uint64_t w : words) {
        h = mix64(h + kGolden + w);
    }
    return h;
}

std::uint64_t double_bits(double v) { return std::bit_cast<std::uint64_t>(v); }

std::uint64_t CounterRng::next_u64() {
    ++counter_;
    return mix64(seed_ + counter_ * kGolden);
}

double CounterRng::uniform() {
    // (k + 0.5) / 2^53 lies strictly inside (0, 1).
    const std::uint64_t k = next_u64() >> 11;
    return (static_cast<double>(k) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_normal_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_normal_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
}

Eigen::VectorXd CounterRng::normal_vector(Eigen::Index n) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = normal();
    return v;
}

}  // namespace genprior
