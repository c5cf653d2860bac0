#pragma once

#include <cstdint>
#include <initializer_list>

#include <Eigen/Core>

namespace genprior {

/// Counter-based generator: the k-th 64-bit output is SplitMix64's finalizer
/// applied to `seed + (k + 1) * 0x9E3779B97F4A7C15`. Normals come from the
/// Box-Muller transform on pairs of 53-bit uniforms, so a seed fixes the
/// whole stream bit-for-bit on any IEEE-754 platform with a correctly
/// rounded libm.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t next_u64();
    /// Uniform on the open interval (0, 1).
    double uniform();
    double normal();
    Eigen::VectorXd normal_vector(Eigen::Index n);

    std::uint64_t counter() const { return counter_; }

private:
    std::uint64_t seed_;
    std::uint64_t counter_ = 0;
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Order-sensitive hash of a list of 64-bit words, used for per-cell seeds.
std::uint64_t hash_words(std::initializer_list<std::uint64_t> words);

/// Bit pattern of a double, for hashing real-valued keys.
std::uint64_t double_bits(double v);

}  // namespace genprior
