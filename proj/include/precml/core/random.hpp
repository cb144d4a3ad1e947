#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace precml {

/// Generator used everywhere a seed appears. mt19937_64 output is fully
/// specified by the standard, so the helpers below stay bit-reproducible
/// across standard libraries (unlike std::uniform_real_distribution).
using Rng = std::mt19937_64;

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(Rng& rng, double lo, double hi) {
    const double x = lo + (hi - lo) * uniform01(rng);
    return x < hi ? x : std::nextafter(hi, lo);
}

/// Uniform integer in [0, n). Rejection sampling keeps it unbiased.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t r = rng();
    while (r >= limit) r = rng();
    return r % n;
}

/// Fisher-Yates; std::shuffle's algorithm is implementation-defined.
template <class T>
void shuffle(std::span<T> items, Rng& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(uniform_index(rng, i));
        std::swap(items[i - 1], items[j]);
    }
}

/// Standard normal via Box-Muller.
inline double normal01(Rng& rng) {
    double u1 = uniform01(rng);
    while (u1 <= 0.0) u1 = uniform01(rng);
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

/// Flat parameter vector for a dense layered network: for each layer the
/// row-major weight matrix (out x in) drawn from U(-1/sqrt(in), 1/sqrt(in)),
/// followed by a zero bias vector.
inline std::vector<double> fan_in_uniform_params(std::span<const int> layer_dims, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> params;
    for (std::size_t l = 0; l + 1 < layer_dims.size(); ++l) {
        const int in = layer_dims[l];
        const int out = layer_dims[l + 1];
        const double bound = 1.0 / std::sqrt(static_cast<double>(in));
        for (int i = 0; i < out * in; ++i) params.push_back(uniform(rng, -bound, bound));
        params.insert(params.end(), static_cast<std::size_t>(out), 0.0);
    }
    return params;
}

} // namespace precml
