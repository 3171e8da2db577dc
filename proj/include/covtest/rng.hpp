#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include <boost/random/normal_distribution.hpp>

#include "covtest/linalg.hpp"

namespace covtest {

/// Generator used everywhere. Its output sequence is fixed by the standard.
using Engine = std::mt19937_64;

/// Named stream identifiers so that independent consumers of one user seed
/// never share a sequence.
enum class Stream : std::uint64_t {
    h0_trials = 1,
    h1_trials = 2,
    calibration = 3,
    quadratic_form = 4,
    scene = 5,
    data = 6,
};

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Counter-based seed for item `index` of `stream` under a user seed.
constexpr std::uint64_t derive_seed(std::uint64_t seed, Stream stream,
                                    std::uint64_t index) noexcept {
    return mix64(mix64(mix64(seed) ^ static_cast<std::uint64_t>(stream)) ^ index);
}

inline Engine make_engine(std::uint64_t seed, Stream stream, std::uint64_t index) {
    return Engine(derive_seed(seed, stream, index));
}

/// Standard normal via the ziggurat sampler from Boost.Random; unlike
/// std::normal_distribution its output is identical across standard libraries.
class NormalSource {
public:
    double operator()(Engine& engine) { return dist_(engine); }

    /// Circular complex normal with E|z|^2 = 1.
    cdouble complex(Engine& engine) {
        const double re = dist_(engine);
        const double im = dist_(engine);
        constexpr double scale = 1.0 / std::numbers::sqrt2;
        return {re * scale, im * scale};
    }

private:
    boost::random::normal_distribution<double> dist_;
};

}  // namespace covtest
