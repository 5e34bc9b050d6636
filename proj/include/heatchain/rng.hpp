#pragma once

/** @file rng.hpp
 *  @brief Deterministic per-stream random engines keyed by (seed, stream id).
 */

#include <boost/random/normal_distribution.hpp>

#include <cstdint>
#include <random>

namespace heatchain {

using Engine = std::mt19937_64;

/// Engine for stream `stream` of master seed `seed`. Distinct (seed, stream,
/// purpose) triples give statistically independent streams.
inline Engine make_engine(std::uint64_t seed, std::uint64_t stream, std::uint64_t purpose = 0)
{
    std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32), std::uint32_t(stream),
                      std::uint32_t(stream >> 32), std::uint32_t(purpose), 0x6c8e9cf5u};
    return Engine(seq);
}

/// Standard normal sampler (ziggurat) bound to an engine.
class Gaussian {
public:
    explicit Gaussian(Engine& eng) : eng_(&eng) {}
    double operator()() { return dist_(*eng_); }

private:
    Engine* eng_;
    boost::random::normal_distribution<double> dist_{0.0, 1.0};
};

} // namespace heatchain
