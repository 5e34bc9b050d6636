#pragma once

/** @file stats.hpp
 *  @brief Batch-means estimation.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace heatchain {

struct Estimate {
    double mean = 0.0;
    double se = 0.0;
};

/// Mean and standard error from independent batch means.
inline Estimate batch_estimate(const std::vector<double>& batches)
{
    Estimate e;
    const std::size_t n = batches.size();
    if (n == 0)
        return e;
    double s = 0.0;
    for (double b : batches)
        s += b;
    e.mean = s / double(n);
    if (n < 2)
        return e;
    double v = 0.0;
    for (double b : batches)
        v += (b - e.mean) * (b - e.mean);
    v /= double(n - 1);
    e.se = std::sqrt(v / double(n));
    return e;
}

/// Accumulates K observables into B equal-length batches.
class BatchAccumulator {
public:
    BatchAccumulator(std::size_t n_obs, std::size_t n_batches, std::size_t samples_per_batch)
        : k_(n_obs), b_(n_batches), per_(samples_per_batch), sums_(n_obs * n_batches, 0.0)
    {
    }

    /// Adds one sample; `x` must hold n_obs values.
    void add(const double* x)
    {
        std::size_t batch = count_ / per_;
        if (batch >= b_)
            return;
        double* s = &sums_[batch * k_];
        for (std::size_t i = 0; i < k_; ++i)
            s[i] += x[i];
        ++count_;
    }

    std::size_t samples() const { return std::min(count_, b_ * per_); }
    std::size_t batches() const { return b_; }

    /// Batch mean of observable i in batch b.
    double batch_mean(std::size_t b, std::size_t i) const { return sums_[b * k_ + i] / double(per_); }

private:
    std::size_t k_, b_, per_;
    std::size_t count_ = 0;
    std::vector<double> sums_;
};

} // namespace heatchain
