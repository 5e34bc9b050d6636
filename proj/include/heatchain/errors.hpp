#pragma once

/** @file errors.hpp
 *  @brief Exception types shared by all modules.
 */

#include <stdexcept>
#include <string>
#include <vector>

namespace heatchain {

/// Bad input: violated precondition, out-of-range parameter, malformed config.
struct ValidationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A computation failed to produce a trustworthy number (divergence,
/// non-convergence, non-finite state).
struct NumericalError : std::runtime_error {
    std::vector<std::string> trace;

    explicit NumericalError(const std::string& what, std::vector<std::string> tr = {})
        : std::runtime_error(what), trace(std::move(tr)) {}
};

inline void require(bool ok, const std::string& msg)
{
    if (!ok)
        throw ValidationError(msg);
}

} // namespace heatchain
