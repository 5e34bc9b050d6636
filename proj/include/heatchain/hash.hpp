#pragma once

/** @file hash.hpp
 *  @brief FNV-1a fingerprints for configs and results.
 */

#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

namespace heatchain {

inline std::uint64_t fnv1a64(std::string_view s)
{
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t h)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace heatchain
