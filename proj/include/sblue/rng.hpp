#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace sblue {

// Every random draw in the library flows through a named stream derived from
// a single 64-bit master seed.  A stream id is the master seed mixed with the
// hash of a "module/purpose" label, so independent consumers of the same seed
// never share state and results are reproducible run to run.

constexpr std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (char c : s) {
        h ^= static_cast<std::uint8_t>(c);
        h *= 0x100000001b3ull;
    }
    return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline std::uint64_t stream_id(std::uint64_t seed, std::string_view name) {
    return splitmix64(seed ^ fnv1a64(name));
}

// Indexed substream, e.g. one per experiment instance or per MC shard.
inline std::uint64_t stream_id(std::uint64_t seed, std::string_view name, std::uint64_t index) {
    return splitmix64(stream_id(seed, name) + 0x9e3779b97f4a7c15ull * (index + 1));
}

inline std::mt19937_64 make_engine(std::uint64_t seed, std::string_view name) {
    return std::mt19937_64(stream_id(seed, name));
}

inline std::mt19937_64 make_engine(std::uint64_t seed, std::string_view name, std::uint64_t index) {
    return std::mt19937_64(stream_id(seed, name, index));
}

// Uniform in [0,1) from the top 53 bits.  Used instead of the library
// distribution where sampled values must not depend on the standard library
// implementation (mask sampling, sensor placement).
inline double uniform01(std::mt19937_64& eng) {
    return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

}  // namespace sblue
