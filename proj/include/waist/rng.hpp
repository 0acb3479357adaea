#pragma once

#include <cmath>
#include <cstdint>

namespace waist {

namespace detail {

// SplitMix64 finalizer. Full-period bijection on 64-bit words.
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

}  // namespace detail

/// Counter-based random stream keyed by (root_seed, stream_id).
///
/// The w-th output is a pure function of (root_seed, stream_id, w), so any
/// parallel schedule that assigns whole streams to workers reproduces the
/// same numbers bit for bit at every parallelism width.
class RngStream {
public:
    RngStream(std::uint64_t root_seed, std::uint64_t stream_id)
        : base_(derive(root_seed, stream_id)), counter_(0) {}

    std::uint64_t next_u64() {
        return detail::mix64(base_ + (++counter_) * 0x9E3779B97F4A7C15ull);
    }

    /// Uniform double in [0, 1).
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller; consumes two words per call.
    double next_normal() {
        const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;  // (0,1]
        const double u2 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
    }

    std::uint64_t counter() const { return counter_; }

private:
    static std::uint64_t derive(std::uint64_t root_seed, std::uint64_t stream_id) {
        return detail::mix64(detail::mix64(root_seed + 0x2545F4914F6CDD1Dull) ^
                             detail::mix64(stream_id ^ 0xD1B54A32D192ED03ull));
    }

    std::uint64_t base_;
    std::uint64_t counter_;
};

}  // namespace waist
