#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace gpsq {

// splitmix64 finalizer, used to whiten (seed, stream) pairs before they
// reach the engine so that nearby seeds give unrelated streams.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Reproducible random stream.  The same (seed, stream_id) pair always yields
// the same draw sequence; distinct stream ids decorrelate substreams of one
// run (class 1 input, class 2 input, replication k, ...).
class RngStream {
public:
    explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0)
        : seed_(seed),
          stream_id_(stream_id),
          engine_(splitmix64(splitmix64(seed) ^ splitmix64(~stream_id))) {}

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }

    std::uint64_t next_u64() { return engine_(); }

    // Uniform on (0,1]: 53-bit resolution, never 0, can return exactly 1.
    // Suitable as the plug-in for inverse-CDF tails of the form u^(-1/a).
    double uniform_open_closed() {
        return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
    }

    // Uniform on the open interval (0,1): never returns either endpoint.
    double uniform_open() {
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Uniform on (lo, hi).
    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform_open();
    }

    // Exponential with the given rate (mean 1/rate).
    double exponential(double rate) {
        return -std::log(uniform_open()) / rate;
    }

    // Standard exponential, mean 1.
    double exponential() { return -std::log(uniform_open()); }

private:
    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::mt19937_64 engine_;
};

}  // namespace gpsq
