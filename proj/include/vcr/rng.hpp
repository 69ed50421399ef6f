#pragma once

#include <cstdint>
#include <random>

namespace vcr {

// SplitMix64 finalizer. Good avalanche, used only to derive stream seeds.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Seed for stream `index` within `domain`, keyed on the master seed only,
// so a trial's draws never depend on which thread runs it.
constexpr std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index,
                                    std::uint64_t domain = 0) {
    return mix64(mix64(mix64(master) ^ domain) + index);
}

// Named purposes for fleet sub-streams; keeps arrivals common across
// strategies so repetitions can be paired.
enum class StreamDomain : std::uint64_t {
    Trial = 0,
    VehicleArrivals = 1,
    AppArrivals = 2,
    Recruitment = 3,
    Algebra = 4,
    MonteCarlo = 5,
};

class Stream {
public:
    explicit Stream(std::uint64_t seed) : eng_(seed) {}
    Stream(std::uint64_t master, std::uint64_t index, StreamDomain d = StreamDomain::Trial)
        : eng_(stream_seed(master, index, static_cast<std::uint64_t>(d))) {}

    // Open interval (0,1) from the top 53 bits; portable across standard libraries.
    double uniform01() {
        return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53;
    }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
    double exponential(double rate);
    std::uint64_t bits() { return eng_(); }

private:
    std::mt19937_64 eng_;
};

}  // namespace vcr
