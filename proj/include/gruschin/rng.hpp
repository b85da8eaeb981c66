#pragma once

#include <cstdint>
#include <random>

namespace gruschin {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Splittable stream factory: stream(k) depends only on (master seed, k),
// never on which worker draws it or in what order.
class StreamFactory {
public:
    explicit StreamFactory(std::uint64_t master_seed) : master_(master_seed) {}

    Rng stream(std::uint64_t index) const {
        std::uint64_t s = master_ ^ (0xbf58476d1ce4e5b9ULL * (index + 1));
        std::uint64_t a = splitmix64(s);
        std::uint64_t b = splitmix64(s);
        std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                          static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
        return Rng(seq);
    }

    // Independent sub-factory for a named role (e.g. clocks vs increments).
    StreamFactory fork(std::uint64_t role) const {
        std::uint64_t s = master_ + 0x9e3779b97f4a7c15ULL * (role + 2);
        return StreamFactory(splitmix64(s));
    }

    std::uint64_t master() const { return master_; }

private:
    std::uint64_t master_;
};

inline double draw_normal(Rng& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    return n(rng);
}

inline double draw_uniform(Rng& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    return u(rng);
}

inline double draw_exponential(Rng& rng) {
    std::exponential_distribution<double> e(1.0);
    return e(rng);
}

} // namespace gruschin
