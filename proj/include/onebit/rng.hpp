#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace onebit {

// Deterministic random stream. Every stochastic operation takes one of these
// explicitly, so results are pure functions of (inputs, stream state).
// Concurrent tasks must each derive their own stream; streams are never
// shared.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

    // Derive an independent stream from a master seed and up to four tags
    // (e.g. snr index, trial index, purpose).
    static RandomStream derive(std::uint64_t master, std::uint32_t t0, std::uint32_t t1 = 0,
                               std::uint32_t t2 = 0, std::uint32_t t3 = 0) {
        std::seed_seq seq{static_cast<std::uint32_t>(master & 0xffffffffu),
                          static_cast<std::uint32_t>(master >> 32), t0, t1, t2, t3};
        RandomStream s(0);
        s.engine_.seed(seq);
        return s;
    }

    // Uniform on [0,1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Uniform integer on [0, bound).
    std::uint64_t integer(std::uint64_t bound) { return engine_() % bound; }

    // Standard normal via Box-Muller; the second value of each pair is cached.
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;  // (0,1]
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 6.283185307179586 * u2;
        spare_ = r * std::sin(t);
        have_spare_ = true;
        return r * std::cos(t);
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace onebit
