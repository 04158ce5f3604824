#pragma once

#include <cstdint>
#include <random>

namespace pgsrhb {

// Deterministic random source. Every draw goes through next(), so the draw
// count alone describes the stream position: trial logs persist the cursor
// and resume fast-forwards a fresh engine with skip(). The mapping from raw
// 64-bit words to doubles and signs is done here rather than with
// std::uniform_*_distribution, whose output is implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() {
        ++draws_;
        return engine_();
    }

    // Uniform in [0, 1), 53-bit resolution.
    double real() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Uniform on {-1, +1}.
    std::int8_t sign() { return (next() >> 63) ? std::int8_t{1} : std::int8_t{-1}; }

    // Uniform integer in [0, bound). Single draw; the modulo bias is
    // negligible for the small bounds used here.
    std::uint64_t below(std::uint64_t bound) { return next() % bound; }

    std::uint64_t draws() const { return draws_; }

    // Advance as if `count` draws had been consumed.
    void skip(std::uint64_t count) {
        engine_.discard(count);
        draws_ += count;
    }

private:
    std::mt19937_64 engine_;
    std::uint64_t draws_ = 0;
};

}  // namespace pgsrhb
