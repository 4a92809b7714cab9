#pragma once

#include <cstdint>
#include <random>

namespace rwde {

/// A reproducible random stream. Streams are keyed by (master seed, unit
/// index): every unit of parallel work owns one, so results do not depend on
/// how units are scheduled onto workers.
///
/// Only the engine comes from the standard library (its output sequence is
/// fixed by the standard); the variate transforms below are ours so draws are
/// bit-identical across standard library implementations.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed, std::uint64_t unit = 0);

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform on (0, 1); safe to take logs of.
    double uniform_open() {
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal (Marsaglia polar method).
    double normal();

    /// Logarithm of a Gamma(shape, 1) variate. Working in log space keeps
    /// tiny shapes from underflowing to an exact zero.
    double log_gamma_variate(double shape);

    double gamma_variate(double shape);

private:
    std::mt19937_64 engine_;
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace rwde
