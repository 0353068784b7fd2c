#pragma once

#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace mvh {

/// Compensated (Kahan) accumulator. Summation order still matters, so
/// reductions that must be reproducible feed values in a fixed order.
class KahanSum {
public:
    void add(double x) {
        const double y = x - carry_;
        const double t = sum_ + y;
        carry_ = (t - sum_) - y;
        sum_ = t;
    }
    double value() const { return sum_; }

private:
    double sum_ = 0.0;
    double carry_ = 0.0;
};

/// Serialize a double with 17 significant digits (round-trip exact).
inline std::string format17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

/// FNV-1a 64-bit hash, used for provenance headers.
inline std::uint64_t fnv1a64(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

/// Numerical failure inside a solver or estimator.
struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invalid model, claim or configuration input.
struct ValidationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

} // namespace mvh
