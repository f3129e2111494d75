#include "rvl/phase.hpp"

#include <cassert>

namespace rvl {

namespace {

// Convert v * 2^{-shift} to double for a 128-bit v.  Splitting at 64 bits
// costs at most one extra rounding beyond the unavoidable one.
double ldexp_u128(unsigned __int128 v, int shift) {
    auto hi = static_cast<std::uint64_t>(v >> 64);
    auto lo = static_cast<std::uint64_t>(v);
    double d = std::ldexp(static_cast<double>(hi), 64) + static_cast<double>(lo);
    return std::ldexp(d, -shift);
}

}  // namespace

double frac_mul(double xi, std::int64_t m) {
    assert(xi >= 0.0 && xi < 1.0);
    if (xi == 0.0 || m == 0) return 0.0;

    bool neg = m < 0;
    std::uint64_t um = neg ? ~static_cast<std::uint64_t>(m) + 1  // handles INT64_MIN
                           : static_cast<std::uint64_t>(m);

    int e;
    double f = std::frexp(xi, &e);  // xi = f * 2^e, f in [0.5, 1), e <= 0
    auto mant = static_cast<std::uint64_t>(std::ldexp(f, 53));  // 53-bit integer
    int shift = 53 - e;                                         // >= 53

    double r;
    unsigned __int128 prod = static_cast<unsigned __int128>(um) * mant;
    if (shift >= 128) {
        // m * xi < 2^{117 - shift} <= 2^{-11}: nothing to reduce
        r = ldexp_u128(prod, shift);
    } else {
        unsigned __int128 mask = ((static_cast<unsigned __int128>(1) << shift) - 1);
        r = ldexp_u128(prod & mask, shift);
    }
    if (neg && r != 0.0) r = 1.0 - r;
    if (r >= 1.0) r -= 1.0;  // final-rounding guard
    return r;
}

double frac_dot(std::span<const double> xi, std::span<const std::int64_t> v) {
    assert(xi.size() == v.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < xi.size(); ++i) {
        acc += frac_mul(xi[i], v[i]);
        if (acc >= 1.0) acc -= 1.0;
    }
    return acc;
}

}  // namespace rvl
