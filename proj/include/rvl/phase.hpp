// =============================================================================
// phase.hpp
//
// Exact reduction of phases mod 1 and unimodular evaluation.
//
// The sums evaluated here look like
//
//   S = sum_z w(z) e^{2 pi i <xi, z>},   z in Z^d, |z| as large as N^{|gamma|}
//
// with N^{|gamma|} up to 2^62.  A naive double product xi * z loses the low
// bits of the phase: at z ~ 2^42 the absolute phase error is ~2^-10, which is
// catastrophic after reduction mod 1.  Instead we use the exact identity
//
//   xi = mant * 2^{-shift}   (mant: the 53-bit significand, shift = 53 - exp)
//   frac(m * xi) = ((m * mant) mod 2^{shift}) * 2^{-shift},
//
// with the 128-bit product m * mant computed exactly.  The only rounding is
// the final conversion to double, so the returned fraction is correct to one
// ulp no matter how large m is.
//
// Rational phases avoid floating point altogether: <a, Q(x)> mod q is formed
// in integer arithmetic and looked up in a q-th root-of-unity table.
// =============================================================================

#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "rvl/util.hpp"

namespace rvl {

inline constexpr double kTwoPi = 6.28318530717958647692;

// e^{2 pi i t}
inline cplx unit_phase(double t) {
    return {std::cos(kTwoPi * t), std::sin(kTwoPi * t)};
}

// frac(m * xi) in [0,1) for xi in [0,1), exact up to the final rounding.
double frac_mul(double xi, std::int64_t m);

// frac(<xi, v>) via per-component frac_mul; the d-term accumulation is plain
// double addition of values in [0,1), so the result carries O(d) ulp error.
double frac_dot(std::span<const double> xi, std::span<const std::int64_t> v);

// canonicalize any real to [0,1)
inline double torus_reduce(double x) {
    double r = x - std::floor(x);
    if (r >= 1.0) r = 0.0;  // guards x = -eps rounding up
    return r;
}

// distance on the circle R/Z
inline double torus_dist(double x, double y) {
    double t = torus_reduce(x - y);
    return std::min(t, 1.0 - t);
}

// -----------------------------------------------------------------------------
// Root-of-unity table: w[r] = e^{2 pi i r/q}.  Exact residue in, one lookup
// out; the workhorse of every complete rational sum.
// -----------------------------------------------------------------------------
struct RootTable {
    std::int64_t q;
    std::vector<cplx> w;

    explicit RootTable(std::int64_t q_) : q(q_), w(static_cast<std::size_t>(q_)) {
        for (std::int64_t r = 0; r < q; ++r)
            w[static_cast<std::size_t>(r)] = unit_phase(static_cast<double>(r) / static_cast<double>(q));
    }
    const cplx& operator[](std::int64_t r) const { return w[static_cast<std::size_t>(r)]; }
};

}  // namespace rvl
