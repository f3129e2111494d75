// =============================================================================
// Weyl-Vinogradov exponential sums over mixed integer/prime boxes.
//
//   S = sum_{x in D(N) cap Omega} e( P(x) ) phi(x) prod log p_j
//
// where each axis of D(N) ranges over integers in [-N,N], primes <= N, or
// signed primes, P(x) = sum_{0 < |gamma| <= deg} xi_gamma x^gamma with real
// coefficients, phi is an optional C^1 amplitude, and the log weights sit on
// the prime axes.  Phases are computed exactly: each coefficient is reduced
// mod 1 and multiplied against the integer monomial with full 53-bit
// fractional arithmetic, so cancellation in sums of 10^7 unimodular terms is
// genuine, not rounding noise.
//
// prime_weyl_sum is an independent evaluation of vartheta_B(N) m_N(xi) --
// different traversal, different accumulation order -- used as a consistency
// oracle against the multiplier module.
//
// The regularity scanner probes the progression-restricted bound behind the
// polynomially-regular-set definition: random P of degree d with leading
// coefficient a/q, (log N)^beta <= q <= N^d (log N)^{-beta}, and the ratio
//   max_r |sum_{n = r mod Q} e(P(n))| * Q (log N)^alpha / N
// reported per trial.
// =============================================================================
#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "rvl/lattice.hpp"
#include "rvl/numtheory.hpp"
#include "rvl/util.hpp"

namespace rvl {

enum class AxisSet { integers, primes, signed_primes, custom };

struct ExpSumSpec {
    int k = 1;
    std::vector<AxisSet> sets;
    std::vector<std::vector<i64>> custom_lists;  // per axis, used when sets[i] = custom
    std::function<bool(std::span<const i64>)> region;  // null = whole box
    const MultiIndexSet* G = nullptr;
    std::vector<double> poly;  // xi_gamma, indexed like G
    std::function<cplx(std::span<const double>)> amplitude;  // null = 1
    bool logweights = false;
};

struct WeylSum {
    cplx sum;
    double normalized = 0;  // |sum| / N^k
    i64 points = 0;
};
WeylSum weyl_sum(const ExpSumSpec& spec, i64 N, const PrimeTable& primes);

cplx prime_weyl_sum(std::span<const double> xi, const OrbitStructure& st,
                    const ConvexBody& B, const MultiIndexSet& G, i64 N,
                    const PrimeTable& primes);

struct RegularityTrial {
    i64 N = 0;
    i64 q = 0;
    i64 Q = 1;
    double ratio = 0;
    std::uint64_t seed = 0;
    bool skipped = false;  // q-window empty at this N
};
std::vector<RegularityTrial> regularity_scan(AxisSet axis, int degree,
                                             std::span<const i64> Nlist, i64 Q,
                                             double alpha, int trials,
                                             std::uint64_t seed,
                                             const PrimeTable& primes,
                                             double beta = 1.0);

}  // namespace rvl
