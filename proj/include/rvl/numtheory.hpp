// =============================================================================
// numtheory.hpp
//
// Prime sieving, multiplicative functions, Chebyshev sums in progressions,
// and best rational approximation.
//
//   theta(x; q, r) = sum_{p <= x, p = r mod q} log p
//
//   Ramanujan average:  (1/phi(q)) sum_{x in A_q} e^{2 pi i a x / q}
//                     = mu(q/g) / phi(q/g),  g = gcd(a, q)
//
//   Dirichlet: for any xi and Q >= 1 there are coprime a, q with
//   1 <= q <= Q and |xi - a/q| <= 1/(qQ); realized by continued-fraction
//   convergents.
//
// Everything is exact integer arithmetic except the log weights, which are
// double precision and summed pairwise so results do not depend on the
// thread count.
// =============================================================================

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "rvl/util.hpp"

namespace rvl {

using i64 = std::int64_t;

// -----------------------------------------------------------------------------
// PrimeTable: all primes <= limit, ascending, with cached natural logs.
// Immutable after construction; shareable across threads.
// -----------------------------------------------------------------------------
struct PrimeTable {
    i64 limit = 0;
    std::vector<i64> primes;
    std::vector<double> logs;       // logs[i] = log(primes[i])
    std::vector<std::uint8_t> mark; // mark[n] = 1 iff n prime, n <= limit

    bool is_prime(i64 n) const {
        return n >= 2 && n <= limit && mark[static_cast<std::size_t>(n)] != 0;
    }
    // number of primes <= x (x <= limit)
    std::size_t count_below(i64 x) const;
    double log_of(std::size_t idx) const { return logs[idx]; }
};

// Sieve of Eratosthenes.  limit < 2 is an error.
PrimeTable sieve_primes(i64 limit);

// Cached variant: looks for a binary dump under dir (or $RVL_SIEVE_CACHE when
// dir is empty), sieving and writing the dump on a miss.
PrimeTable sieve_primes_cached(i64 limit, const std::string& dir = "");

// -----------------------------------------------------------------------------
// Multiplicative arithmetic
// -----------------------------------------------------------------------------
i64 gcd_i64(i64 a, i64 b);

// prime factorization by trial division; pairs (p, exponent), p ascending
std::vector<std::pair<i64, int>> factorize(i64 q);

i64 totient(i64 q);   // q >= 1
int moebius(i64 q);   // q >= 1

// b^e mod m, m >= 1
i64 mod_pow(i64 b, i64 e, i64 m);
// inverse of a mod m; requires gcd(a, m) = 1
i64 mod_inv(i64 a, i64 m);

// Units mod q in ascending order.  Refuses q > 10^6: callers that would
// enumerate a unit group that large are doing something wrong.
std::vector<i64> unit_group(i64 q);

// mu(q/g)/phi(q/g) with g = gcd(a, q): the closed form the averaged
// exponential sum must reproduce.
double ramanujan_closed_form(i64 a, i64 q);

// (1/phi(q)) sum_{x in A_q} e^{2 pi i a x/q}, computed from the sum itself.
cplx ramanujan_average(i64 a, i64 q);

// -----------------------------------------------------------------------------
// Chebyshev function in progressions.  x must not exceed the sieve limit:
// silent truncation would fake the asymptotics downstream.
// -----------------------------------------------------------------------------
double theta_progression(double x, i64 q, i64 r, const PrimeTable& primes);

// -----------------------------------------------------------------------------
// Dirichlet approximation by continued fractions
// -----------------------------------------------------------------------------
struct RationalApprox {
    i64 a = 0;        // 1 <= a <= q, gcd(a, q) = 1
    i64 q = 0;
    double target = 0;
    double err = 0;   // torus distance |target - a/q| (so a/q = 1/1 means 0)
};

// xi is canonicalized to [0,1) first.  Guarantees q <= Q and
// err <= 1/(q Q).
RationalApprox dirichlet_approx(double xi, i64 Q);

// -----------------------------------------------------------------------------
// Factorization-valued integers: products like Q_s = (floor(e^{(s+1)^{rho/10}}))!
// overflow any fixed width long before they matter, so they are carried as
// exponent vectors.  Legendre: v_p(n!) = sum_j floor(n/p^j).
// -----------------------------------------------------------------------------
struct Factorized {
    std::vector<std::pair<i64, i64>> pe;  // (prime, exponent), prime ascending

    // value if it fits in int64, otherwise nullopt
    std::optional<i64> value() const;
    double log_value() const;
    bool divides(const Factorized& other) const;
    Factorized pow(i64 k) const;
    Factorized times(const Factorized& other) const;
};

Factorized factorial_factorized(i64 n);
Factorized factorize_value(i64 n);

}  // namespace rvl
