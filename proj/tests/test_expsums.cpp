// =============================================================================
// Exponential-sum tests.  Alternating-sign hand values on tiny integer boxes
// (e(x/2) = (-1)^x), log-weighted prime sums recovering the Chebyshev
// normalizer, the independent prime Weyl evaluation against vartheta m_N, and
// the regularity scanner's window logic and determinism.
// =============================================================================

#include <cmath>
#include <complex>
#include <vector>

#include "doctest.h"
#include "rvl/expsums.hpp"
#include "rvl/lattice.hpp"
#include "rvl/multipliers.hpp"
#include "rvl/numtheory.hpp"
#include "rvl/util.hpp"

using namespace rvl;

// -----------------------------------------------------------------------------
// weyl_sum on integer boxes
// -----------------------------------------------------------------------------
TEST_CASE("weyl sums: alternating hand values on integer boxes") {
    PrimeTable primes = sieve_primes(50);
    MultiIndexSet G = build_gamma(1, 1);

    ExpSumSpec spec;
    spec.k = 1;
    spec.sets = {AxisSet::integers};
    spec.G = &G;
    spec.poly = {0.5};
    WeylSum s = weyl_sum(spec, 3, primes);
    CHECK(s.points == 7);  // -3..3
    CHECK(std::abs(s.sum - cplx(-1.0, 0.0)) < 1e-14);

    spec.poly = {0.25};
    s = weyl_sum(spec, 2, primes);
    CHECK(std::abs(s.sum - cplx(-1.0, 0.0)) < 1e-14);  // i^{-2..2} telescopes

    spec.poly = {0.0};
    s = weyl_sum(spec, 3, primes);
    CHECK(s.sum == cplx(7.0, 0.0));
    CHECK(s.normalized == doctest::Approx(7.0 / 3.0));

    // region restriction to the positive half
    spec.poly = {0.5};
    spec.region = [](std::span<const i64> pt) { return pt[0] > 0; };
    s = weyl_sum(spec, 3, primes);
    CHECK(s.points == 3);
    CHECK(std::abs(s.sum - cplx(-1.0, 0.0)) < 1e-14);
    spec.region = nullptr;

    // odd amplitude against even phase cancels over the symmetric box
    spec.amplitude = [](std::span<const double> x) { return cplx(x[0], 0.0); };
    s = weyl_sum(spec, 3, primes);
    CHECK(std::abs(s.sum) < 1e-13);
    spec.amplitude = nullptr;

    ExpSumSpec bad = spec;
    bad.poly = {0.5, 0.1};
    CHECK_THROWS(weyl_sum(bad, 3, primes));
    bad = spec;
    bad.sets = {};
    CHECK_THROWS(weyl_sum(bad, 3, primes));
    bad = spec;
    bad.G = nullptr;
    CHECK_THROWS(weyl_sum(bad, 3, primes));
}

TEST_CASE("weyl sums: prime axes carry the log weights") {
    PrimeTable primes = sieve_primes(50);
    MultiIndexSet G = build_gamma(1, 1);

    ExpSumSpec spec;
    spec.k = 1;
    spec.sets = {AxisSet::primes};
    spec.G = &G;
    spec.poly = {0.0};
    WeylSum s = weyl_sum(spec, 10, primes);
    CHECK(s.points == 4);
    CHECK(s.sum == cplx(4.0, 0.0));
    spec.logweights = true;
    s = weyl_sum(spec, 10, primes);
    CHECK(s.sum.real() == doctest::Approx(std::log(210.0)).epsilon(1e-14));

    spec.sets = {AxisSet::signed_primes};
    s = weyl_sum(spec, 10, primes);
    CHECK(s.points == 8);
    CHECK(s.sum.real() == doctest::Approx(2.0 * std::log(210.0)).epsilon(1e-14));

    // e(p/2) + e(-p/2) = 2 (-1)^p
    spec.poly = {0.5};
    s = weyl_sum(spec, 10, primes);
    double want = 2.0 * (2.0 * std::log(2.0) - std::log(210.0));
    CHECK(s.sum.real() == doctest::Approx(want).epsilon(1e-13));
    CHECK(std::abs(s.sum.imag()) < 1e-13);

    ExpSumSpec cust;
    cust.k = 1;
    cust.sets = {AxisSet::custom};
    cust.custom_lists = {{-1, 1}};
    cust.G = &G;
    cust.poly = {0.5};
    s = weyl_sum(cust, 3, primes);
    CHECK(std::abs(s.sum - cplx(-2.0, 0.0)) < 1e-14);
    cust.custom_lists = {{25}};
    CHECK_THROWS(weyl_sum(cust, 3, primes));  // outside the bounding cube

    PrimeTable shallow = sieve_primes(5);
    CHECK_THROWS(weyl_sum(spec, 10, shallow));
}

TEST_CASE("weyl sums are invariant under the thread count") {
    PrimeTable primes = sieve_primes(10);
    MultiIndexSet G = build_gamma(1, 3);
    ExpSumSpec spec;
    spec.k = 1;
    spec.sets = {AxisSet::integers};
    spec.G = &G;
    spec.poly = {0.3247, 0.111, 0.077};
    set_thread_count(1);
    WeylSum s1 = weyl_sum(spec, 200, primes);
    set_thread_count(4);
    WeylSum s4 = weyl_sum(spec, 200, primes);
    set_thread_count(0);
    CHECK(s1.sum.real() == s4.sum.real());
    CHECK(s1.sum.imag() == s4.sum.imag());
    CHECK(s1.points == s4.points);
}

// -----------------------------------------------------------------------------
// prime_weyl_sum as a multiplier oracle
// -----------------------------------------------------------------------------
TEST_CASE("prime weyl sum reproduces vartheta times the average multiplier") {
    PrimeTable primes = sieve_primes(200);
    ConvexBody B = ConvexBody::cube(1);
    MultiIndexSet G = build_gamma(1, 2);
    OrbitStructure st{0, 1, false};
    WeightedOrbit orb = enumerate_orbit(B, 50, st, G, primes);

    for (std::vector<double> xi : {std::vector<double>{0.123, 0.456},
                                   std::vector<double>{1.0 / 3.0, 0.0}}) {
        cplx pws = prime_weyl_sum(xi, st, B, G, 50, primes);
        std::vector<RationalFrequency> one{pure_offset(xi)};
        cplx mh = m_hat(one, orb)[0];
        CHECK(std::abs(pws - orb.vartheta * mh) < 1e-10);
    }

    // mixed integer/prime axes on the square
    ConvexBody C2 = ConvexBody::cube(2);
    MultiIndexSet G22 = build_gamma(2, 2);
    OrbitStructure st2{1, 1, false};
    WeightedOrbit orb2 = enumerate_orbit(C2, 20, st2, G22, primes);
    std::vector<double> xi2(8, 0.0);
    xi2[0] = 0.21;
    xi2[5] = 0.83;
    cplx pws2 = prime_weyl_sum(xi2, st2, C2, G22, 20, primes);
    std::vector<RationalFrequency> one2{pure_offset(xi2)};
    CHECK(std::abs(pws2 - orb2.vartheta * m_hat(one2, orb2)[0]) < 1e-9);

    // signed variant
    OrbitStructure sts{0, 1, true};
    WeightedOrbit orbs = enumerate_orbit(B, 50, sts, G, primes);
    std::vector<double> xis{0.37, 0.05};
    cplx pwss = prime_weyl_sum(xis, sts, B, G, 50, primes);
    CHECK(std::abs(pwss - orbs.vartheta * m_hat(std::vector<RationalFrequency>{pure_offset(xis)},
                                                orbs)[0]) < 1e-10);

    std::vector<double> badxi{0.1};
    CHECK_THROWS(prime_weyl_sum(badxi, st, B, G, 50, primes));
    PrimeTable shallow = sieve_primes(10);
    CHECK_THROWS(prime_weyl_sum(xis, st, B, G, 50, shallow));
}

// -----------------------------------------------------------------------------
// regularity scanner
// -----------------------------------------------------------------------------
TEST_CASE("regularity scan: rows, q-window, reproducibility") {
    PrimeTable primes = sieve_primes(4096);
    std::vector<i64> Ns{64, 256, 1024};
    auto rows = regularity_scan(AxisSet::primes, 2, Ns, 4, 2.0, 3, 11, primes);
    REQUIRE(rows.size() == 9);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& t = rows[i];
        CHECK(t.N == Ns[i / 3]);
        CHECK_FALSE(t.skipped);
        CHECK(t.Q == 4);
        CHECK(t.q >= 2);
        double lnN = std::log(static_cast<double>(t.N));
        CHECK(static_cast<double>(t.q) >= std::pow(lnN, 1.0) - 1.0);
        CHECK(static_cast<double>(t.q) <=
              std::pow(static_cast<double>(t.N), 2.0) / std::pow(lnN, 1.0) + 1.0);
        CHECK(t.ratio >= 0.0);
    }

    auto again = regularity_scan(AxisSet::primes, 2, Ns, 4, 2.0, 3, 11, primes);
    REQUIRE(again.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(again[i].ratio == rows[i].ratio);
        CHECK(again[i].q == rows[i].q);
        CHECK(again[i].seed == rows[i].seed);
    }

    // degree 1 with a steep beta empties the q-window
    std::vector<i64> tiny{4};
    auto sk = regularity_scan(AxisSet::integers, 1, tiny, 2, 1.0, 2, 5, primes, 4.0);
    REQUIRE(sk.size() == 1);
    CHECK(sk[0].skipped);

    std::vector<i64> n64{64};
    CHECK_THROWS(regularity_scan(AxisSet::integers, 2, n64, 1000, 1.0, 1, 1, primes));
    CHECK_THROWS(regularity_scan(AxisSet::signed_primes, 2, n64, 4, 1.0, 1, 1, primes));
    CHECK_THROWS(regularity_scan(AxisSet::integers, 0, n64, 4, 1.0, 1, 1, primes));
    CHECK_THROWS(regularity_scan(AxisSet::integers, 2, n64, 0, 1.0, 1, 1, primes));
}
