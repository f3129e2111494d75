// =============================================================================
// Multiplier tests.  Hand values on the N = 10 interval orbit (primes 2, 3,
// 5, 7, normalizer log 210, images Q(p) = (p, p^2)):
//
//   m_10(1/2, 0)  =  (log 2 - log 3 - log 5 - log 7)/log 210
//                 =  2 log2 / log210 - 1                  (e(p/2) = (-1)^p)
//   h_10(1/4, 0)  =  i (-log3/3 + log5/5 - log7/7)        (2i sin(pi p / 2)
//                                                          pairs, p = 2 drops)
//
// Continuous closed forms: on the interval Phi_N(xi) = sinc(2 pi N xi) and
// Psi_N(xi) = i Si(2 pi N xi) for the kernel 1/(2x); on the 2d disc
// Phi_N(xi) = 2 J_1(R)/R with R = 2 pi N |xi|.  Si is recomputed here by
// Simpson's rule and J_1 comes from the standard library, so the quadrature
// engine is checked against independent arithmetic.
//
// Gauss sum hands: G(1/2 (1,1)) = 1, G(1/4 (4,1)) = i, and the classical
// quadratic sum G(1/5 (5,1)) = 1/sqrt(5); CRT factorization must agree with
// direct enumeration.
// =============================================================================

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "rvl/lattice.hpp"
#include "rvl/multipliers.hpp"
#include "rvl/numtheory.hpp"
#include "rvl/operators.hpp"
#include "rvl/util.hpp"

using namespace rvl;

// Si(t) = int_0^t sin(u)/u du by composite Simpson, independent of the
// quadrature engine under test
static double sine_integral(double t) {
    const int n = 40000;  // even
    double h = t / n;
    auto f = [](double u) { return (u == 0.0) ? 1.0 : std::sin(u) / u; };
    double s = f(0.0) + f(t);
    for (int i = 1; i < n; ++i) s += f(i * h) * ((i % 2) ? 4.0 : 2.0);
    return s * h / 3.0;
}

// -----------------------------------------------------------------------------
// Frequencies
// -----------------------------------------------------------------------------
TEST_CASE("rational frequencies: A_q membership and torus reduction") {
    CHECK(in_A_q(std::vector<i64>{1, 4}, 4));
    CHECK(in_A_q(std::vector<i64>{4, 1}, 4));
    CHECK_FALSE(in_A_q(std::vector<i64>{2, 4}, 4));  // joint gcd 2
    CHECK_FALSE(in_A_q(std::vector<i64>{0, 1}, 4));  // outside {1..q}
    CHECK_FALSE(in_A_q(std::vector<i64>{5, 1}, 4));
    CHECK(in_A_q(std::vector<i64>{1}, 1));

    RationalFrequency rf = make_rational_frequency(4, {1, 4}, {0.25, -0.125});
    auto xi = rf.xi();
    CHECK(xi[0] == doctest::Approx(0.5));
    CHECK(xi[1] == doctest::Approx(0.875));
    CHECK(rf.dim() == 2);
    CHECK_THROWS(make_rational_frequency(4, {2, 4}));
    CHECK_THROWS(make_rational_frequency(0, {1}));
    CHECK_THROWS(make_rational_frequency(3, {1, 3}, {0.1}));

    RationalFrequency off = pure_offset({0.3});
    CHECK(off.q == 1);
    CHECK(off.xi()[0] == doctest::Approx(0.3));
}

// -----------------------------------------------------------------------------
// Discrete multipliers
// -----------------------------------------------------------------------------
TEST_CASE("average multiplier: hand values on the N = 10 orbit") {
    PrimeTable primes = sieve_primes(100);
    MultiIndexSet G = build_gamma(1, 2);
    OrbitStructure st{0, 1, false};
    WeightedOrbit orb = enumerate_orbit(ConvexBody::cube(1), 10, st, G, primes);
    REQUIRE(orb.npoints == 4);

    std::vector<RationalFrequency> xis;
    xis.push_back(make_rational_frequency(1, {1, 1}));       // xi = 0
    xis.push_back(make_rational_frequency(2, {1, 2}));       // xi = (1/2, 0)
    auto vals = m_hat(xis, orb);
    CHECK(std::abs(vals[0] - cplx(1.0, 0.0)) < 1e-13);
    double want = 2.0 * std::log(2.0) / std::log(210.0) - 1.0;
    CHECK(vals[1].real() == doctest::Approx(want).epsilon(1e-13));
    CHECK(std::abs(vals[1].imag()) < 1e-13);

    std::vector<RationalFrequency> badarity{make_rational_frequency(2, {1})};
    CHECK_THROWS(m_hat(badarity, orb));
    WeightedOrbit empty = enumerate_orbit(ConvexBody::cube(1), 1, st, G, primes);
    std::vector<RationalFrequency> one{xis[0]};
    CHECK_THROWS(m_hat(one, empty));
}

TEST_CASE("average multiplier agrees with the sparse transform of M_N delta_0") {
    PrimeTable primes = sieve_primes(100);
    MultiIndexSet G = build_gamma(1, 2);
    Lift lift = identity_lift(G);
    OrbitStructure st{0, 1, false};
    WeightedOrbit orb = enumerate_orbit(ConvexBody::cube(1), 10, st, G, primes);
    SparseFunction g = apply_average(SparseFunction::delta(2), orb, lift, true);

    std::vector<RationalFrequency> xis{pure_offset({0.123, 0.456})};
    cplx direct = m_hat(xis, orb)[0];
    cplx via_transform = transform_sparse(g, xis[0].xi());
    CHECK(std::abs(direct - via_transform) < 1e-12);

    // transform of delta_0 is identically one
    CHECK(transform_sparse(SparseFunction::delta(2), xis[0].xi()) == cplx(1.0, 0.0));
}

TEST_CASE("singular multiplier: hand value at xi = (1/4, 0)") {
    PrimeTable primes = sieve_primes(100);
    MultiIndexSet G = build_gamma(1, 2);
    OrbitStructure st{0, 1, true};
    WeightedOrbit orb = enumerate_orbit(ConvexBody::cube(1), 10, st, G, primes);
    REQUIRE(orb.npoints == 8);
    CZKernel kern = make_cz_kernel(1);

    std::vector<RationalFrequency> xis{make_rational_frequency(4, {1, 4})};
    cplx v = h_hat(xis, orb, kern)[0];
    double want = -std::log(3.0) / 3 + std::log(5.0) / 5 - std::log(7.0) / 7;
    CHECK(std::abs(v.real()) < 1e-14);
    CHECK(v.imag() == doctest::Approx(want).epsilon(1e-13));

    WeightedOrbit unsigned_orb =
        enumerate_orbit(ConvexBody::cube(1), 10, OrbitStructure{0, 1, false}, G, primes);
    CHECK_THROWS(h_hat(xis, unsigned_orb, kern));
    CHECK_THROWS(h_hat(xis, orb, make_cz_kernel(2)));

    WeightedOrbit empty = enumerate_orbit(ConvexBody::cube(1), 1, st, G, primes);
    auto hv = h_hat(xis, empty, kern);
    CHECK(hv[0] == cplx(0.0, 0.0));  // empty shell, multiplier vanishes
}

// -----------------------------------------------------------------------------
// Continuous counterparts
// -----------------------------------------------------------------------------
TEST_CASE("phi quadrature: interval closed forms") {
    MultiIndexSet G = build_gamma(1, 1);
    ConvexBody B = ConvexBody::cube(1);

    std::vector<double> zero{0.0};
    auto q0 = phi_integral(zero, B, G, 4, 64, false);
    CHECK(std::abs(q0.value - cplx(1.0, 0.0)) < 1e-13);

    std::vector<double> xi{0.1};
    double zeta = kTwoPi * 4 * 0.1;  // 2 pi N xi
    auto qf = phi_integral(xi, B, G, 4, 64, false);
    CHECK(std::abs(qf.value - cplx(std::sin(zeta) / zeta, 0.0)) < 1e-12);
    CHECK(qf.err < 1e-10);

    auto qo = phi_integral(xi, B, G, 4, 64, true);
    cplx closed = (std::polar(1.0, zeta) - cplx(1.0, 0.0)) / cplx(0.0, zeta);
    CHECK(std::abs(qo.value - closed) < 1e-12);
}

TEST_CASE("phi quadrature: 2d disc against the Bessel closed form") {
    // Gamma over two variables at degree 1 is {(0,1),(1,0),(1,1)}; zeroing the
    // mixed slot leaves a linear phase, where the disc integral is Bessel:
    // Phi_N(xi) = 2 J_1(R) / R with R = 2 pi N |xi|.
    MultiIndexSet G = build_gamma(2, 1);
    REQUIRE(G.d == 3);
    ConvexBody B = ConvexBody::euclidean_ball(2);

    std::vector<double> zero{0.0, 0.0, 0.0};
    auto q0 = phi_integral(zero, B, G, 3, 64, false);
    CHECK(std::abs(q0.value - cplx(1.0, 0.0)) < 1e-12);

    std::vector<double> xi{0.2, 0.1, 0.0};
    double R = kTwoPi * 3 * std::sqrt(0.05);
    auto qf = phi_integral(xi, B, G, 3, 64, false);
    cplx closed(2.0 * std::cyl_bessel_j(1, R) / R, 0.0);
    CHECK(std::abs(qf.value - closed) < 1e-9);
    CHECK(qf.err < 1e-8);
}

TEST_CASE("psi principal value: sine-integral closed form on the interval") {
    MultiIndexSet G = build_gamma(1, 1);
    ConvexBody B = ConvexBody::cube(1);
    CZKernel kern = make_cz_kernel(1);

    std::vector<double> zero{0.0};
    auto p0 = psi_pv(zero, B, G, kern, 2, 64);
    CHECK(std::abs(p0.value) == 0.0);  // symmetrized integrand vanishes exactly

    std::vector<double> xi{0.25};
    auto pv = psi_pv(xi, B, G, kern, 2, 64);
    double si = sine_integral(kTwoPi * 2 * 0.25);
    CHECK(std::abs(pv.value.real()) < 1e-13);
    CHECK(pv.value.imag() == doctest::Approx(si).epsilon(1e-10));

    std::vector<double> mxi{-0.25};
    auto pm = psi_pv(mxi, B, G, kern, 2, 64);
    CHECK(std::abs(pm.value + pv.value) < 1e-13);  // odd in xi
}

// -----------------------------------------------------------------------------
// Gauss sums
// -----------------------------------------------------------------------------
TEST_CASE("gaussian sums: hand values over the unit group") {
    MultiIndexSet G = build_gamma(1, 2);
    OrbitStructure stp{0, 1, false};

    std::vector<i64> a11{1, 1};
    CHECK(std::abs(gaussian_sum(a11, 2, stp, G) - cplx(1.0, 0.0)) < 1e-14);
    std::vector<i64> a41{4, 1};
    CHECK(std::abs(gaussian_sum(a41, 4, stp, G) - cplx(0.0, 1.0)) < 1e-14);
    std::vector<i64> a1{1, 1};
    CHECK(gaussian_sum(a1, 1, stp, G) == cplx(1.0, 0.0));

    // full residue axis: linear sums cancel, the quadratic sum is 1/sqrt(5)
    OrbitStructure stn{1, 0, false};
    MultiIndexSet G1 = build_gamma(1, 1);
    std::vector<i64> a3{1};
    CHECK(std::abs(gaussian_sum(a3, 3, stn, G1)) < 1e-14);
    std::vector<i64> a51{5, 1};
    cplx g5 = gaussian_sum(a51, 5, stn, G);
    CHECK(g5.real() == doctest::Approx(1.0 / std::sqrt(5.0)).epsilon(1e-12));
    CHECK(std::abs(g5.imag()) < 1e-13);

    std::vector<i64> bad{2, 4};
    CHECK_THROWS(gaussian_sum(bad, 4, stp, G));
}

TEST_CASE("gaussian sums: crt factorization agrees with direct enumeration") {
    MultiIndexSet G = build_gamma(2, 2);
    OrbitStructure st{1, 1, false};
    Rng rng(314);
    for (i64 q : {i64{12}, i64{45}, i64{8}, i64{30}}) {
        int found = 0;
        while (found < 5) {
            std::vector<i64> a(static_cast<std::size_t>(G.d));
            for (auto& v : a) v = rng.range(1, q);
            if (!in_A_q(a, q)) continue;
            ++found;
            cplx d = gaussian_sum_direct(a, q, st, G);
            cplx c = gaussian_sum_crt(a, q, st, G);
            CHECK(std::abs(d - c) < 1e-12);
            CHECK(std::abs(d) <= 1.0 + 1e-12);
            CHECK(std::abs(gaussian_sum(a, q, st, G) - d) < 1e-12);
        }
    }
}

// -----------------------------------------------------------------------------
// Major arcs
// -----------------------------------------------------------------------------
TEST_CASE("major arc: average model tracks the discrete multiplier") {
    PrimeTable primes = sieve_primes(2000);
    MajorArcSetup setup;
    setup.B = ConvexBody::cube(1);
    setup.st = OrbitStructure{0, 1, false};
    setup.G = build_gamma(1, 2);
    setup.primes = &primes;

    RationalFrequency rf = pure_offset({1e-4, 1e-6});
    MajorArcError res = major_arc_error(rf, 200, MultiplierKind::discrete_average, setup);
    CHECK(res.q == 1);
    CHECK(res.N == 200);
    CHECK(res.hypothesis_ok);
    CHECK(res.L == doctest::Approx(std::max(1e-4 * 200, 1e-6 * 200.0 * 200.0)));
    CHECK(std::abs(res.model) <= 1.0 + 1e-9);
    CHECK(res.err < 0.5);
    CHECK(res.err == doctest::Approx(std::abs(res.discrete - res.model)));

    // the discrete field is the plain multiplier
    WeightedOrbit orb = enumerate_orbit(setup.B, 200, setup.st, setup.G, primes);
    std::vector<RationalFrequency> one{rf};
    CHECK(std::abs(res.discrete - m_hat(one, orb)[0]) < 1e-13);

    // gates: q above (log N)^2, then L above exp(sqrt(log N))
    RationalFrequency rfq = make_rational_frequency(17, {1, 17});
    CHECK_FALSE(major_arc_error(rfq, 10, MultiplierKind::discrete_average, setup).hypothesis_ok);
    RationalFrequency rfl = pure_offset({0.3, 0.0});
    CHECK_FALSE(major_arc_error(rfl, 200, MultiplierKind::discrete_average, setup).hypothesis_ok);
}

TEST_CASE("major arc: singular model vanishes at theta = 0") {
    PrimeTable primes = sieve_primes(100);
    MajorArcSetup setup;
    setup.B = ConvexBody::cube(1);
    setup.st = OrbitStructure{0, 1, true};
    setup.G = build_gamma(1, 2);
    setup.primes = &primes;
    setup.kernel = make_cz_kernel(1);

    RationalFrequency rf = make_rational_frequency(3, {1, 3});
    MajorArcError res = major_arc_error(rf, 20, MultiplierKind::discrete_singular, setup);
    CHECK(std::abs(res.model) == 0.0);  // Psi_{2N} - Psi_N at theta = 0 is exactly zero

    // independent hand sum: h_{2N} - h_N = i sum_{N < p <= 2N} log(p) sin(2 pi p / 3) / p
    double imag = 0;
    for (i64 p : {23, 29, 31, 37}) {
        double pd = static_cast<double>(p);
        imag += std::log(pd) * std::sin(kTwoPi * pd / 3.0) / pd;
    }
    CHECK(std::abs(res.discrete - cplx(0.0, imag)) < 1e-13);
    CHECK(res.err == doctest::Approx(std::abs(res.discrete)));
}

// -----------------------------------------------------------------------------
// Envelopes
// -----------------------------------------------------------------------------
TEST_CASE("envelopes: interval ratios stay below the a-priori cap") {
    MultiIndexSet G = build_gamma(1, 1);
    ConvexBody B = ConvexBody::cube(1);
    CZKernel kern = make_cz_kernel(1);
    std::vector<std::vector<double>> xis{{0.01}, {0.05}, {0.2}, {0.4}};

    EnvelopeReport rep = envelope_check(xis, 8, B, G, &kern, 64);
    CHECK(rep.n == 4);
    CHECK(rep.violations == 0);
    CHECK(rep.psi_checked);
    CHECK(rep.C_phi <= 2.0);
    CHECK(rep.C_phi_minus_1 <= 10.0);
    CHECK(rep.C_psi_diff <= 8.0);

    EnvelopeReport nop = envelope_check(xis, 8, B, G, nullptr, 64);
    CHECK_FALSE(nop.psi_checked);
    CHECK(nop.C_psi_diff == 0.0);

    std::vector<double> xi{0.5, 0.25};
    CHECK(nA_norm(xi, build_gamma(1, 2), 10) == doctest::Approx(25.0));
}
