// =============================================================================
// Rational partition machinery tests.
//
// Small-level hand facts used throughout:
//
//   n = 2, beta = 1:  n0 = 1, D = 21, Q0 = 1, P_2 = {1} cup {2^e : e <= 21},
//   n = 6, beta = 1:  P_6 = {2^a 3^b 5^c : a, b, c <= 21}, 22^3 = 10648
//                     would-be elements, some above 2^62 (truncated flag),
//   U_1 = {0},  U_2 = {0, 1/2},  U_3 = {0, 1/2, 1/3, 2/3}   (d = 1, capped
//   at the materialization bound e^{n^{1/10}}).
//
// With rho = 1/2 the shell R_8 = U_3 \ U_2 = {1/3, 2/3} gives a two-element
// disjointness instance: separation 1/9 beats the doubled bump width at
// chi = 0.05 and loses at chi = 5, which must surface as a witness pair.
// =============================================================================

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "doctest.h"
#include "rvl/iw.hpp"
#include "rvl/lattice.hpp"
#include "rvl/util.hpp"
#include "rvl/variation.hpp"

using namespace rvl;

// -----------------------------------------------------------------------------
// Level parameters and P_n
// -----------------------------------------------------------------------------
TEST_CASE("level parameters: n0, D, Q0") {
    IWParams p2 = make_iw_params(2, 1);
    CHECK(p2.n0 == 1);
    CHECK(p2.D == 21);
    CHECK(p2.Q0.value() == 1);

    IWParams pbig = make_iw_params(1048576, 1);  // n0 = 2^{20/20} = 2
    CHECK(pbig.n0 == 2);
    CHECK(pbig.Q0.value() == (i64{1} << 21));  // (2!)^21

    IWParams pb2 = make_iw_params(2, 2);
    CHECK(pb2.D == 41);

    CHECK_THROWS(make_iw_params(0, 1));
    CHECK_THROWS(make_iw_params(2, 0));
}

TEST_CASE("P_2 is the pinned power-of-two list") {
    RationalSet P = build_Pn(2, 1);
    REQUIRE(P.qs.size() == 22);
    CHECK(P.cardinality == 22.0);
    CHECK_FALSE(P.magnitude_truncated);
    CHECK(P.qs.front() == 1);
    for (int e = 0; e <= 21; ++e)
        CHECK(std::binary_search(P.qs.begin(), P.qs.end(),
                                 (e == 0) ? i64{1} : (i64{1} << e)));
    CHECK(P.qs.back() == (i64{1} << 21));

    CHECK(in_Pn(1, 2, 1));
    CHECK(in_Pn(2048, 2, 1));
    CHECK(in_Pn(i64{1} << 21, 2, 1));
    CHECK_FALSE(in_Pn(i64{1} << 22, 2, 1));  // exponent above D
    CHECK_FALSE(in_Pn(3, 2, 1));
    CHECK_FALSE(in_Pn(0, 2, 1));
}

TEST_CASE("P_6: cardinality, truncation, divisor closure, membership oracle") {
    RationalSet P = build_Pn(6, 1);
    CHECK(P.cardinality == 10648.0);  // 22^3 smooth products of 2, 3, 5
    CHECK(P.magnitude_truncated);     // 30^21 does not fit in 2^62
    CHECK(std::is_sorted(P.qs.begin(), P.qs.end()));
    CHECK(std::adjacent_find(P.qs.begin(), P.qs.end()) == P.qs.end());

    // membership without materialization agrees with the built set
    for (i64 m = 1; m <= 3000; ++m)
        CHECK(in_Pn(m, 6, 1) == std::binary_search(P.qs.begin(), P.qs.end(), m));

    // divisor-closed: every divisor of 720 = 2^4 3^2 5 is present
    for (i64 dv = 1; dv <= 720; ++dv)
        if (720 % dv == 0) CHECK(std::binary_search(P.qs.begin(), P.qs.end(), dv));

    CHECK_THROWS(build_Pn(6, 1, 100.0));    // cardinality cap
    CHECK_THROWS(build_Pn(100000, 2));      // n^beta beyond the sieve guard
}

TEST_CASE("P_n contains every denominator up to n^beta") {
    for (i64 m = 1; m <= 100; ++m) CHECK(in_Pn(m, 100, 1));
    for (i64 m = 1; m <= 441; ++m) CHECK(in_Pn(m, 21, 2));
    // and a value just outside: the prime 101 exceeds n^beta = 100
    CHECK_FALSE(in_Pn(101, 100, 1));
}

TEST_CASE("denominator cap and epsilon decay") {
    CHECK(denominator_cap(1) == doctest::Approx(std::exp(1.0)));
    CHECK(denominator_cap(1024) == doctest::Approx(std::exp(2.0)));
    CHECK(epsilon_n(1) == doctest::Approx(std::exp(-1.0)));
    CHECK(epsilon_n(32) == doctest::Approx(std::exp(-2.0)));
    CHECK(epsilon_n(32, 0.5) == doctest::Approx(0.5 * std::exp(-2.0)));
    CHECK(epsilon_n(10) > epsilon_n(11));
    CHECK_THROWS(epsilon_n(0));
    CHECK_THROWS(epsilon_n(1, 2.0));
    CHECK_THROWS(epsilon_n(1, 0.0));
}

// -----------------------------------------------------------------------------
// The plateau bump
// -----------------------------------------------------------------------------
TEST_CASE("eta: exact plateau, exact vanishing, smooth transition") {
    std::vector<double> x{0.03};
    CHECK(eta(x) == 1.0);  // below 1/32 in d = 1
    x[0] = -0.03;
    CHECK(eta(x) == 1.0);
    x[0] = 0.07;
    CHECK(eta(x) == 0.0);  // above 1/16
    x[0] = 0.05;
    double mid = eta(x);
    CHECK(mid > 0.0);
    CHECK(mid < 1.0);
    x[0] = 0.04;
    double lo = eta(x);
    x[0] = 0.06;
    double hi = eta(x);
    CHECK(lo > mid);
    CHECK(mid > hi);

    std::vector<double> y{0.015, 0.01};
    CHECK(eta(y) == 1.0);  // below 1/64 in d = 2
    y[0] = 0.032;
    CHECK(eta(y) == 0.0);  // above 1/32 in sup norm
    std::vector<double> empty;
    CHECK_THROWS(eta(empty));
}

TEST_CASE("eta_n: scaled plateau edges") {
    MultiIndexSet G = build_gamma(1, 1);
    // scale = 2^{-chi sqrt(log2 N)} N = 2^{-0.5} 16
    std::vector<double> x{0.002};
    CHECK(eta_n(x, 16, 0.25, G) == 1.0);
    x[0] = 0.006;
    CHECK(eta_n(x, 16, 0.25, G) == 0.0);
    x[0] = 0.004;
    double v = eta_n(x, 16, 0.25, G);
    CHECK(v > 0.0);
    CHECK(v < 1.0);
    std::vector<double> bad{0.1, 0.2};
    CHECK_THROWS(eta_n(bad, 16, 0.25, G));
    CHECK_THROWS(eta_n(x, 0, 0.25, G));
}

TEST_CASE("fraction enumeration: counts and reduced points") {
    RationalSet P;
    P.qs = {1, 2, 3};
    auto fr = enumerate_fractions(P, 1);
    REQUIRE(fr.size() == 4);  // 0, 1/2, 1/3, 2/3 as q-major
    CHECK(fr[0].q == 1);
    CHECK(fr[0].point()[0] == 0.0);  // a = q reduces to the origin
    CHECK(fr[1].q == 2);
    CHECK(fr[1].a == std::vector<i64>{1});
    CHECK(fr[2].point()[0] == doctest::Approx(1.0 / 3.0));
    CHECK(fr[3].point()[0] == doctest::Approx(2.0 / 3.0));
    CHECK_THROWS(enumerate_fractions(P, 1, 3));  // cap below the count

    RationalSet P2;
    P2.qs = {2};
    auto fr2 = enumerate_fractions(P2, 2);
    REQUIRE(fr2.size() == 3);  // (1,1), (1,2), (2,1); (2,2) is not reduced
}

// -----------------------------------------------------------------------------
// The partition of unity
// -----------------------------------------------------------------------------
TEST_CASE("u_level floors n^rho with an exactness guard") {
    CHECK(u_level(4, 0.5) == 2);
    CHECK(u_level(2, 0.5) == 1);
    CHECK(u_level(9, 0.5) == 3);
    CHECK(u_level(10, 0.5) == 3);
    CHECK(u_level(8, 1.0 / 3.0) == 2);  // 8^{1/3} must not floor to 1
    CHECK(u_level(0, 0.5) == 0);
}

TEST_CASE("xi partition: plateau values on and off the rational centers") {
    ScaleLadder lad = make_ladder(0.5, 1, i64{1} << 10, 20);
    MultiIndexSet G = build_gamma(1, 1);
    XiPartitionParams par;
    par.beta = 1;
    par.rho = 0.5;
    par.chi = 0.05;
    par.ladder = &lad;
    par.G = &G;

    std::vector<double> xi{0.0};
    CHECK(xi_partition(xi, 4, std::nullopt, par) == 1.0);
    CHECK(xi_partition(xi, 1, std::nullopt, par) == 1.0);
    xi[0] = 0.5;
    CHECK(xi_partition(xi, 4, std::nullopt, par) == 1.0);
    xi[0] = 0.501;  // still on the q = 2 plateau at scale N_4 = 4
    CHECK(xi_partition(xi, 4, std::nullopt, par) == 1.0);
    xi[0] = 0.25;
    CHECK(xi_partition(xi, 4, std::nullopt, par) == 0.0);
    xi[0] = 1.0 / 3.0;  // 1/3 enters only at u-level 3
    CHECK(xi_partition(xi, 4, std::nullopt, par) == 0.0);

    // shell restriction: R_0 holds the origin, R_3 = U_2 \ U_1 holds 1/2
    xi[0] = 0.0;
    CHECK(xi_partition(xi, 4, 0, par) == 1.0);
    CHECK(xi_partition(xi, 4, 3, par) == 0.0);
    xi[0] = 0.5;
    CHECK(xi_partition(xi, 4, 0, par) == 0.0);
    CHECK(xi_partition(xi, 4, 3, par) == 1.0);

    // the shells tile the full partition
    for (double x : {0.0, 0.5, 0.25, 0.501, 1.0 / 3.0, 0.127}) {
        std::vector<double> p{x};
        double whole = xi_partition(p, 4, std::nullopt, par);
        double parts = 0;
        for (int s = 0; s < 4; ++s) parts += xi_partition(p, 4, s, par);
        CHECK(parts == doctest::Approx(whole).epsilon(1e-12));
    }

    CHECK_THROWS(xi_partition(xi, 0, std::nullopt, par));
    CHECK_THROWS(xi_partition(xi, 4, 4, par));      // need s < n
    CHECK_THROWS(xi_partition(xi, 4, -1, par));
    CHECK_THROWS(xi_partition(xi, 5000, std::nullopt, par));  // beyond the ladder
    std::vector<double> bad{0.1, 0.2};
    CHECK_THROWS(xi_partition(bad, 4, std::nullopt, par));

    XiPartitionParams gate = par;
    gate.chi = 0.15;  // partition demands chi < 1/10
    CHECK_THROWS(xi_partition(xi, 4, std::nullopt, gate));
    gate.chi = 0.0;
    CHECK_THROWS(xi_partition(xi, 4, std::nullopt, gate));
    XiPartitionParams missing = par;
    missing.G = nullptr;
    CHECK_THROWS(xi_partition(xi, 4, std::nullopt, missing));
}

TEST_CASE("xi partition in two components sees the mixed rational grid") {
    ScaleLadder lad = make_ladder(0.5, 2, i64{1} << 10, 20);
    MultiIndexSet G = build_gamma(1, 2);  // d = 2, weights (1, 2)
    XiPartitionParams par;
    par.beta = 1;
    par.rho = 0.5;
    par.chi = 0.05;
    par.ladder = &lad;
    par.G = &G;

    std::vector<double> xi{0.0, 0.0};
    CHECK(xi_partition(xi, 4, std::nullopt, par) == 1.0);
    xi = {0.5, 0.0};
    CHECK(xi_partition(xi, 4, std::nullopt, par) == 1.0);
    xi = {0.5, 0.5};
    CHECK(xi_partition(xi, 4, std::nullopt, par) == 1.0);
    xi = {0.25, 0.25};
    CHECK(xi_partition(xi, 4, std::nullopt, par) == 0.0);
}

// -----------------------------------------------------------------------------
// Support disjointness
// -----------------------------------------------------------------------------
TEST_CASE("disjointness: shell R_8 = {1/3, 2/3} passes at chi = 0.05") {
    ScaleLadder lad = make_ladder(0.5, 1, i64{1} << 10, 20);
    MultiIndexSet G = build_gamma(1, 1);
    XiPartitionParams par;
    par.beta = 1;
    par.rho = 0.5;
    par.chi = 0.05;
    par.ladder = &lad;
    par.G = &G;

    DisjointnessResult ok = disjointness_check(8, 9, par);
    CHECK(ok.ok);
    CHECK_FALSE(ok.has_witness);

    // single-fraction and empty shells are vacuously disjoint
    CHECK(disjointness_check(3, 9, par).ok);   // R_3 = {1/2}
    CHECK(disjointness_check(1, 9, par).ok);   // R_1 is empty

    CHECK_THROWS(disjointness_check(9, 9, par));     // need m > s
    CHECK_THROWS(disjointness_check(8, 5000, par));  // beyond the ladder
}

TEST_CASE("disjointness: an oversized chi produces a witness pair") {
    ScaleLadder lad = make_ladder(0.5, 1, i64{1} << 10, 20);
    MultiIndexSet G = build_gamma(1, 1);
    XiPartitionParams par;
    par.beta = 1;
    par.rho = 0.5;
    par.chi = 5.0;  // accepted here; only the partition gates chi < 1/10
    par.ladder = &lad;
    par.G = &G;

    DisjointnessResult res = disjointness_check(8, 9, par);
    CHECK_FALSE(res.ok);
    REQUIRE(res.has_witness);
    CHECK(res.f1.q == 3);
    CHECK(res.f2.q == 3);
    CHECK(res.f1.a != res.f2.a);
}
