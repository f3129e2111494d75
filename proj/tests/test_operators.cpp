// =============================================================================
// Sparse functions, Calderon-Zygmund kernels, operator application, and the
// telescoping diagnostics.
//
// Hand cases are over the interval with one prime axis at N = 10, where the
// orbit is {2, 3, 5, 7} with normalizer log 210:
//
//   M_10 delta_0  has mass log p / log 210 at Q(p) = (p, p^2),
//   A_10 delta_0  has mass 1/4 there,
//   H_10 delta_0  has mass +-log p / (2p) at +-p   (K(x) = 1/(2x)),
//
// and the telescoping l^1 mass between N1 = 5 and N2 = 10 is
//
//   average:   1 - log30/log210 + log7/log210   (single jump at n = 7)
//   singular:  log 7 / 7                        (shell points +-7 only).
// =============================================================================

#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <vector>

#include "doctest.h"
#include "rvl/lattice.hpp"
#include "rvl/numtheory.hpp"
#include "rvl/operators.hpp"
#include "rvl/util.hpp"

using namespace rvl;

static constexpr double kInf = std::numeric_limits<double>::infinity();

// -----------------------------------------------------------------------------
// SparseFunction algebra
// -----------------------------------------------------------------------------
TEST_CASE("sparse functions: norms, mass, translation, axpy") {
    SparseFunction f = SparseFunction::delta_at({3}, cplx(3.0, 4.0));
    CHECK(lp_norm(f, 1.0) == doctest::Approx(5.0));
    CHECK(lp_norm(f, 2.0) == doctest::Approx(5.0));
    CHECK(lp_norm(f, kInf) == doctest::Approx(5.0));
    CHECK(mass(f) == cplx(3.0, 4.0));
    CHECK_THROWS(lp_norm(f, 0.5));

    f.add(std::vector<i64>{7}, cplx(0.0, -4.0));
    CHECK(f.support_size() == 2);
    CHECK(lp_norm(f, 2.0) == doctest::Approx(std::sqrt(41.0)));
    CHECK(std::abs(mass(f) - cplx(3.0, 0.0)) < 1e-15);

    std::vector<i64> shift{-3};
    SparseFunction g = translate(f, shift);
    CHECK(g.a.count(std::vector<i64>{0}) == 1);
    CHECK(g.a.count(std::vector<i64>{4}) == 1);
    CHECK(g.a.at(std::vector<i64>{0}) == cplx(3.0, 4.0));
    std::vector<i64> bad{1, 2};
    CHECK_THROWS(translate(f, bad));

    SparseFunction h = axpy(1.0, f, -1.0, f);
    CHECK(h.support_size() == 0);  // exact cancellation is pruned
    SparseFunction h2 = axpy(2.0, f, -1.0, f);
    CHECK(h2.a.at(std::vector<i64>{3}) == cplx(3.0, 4.0));
    CHECK(max_abs_diff(f, f) == 0.0);
    CHECK(max_abs_diff(h2, f) == 0.0);
}

TEST_CASE("sparse functions: csv and binary roundtrips") {
    namespace fs = std::filesystem;
    fs::create_directories("sparse_io_test");
    SparseFunction f;
    f.d0 = 2;
    f.add(std::vector<i64>{-5, 7}, cplx(0.1, -0.25));
    f.add(std::vector<i64>{3, -2}, cplx(1e-17, 2.5));
    f.add(std::vector<i64>{0, 0}, cplx(1.0, 0.0));

    write_sparse_csv(f, "sparse_io_test/f.csv");
    SparseFunction fc = read_sparse_csv("sparse_io_test/f.csv");
    REQUIRE(fc.d0 == 2);
    REQUIRE(fc.support_size() == f.support_size());
    for (const auto& [k, v] : f.a) {
        REQUIRE(fc.a.count(k) == 1);
        CHECK(fc.a.at(k) == v);  // 17 significant digits roundtrip binary64
    }

    write_sparse_bin(f, "sparse_io_test/f.bin");
    SparseFunction fb = read_sparse_bin("sparse_io_test/f.bin");
    REQUIRE(fb.d0 == 2);
    REQUIRE(fb.support_size() == f.support_size());
    for (const auto& [k, v] : f.a) CHECK(fb.a.at(k) == v);

    CHECK_THROWS(read_sparse_csv("sparse_io_test/missing.csv"));
    { std::ofstream empty("sparse_io_test/empty.csv"); }
    CHECK_THROWS(read_sparse_csv("sparse_io_test/empty.csv"));
    fs::remove_all("sparse_io_test");
}

// -----------------------------------------------------------------------------
// Kernels
// -----------------------------------------------------------------------------
TEST_CASE("cz kernel: hand values and hand gradients") {
    CZKernel k1 = make_cz_kernel(1);
    std::vector<double> x{2.0};
    CHECK(k1.evaluate(x) == doctest::Approx(0.25));  // 1/(2x)
    x[0] = -2.0;
    CHECK(k1.evaluate(x) == doctest::Approx(-0.25));
    x[0] = 2.0;
    auto g1 = k1.gradient(x);
    REQUIRE(g1.size() == 1);
    CHECK(g1[0] == doctest::Approx(-0.125));  // d/dx 1/(2x) = -1/(2x^2)

    CZKernel k2 = make_cz_kernel(2);
    std::vector<double> y{3.0, 4.0};
    CHECK(k2.evaluate(y) == doctest::Approx(1.0 / 125.0));  // x_1 / (3 r^3)
    auto g2 = k2.gradient(y);
    REQUIRE(g2.size() == 2);
    CHECK(g2[0] == doctest::Approx(-2.0 / 9375.0));
    CHECK(g2[1] == doctest::Approx(-12.0 / 3125.0));

    // central differences as an independent check of the gradient formula
    CZKernel k3 = make_cz_kernel(3);
    std::vector<double> z{1.5, -0.7, 2.2};
    auto g3 = k3.gradient(z);
    for (std::size_t j = 0; j < z.size(); ++j) {
        double h = 1e-6;
        std::vector<double> zp(z), zm(z);
        zp[j] += h;
        zm[j] -= h;
        double fd = (k3.evaluate(zp) - k3.evaluate(zm)) / (2 * h);
        CHECK(g3[j] == doctest::Approx(fd).epsilon(1e-6));
    }
    CHECK_THROWS(make_cz_kernel(0));
    std::vector<double> origin{0.0};
    CHECK_THROWS(k1.evaluate(origin));
}

TEST_CASE("kernel validation: built-ins pass, an oversized kernel fails") {
    CHECK(validate_kernel(make_cz_kernel(1), ConvexBody::cube(1)));
    CHECK(validate_kernel(make_cz_kernel(2), ConvexBody::euclidean_ball(2)));

    // shell integrals of the odd kernel vanish within the reported error
    CZKernel k2 = make_cz_kernel(2);
    double se = 0;
    double I = shell_integral(k2, ConvexBody::euclidean_ball(2), 3.0, 1.5, 40000, 99, &se);
    CHECK(se > 0.0);
    CHECK(std::abs(I) <= 5.0 * se);
    CHECK_THROWS(shell_integral(k2, ConvexBody::euclidean_ball(2), 1.0, 2.0, 100, 1));

    CZKernel bad;
    bad.k = 1;
    bad.evaluate = [](std::span<const double> x) { return 5.0 / std::abs(x[0]); };
    bad.gradient = [](std::span<const double> x) {
        double s = x[0] > 0 ? 1.0 : -1.0;
        return std::vector<double>{-5.0 * s / (x[0] * x[0])};
    };
    std::string why;
    CHECK_FALSE(validate_kernel(bad, ConvexBody::cube(1), &why));
    CHECK(!why.empty());
}

// -----------------------------------------------------------------------------
// Operator application on the N = 10 interval orbit
// -----------------------------------------------------------------------------
TEST_CASE("averaging operator: delta_0 spreads onto the weighted orbit") {
    PrimeTable primes = sieve_primes(100);
    MultiIndexSet G = build_gamma(1, 2);  // Q(p) = (p, p^2)
    Lift lift = identity_lift(G);
    OrbitStructure st{0, 1, false};
    ConvexBody B = ConvexBody::cube(1);
    WeightedOrbit orb = enumerate_orbit(B, 10, st, G, primes);
    REQUIRE(orb.npoints == 4);

    SparseFunction f = SparseFunction::delta(2);
    SparseFunction gw = apply_average(f, orb, lift, true);
    REQUIRE(gw.support_size() == 4);
    const double log210 = std::log(210.0);
    for (i64 p : {2, 3, 5, 7}) {
        std::vector<i64> key{p, p * p};
        REQUIRE(gw.a.count(key) == 1);
        CHECK(gw.a.at(key).real() ==
              doctest::Approx(std::log(static_cast<double>(p)) / log210).epsilon(1e-14));
        CHECK(gw.a.at(key).imag() == 0.0);
    }
    CHECK(std::abs(mass(gw) - cplx(1.0, 0.0)) < 1e-14);

    SparseFunction gu = apply_average(f, orb, lift, false);
    for (i64 p : {2, 3, 5, 7}) {
        std::vector<i64> key{p, p * p};
        CHECK(gu.a.at(key).real() == doctest::Approx(0.25));
    }
    CHECK(std::abs(mass(gu) - cplx(1.0, 0.0)) < 1e-14);

    // translation equivariance: M_N (tau_v f) = tau_v (M_N f)
    std::vector<i64> v{11, -4};
    SparseFunction lhs = apply_average(translate(f, v), orb, lift, true);
    SparseFunction rhs = translate(gw, v);
    CHECK(max_abs_diff(lhs, rhs) <= 1e-15);

    SparseFunction wrong_dim = SparseFunction::delta(1);
    CHECK_THROWS(apply_average(wrong_dim, orb, lift, true));
    WeightedOrbit empty = enumerate_orbit(B, 1, st, G, primes);
    CHECK(empty.npoints == 0);
    CHECK_THROWS(apply_average(f, empty, lift, true));
}

TEST_CASE("singular operator: signed orbit, odd kernel, zero mass") {
    PrimeTable primes = sieve_primes(100);
    MultiIndexSet G = build_gamma(1, 1);  // Q(p) = p
    Lift lift = identity_lift(G);
    OrbitStructure st{0, 1, true};
    ConvexBody B = ConvexBody::cube(1);
    WeightedOrbit orb = enumerate_orbit(B, 10, st, G, primes);
    REQUIRE(orb.npoints == 8);  // +-2 +-3 +-5 +-7

    CZKernel kern = make_cz_kernel(1);
    SparseFunction f = SparseFunction::delta(1);
    SparseFunction g = apply_singular(f, kern, orb, lift);
    REQUIRE(g.support_size() == 8);
    for (i64 p : {2, 3, 5, 7}) {
        double want = std::log(static_cast<double>(p)) / (2.0 * static_cast<double>(p));
        CHECK(g.a.at(std::vector<i64>{p}).real() == doctest::Approx(want).epsilon(1e-14));
        CHECK(g.a.at(std::vector<i64>{-p}).real() == doctest::Approx(-want).epsilon(1e-14));
    }
    CHECK(std::abs(mass(g)) < 1e-15);
    double l1 = std::log(2.0) / 2 + std::log(3.0) / 3 + std::log(5.0) / 5 + std::log(7.0) / 7;
    CHECK(lp_norm(g, 1.0) == doctest::Approx(l1).epsilon(1e-14));

    WeightedOrbit unsigned_orb = enumerate_orbit(B, 10, OrbitStructure{0, 1, false}, G, primes);
    CHECK_THROWS(apply_singular(f, kern, unsigned_orb, lift));
}

// -----------------------------------------------------------------------------
// Weighted vs unweighted comparison
// -----------------------------------------------------------------------------
TEST_CASE("weighted-unweighted table: rows, fit, and skipping") {
    PrimeTable primes = sieve_primes(200);
    MultiIndexSet G = build_gamma(1, 2);
    Lift lift = identity_lift(G);
    OrbitStructure st{0, 1, false};
    ConvexBody B = ConvexBody::cube(1);
    SparseFunction f = SparseFunction::delta(2);

    std::vector<i64> Ns{10, 20, 40, 80, 160};
    auto tab = compare_weighted_unweighted(f, B, st, lift, primes, Ns, 2.0);
    REQUIRE(tab.rows.size() == 5);
    double cmax = 0;
    for (const auto& row : tab.rows) {
        CHECK_FALSE(row.skipped);
        CHECK(row.diff_norm > 0.0);  // log-weights differ from uniform
        CHECK(row.c_N == doctest::Approx(row.diff_norm * std::log(static_cast<double>(row.N))));
        cmax = std::max(cmax, row.c_N);
    }
    CHECK(tab.C_fit == doctest::Approx(cmax));

    // N = 1 has an empty orbit and must be skipped, not fail
    std::vector<i64> Ns2{1, 10};
    auto tab2 = compare_weighted_unweighted(f, B, st, lift, primes, Ns2, 2.0);
    REQUIRE(tab2.rows.size() == 2);
    CHECK(tab2.rows[0].skipped);
    CHECK_FALSE(tab2.rows[1].skipped);

    std::vector<i64> bad{10, 10};
    CHECK_THROWS(compare_weighted_unweighted(f, B, st, lift, primes, bad, 2.0));
}

// -----------------------------------------------------------------------------
// Telescoping l^1 diagnostics
// -----------------------------------------------------------------------------
TEST_CASE("telescoping: average hand value at (5, 10)") {
    PrimeTable primes = sieve_primes(100);
    TelescopingSetup setup;
    setup.B = ConvexBody::cube(1);
    setup.st = OrbitStructure{0, 1, false};
    setup.lift = identity_lift(build_gamma(1, 1));
    setup.primes = &primes;

    TelescopingResult res = telescoping_l1(TelescopingKind::average, 5, 10, setup);
    const double log30 = std::log(30.0), log210 = std::log(210.0), log7 = std::log(7.0);
    CHECK(res.lhs == doctest::Approx(1.0 - log30 / log210 + log7 / log210).epsilon(1e-12));
    CHECK(res.raw_factor == doctest::Approx(log7 / 5.0).epsilon(1e-12));
    CHECK(res.pointwise_ok);
    CHECK(res.lhs <= res.rhs_bound);

    CHECK_THROWS(telescoping_l1(TelescopingKind::average, 10, 5, setup));
    CHECK_THROWS(telescoping_l1(TelescopingKind::average, 0, 5, setup));
    TelescopingSetup shallow = setup;
    PrimeTable small = sieve_primes(8);
    shallow.primes = &small;
    CHECK_THROWS(telescoping_l1(TelescopingKind::average, 5, 10, shallow));
}

TEST_CASE("telescoping: singular hand value at (5, 10) is log7/7") {
    PrimeTable primes = sieve_primes(100);
    TelescopingSetup setup;
    setup.B = ConvexBody::cube(1);
    setup.st = OrbitStructure{0, 1, true};
    setup.lift = identity_lift(build_gamma(1, 1));
    setup.primes = &primes;
    setup.kernel = make_cz_kernel(1);

    TelescopingResult res = telescoping_l1(TelescopingKind::singular, 5, 10, setup);
    CHECK(res.lhs == doctest::Approx(std::log(7.0) / 7.0).epsilon(1e-12));
    // the signed orbit admits -7 and +7, each weighted log 7
    CHECK(res.raw_factor == doctest::Approx(2.0 * std::log(7.0) / 5.0).epsilon(1e-12));
    CHECK(res.lhs <= res.rhs_bound);

    TelescopingSetup badst = setup;
    badst.st.with_sign = false;
    CHECK_THROWS(telescoping_l1(TelescopingKind::singular, 5, 10, badst));
}

TEST_CASE("telescoping: no-change window has zero mass") {
    // no prime enters between 24 and 28, so every kernel difference vanishes
    PrimeTable primes = sieve_primes(100);
    TelescopingSetup setup;
    setup.B = ConvexBody::cube(1);
    setup.st = OrbitStructure{0, 1, false};
    setup.lift = identity_lift(build_gamma(1, 1));
    setup.primes = &primes;
    TelescopingResult res = telescoping_l1(TelescopingKind::average, 24, 28, setup);
    CHECK(res.lhs == 0.0);
    CHECK(res.pointwise_ok);
}
