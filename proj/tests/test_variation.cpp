// =============================================================================
// Variation seminorm tests.  Hand case: the alternating sequence
// (0, 1, 0, 1, 0) has V_1 = 4 (every jump contributes) and V_2 = 2 (four unit
// jumps in ell^2), and its dyadic layers give exactly sqrt(2) * 2 on the
// right-hand side.  The DP is cross-checked against chain enumeration, and
// the ladder values floor(2^{n^rho}) are pinned by hand.
// =============================================================================

#include <cmath>
#include <complex>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "rvl/util.hpp"
#include "rvl/variation.hpp"

using namespace rvl;

namespace {

std::vector<cplx> alternating() { return {0.0, 1.0, 0.0, 1.0, 0.0}; }

}  // namespace

TEST_CASE("hand values on the alternating sequence") {
    auto a = alternating();
    CHECK(vr(a, 1.0) == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(vr(a, 2.0) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(vr(a, 10.0) == doctest::Approx(std::pow(4.0, 0.1)).epsilon(1e-14));
    // two-point sequence: V_r is the single jump for every r
    std::vector<cplx> two{cplx(1.0, 2.0), cplx(-2.0, 6.0)};
    CHECK(vr(two, 3.0) == doctest::Approx(5.0).epsilon(1e-14));
}

TEST_CASE("dynamic program equals chain enumeration") {
    Rng rng(31);
    for (int t = 0; t < 400; ++t) {
        std::size_t len = static_cast<std::size_t>(rng.range(2, 11));
        std::vector<cplx> a(len);
        for (auto& v : a) v = rng.gaussian_pair();
        for (double r : {1.3, 2.0, 3.7}) {
            double dp = vr(a, r);
            double bf = vr_bruteforce(a, r);
            CHECK(dp == doctest::Approx(bf).epsilon(1e-12));
        }
    }
}

TEST_CASE("indexed sequences validate and match the flat overload") {
    IndexedSequence seq;
    seq.idx = {2, 5, 9};
    seq.val = {1.0, 2.0, 0.0};
    CHECK(vr(seq, 2.0) == doctest::Approx(std::sqrt(5.0)).epsilon(1e-14));
    IndexedSequence bad;
    bad.idx = {1, 1};
    bad.val = {0.0, 1.0};
    CHECK_THROWS(bad.validate());
    IndexedSequence mismatch;
    mismatch.idx = {1, 2};
    mismatch.val = {0.0};
    CHECK_THROWS(mismatch.validate());
}

TEST_CASE("dyadic bound hand case and random sweep") {
    auto a = alternating();
    DyadicBound b = vr_dyadic_bound(a, 2.0);
    CHECK(b.lhs == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(b.rhs == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-14));

    Rng rng(32);
    for (int t = 0; t < 300; ++t) {
        std::vector<cplx> x(17);  // 2^4 + 1
        for (auto& v : x) v = rng.gaussian_pair();
        for (double r : {2.0, 2.5, 4.0}) {
            DyadicBound d = vr_dyadic_bound(x, r);
            CHECK(d.lhs <= d.rhs * (1.0 + 1e-12));
        }
    }
    std::vector<cplx> wrong(6);  // not 2^s + 1
    CHECK_THROWS(vr_dyadic_bound(wrong, 2.0));
}

TEST_CASE("oscillation hand case and domination by variation") {
    IndexedSequence seq;
    seq.idx = {0, 1, 2, 3, 4};
    seq.val = alternating();
    std::vector<i64> lac{0, 2, 4};
    // each block contains a unit excursion: O = sqrt(2)
    CHECK(oscillation(seq, lac) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));

    Rng rng(33);
    for (int t = 0; t < 300; ++t) {
        IndexedSequence s;
        s.idx.resize(21);
        std::iota(s.idx.begin(), s.idx.end(), 0);
        s.val.resize(21);
        for (auto& v : s.val) v = rng.gaussian_pair();
        std::vector<i64> l{0, 4, 9, 15, 20};
        double osc = oscillation(s, l);
        double V = vr(s, 2.0);
        CHECK(osc <= 2.0 * V * (1.0 + 1e-12));  // sup per block <= V_2, four blocks
    }
}

TEST_CASE("scale ladder values") {
    ScaleLadder lad = make_ladder(0.5, 1, 1 << 16, 40);
    // N_n = floor(2^{sqrt(n)})
    REQUIRE(lad.Nseq.size() >= 26);
    CHECK(lad.Nseq[1] == 2);
    CHECK(lad.Nseq[4] == 4);
    CHECK(lad.Nseq[9] == 8);
    CHECK(lad.Nseq[16] == 16);
    CHECK(lad.Nseq[25] == 32);
    for (std::size_t i = 1; i + 1 < lad.Nseq.size(); ++i) CHECK(lad.Nseq[i] <= lad.Nseq[i + 1]);
    // kappa_0 = 20 d (floor(1/rho) + 1) = 20 * (2 + 1)
    CHECK(lad.kappas[0] == 60);
    // Q_0 = (floor(e))! = 2
    REQUIRE(!lad.Qs.empty());
    REQUIRE(lad.Qs[0].value().has_value());
    CHECK(*lad.Qs[0].value() == 2);
    CHECK_THROWS(make_ladder(1.5, 1, 100, 10));
    CHECK_THROWS(make_ladder(0.5, 0, 100, 10));
}

TEST_CASE("long-short split controls the total variation") {
    Rng rng(34);
    for (int t = 0; t < 200; ++t) {
        IndexedSequence s;
        std::size_t len = static_cast<std::size_t>(rng.range(8, 60));
        s.idx.resize(len);
        std::iota(s.idx.begin(), s.idx.end(), 1);
        s.val.resize(len);
        for (auto& v : s.val) v = rng.gaussian_pair();
        SplitVariation sp = split_variation(s, 0.5, 2.0);
        CHECK(sp.ok_c2);
        CHECK(sp.total <= 2.0 * (sp.long_part + sp.short_part) * (1.0 + 1e-12));
        CHECK(sp.c_min <= 2.0 * (1.0 + 1e-12));
        CHECK(sp.total >= sp.long_part * (1.0 - 1e-12));  // sampling only drops jumps
    }
}
