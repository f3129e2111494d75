// =============================================================================
// The fifteen acceptance criteria.
//
// Each criterion is a self-contained numerical experiment with a hard verdict:
//
//    1 vr-oracle             DP variation norm against exhaustive chains
//    2 dyadic-lemma          V_r <= sqrt(2) sum of dyadic ell^2 layers
//    3 variation-algebra     sup bound, block chaining, r-monotonicity,
//                            Minkowski, oscillation vs variation
//    4 ramanujan             averaged exponential sum = mu(q/g)/phi(q/g)
//    5 gauss-crt             direct complete sums = CRT-factored sums
//    6 gauss-decay           max_a |G(a/q)| <= C q^{-delta}, delta >= 1/5
//    7 chebyshev-asymptotic  vartheta_B(N) / (|B intersect R_+^k| N^k) -> 1
//    8 major-arc             m_N(a/q) -> G(a/q) Phi_N(0)
//    9 singular-major-arc    (h_{2N}-h_N)(a/q) -> G(a/q)(Psi_{2N}-Psi_N)(0) = 0
//   10 telescoping           closed-form l^1 kernel differences vs direct sums
//   11 fourier-consistency   transform(average f) = m_N * transform(f)
//   12 envelopes             |Phi| <= C min{1, z^{-1/d}}, |Phi-1| <= C min{1,z},
//                            |Psi_N - Psi_{2N}| <= C min{z, z^{-1/d}}, z = |N^A xi|
//   13 weighted-unweighted   ||M_N f - A_N f||_1 <= C ||f||_1 / log N
//   14 iw-partition          P_1, P_2 exact; N_{n^beta} inclusion; disjoint bumps
//   15 minor-arc-decay       |S_N(xi)|/N shrinks on Dirichlet-resistant xi
//
// Verdict discipline: every documented error-type bound is multiplied by the
// tolerance option (so tolerance 0 is the negative control: nothing passes,
// not even the wall-clock budget), counting checks are exact, and constants
// measured from the pinned run (seed 20260816) are frozen below as literals.
// A NaN literal means "not frozen yet" and fails the comparison loudly; a
// --refit run prints fresh candidates instead of comparing.
// =============================================================================

#include "rvl/acceptance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "rvl/expsums.hpp"
#include "rvl/iw.hpp"
#include "rvl/lattice.hpp"
#include "rvl/multipliers.hpp"
#include "rvl/numtheory.hpp"
#include "rvl/operators.hpp"
#include "rvl/phase.hpp"
#include "rvl/util.hpp"
#include "rvl/variation.hpp"

namespace rvl {

namespace {

constexpr std::uint64_t kPinnedSeed = 20260816ull;

// -----------------------------------------------------------------------------
// Frozen references from the pinned run (seed 20260816, tolerance 1).
// NaN = not frozen yet: the comparing check fails until a --refit run's
// printed candidates are pasted here.  References marked seed-dependent are
// only compared when the run uses the pinned seed.
// -----------------------------------------------------------------------------
constexpr double kUnfrozen = std::numeric_limits<double>::quiet_NaN();

constexpr double kRefGaussDelta = 0.46939388301529272;    // fitted decay exponent, qmax 200
constexpr double kRefGaussC = 2.1076276807743737;         // envelope constant at delta = 1/5
constexpr double kRefMajorArcQ2 = 0.00034421512239901642; // |m_N - G Phi| at q = 2, N = 2^12
constexpr double kRefMajorArcQ3 = 0.010598796718030679;   // |m_N - G Phi| at q = 3, N = 2^12
constexpr double kRefSingularQ3 = 0.0090143417222762201;  // |h_{2N} - h_N| at q = 3, N = 2^11
constexpr double kRefWUFitDelta = 1.1868025661792816;     // sup_N log N ||...||/||f|| for delta_0
constexpr double kRefWUFitRand1 = 1.1868025661792814;     // seed-dependent random f #1
constexpr double kRefWUFitRand2 = 1.1868025661792816;     // seed-dependent random f #2

// -----------------------------------------------------------------------------
// Criterion scratchpad: check builders share the tolerance discipline.
// -----------------------------------------------------------------------------
struct Crit {
    const AcceptanceOptions& opt;
    CriterionResult res;
    double tol;
    bool pinned;
    double t0;

    Crit(const std::string& name, const AcceptanceOptions& o)
        : opt(o), tol(o.tolerance), pinned(o.seed == kPinnedSeed), t0(now_seconds()) {
        res.name = name;
    }

    // value <= bound * tolerance (error-type documented bound)
    void le(const std::string& name, double value, double bound, const std::string& note) {
        CheckRecord c;
        c.name = name;
        c.value = value;
        c.bound = bound * tol;
        c.pass = value <= c.bound;
        c.note = note;
        res.checks.push_back(std::move(c));
    }
    // value >= bound (rate-type lower bound; tolerance does not relax these)
    void ge(const std::string& name, double value, double bound, const std::string& note) {
        CheckRecord c;
        c.name = name;
        c.value = value;
        c.bound = bound;
        c.pass = value >= bound;
        c.note = note + " (lower bound)";
        res.checks.push_back(std::move(c));
    }
    // exact counting check; tolerance cannot buy violations back
    void count0(const std::string& name, double count, const std::string& note) {
        CheckRecord c;
        c.name = name;
        c.value = count;
        c.bound = 0;
        c.pass = count == 0;
        c.note = note + " (exact count)";
        res.checks.push_back(std::move(c));
    }
    void flag(const std::string& name, bool ok, const std::string& note) {
        CheckRecord c;
        c.name = name;
        c.value = ok ? 1 : 0;
        c.bound = 1;
        c.pass = ok;
        c.note = note;
        res.checks.push_back(std::move(c));
    }
    // comparison against a frozen pinned-run reference
    void frozen(const std::string& name, double measured, double ref, bool seed_dependent) {
        CheckRecord c;
        c.name = name;
        c.value = measured;
        c.bound = ref;
        if (opt.refit) {
            c.pass = true;
            char buf[96];
            std::snprintf(buf, sizeof buf, "FROZEN CANDIDATE %.17g", measured);
            c.note = buf;
        } else if (seed_dependent && !pinned) {
            c.pass = true;
            c.note = "frozen comparison skipped: seed differs from the pinned run";
        } else if (std::isnan(ref)) {
            c.pass = false;
            c.note = "reference not frozen: run --refit at the pinned seed and paste the value";
        } else {
            double slack = 1e-9 * std::max(1.0, std::abs(ref));
            c.pass = std::abs(measured - ref) <= slack;
            c.note = "matches the frozen pinned-run value to 1e-9";
        }
        res.checks.push_back(std::move(c));
    }
    // strictly-decreasing trend with an identically-zero floor
    void trend(const std::string& label, const std::vector<double>& errs, double final_bound) {
        double mx = 0;
        for (double e : errs) mx = std::max(mx, e);
        if (mx < 1e-14) {
            le(label + " magnitude", mx, 1e-14, "row is identically zero; decay is vacuous");
            return;
        }
        double worst = 0;
        for (std::size_t i = 0; i + 1 < errs.size(); ++i) {
            double ratio = errs[i] == 0 ? (errs[i + 1] == 0 ? 0.0
                                                            : std::numeric_limits<double>::infinity())
                                        : errs[i + 1] / errs[i];
            worst = std::max(worst, ratio);
        }
        le(label + " worst step ratio", worst, 1.0, "consecutive errors must shrink");
        if (final_bound > 0)
            le(label + " final error", errs.back(), final_bound, "terminal scale");
    }
    CriterionResult finish(double limit_seconds) {
        res.seconds = now_seconds() - t0;
        le("runtime seconds", res.seconds, limit_seconds, "wall clock budget");
        res.pass = true;
        for (const auto& c : res.checks) res.pass = res.pass && c.pass;
        return res;
    }
};

std::vector<cplx> random_seq(Rng& rng, std::size_t len) {
    std::vector<cplx> a(len);
    for (auto& v : a) v = rng.gaussian_pair();
    return a;
}

// =============================================================================
// 1. vr-oracle
// =============================================================================
CriterionResult crit_vr_oracle(const AcceptanceOptions& opt) {
    Crit c("vr-oracle", opt);
    Rng rng(opt.seed * 1000003ull + 1);
    const double rs[] = {2.0, 2.5, 3.0, 10.0};
    double max_rel = 0;
    for (int t = 0; t < 500; ++t) {
        std::size_t len = static_cast<std::size_t>(rng.range(2, 12));
        auto a = random_seq(rng, len);
        for (double r : rs) {
            double dp = vr(a, r);
            double bf = vr_bruteforce(a, r);
            double rel = std::abs(dp - bf) / std::max(bf, 1e-300);
            max_rel = std::max(max_rel, rel);
        }
    }
    c.le("max relative DP vs exhaustive gap", max_rel, 1e-12,
         "500 sequences, lengths 2..12, r in {2, 2.5, 3, 10}");
    return c.finish(5.0);
}

// =============================================================================
// 2. dyadic-lemma
// =============================================================================
CriterionResult crit_dyadic(const AcceptanceOptions& opt) {
    Crit c("dyadic-lemma", opt);
    Rng rng(opt.seed * 1000003ull + 2);
    const double rs[] = {2.0, 3.0};
    int violations = 0;
    double worst_ratio = 0;
    for (int t = 0; t < 1000; ++t) {
        auto a = random_seq(rng, 65);  // 2^6 + 1
        for (double r : rs) {
            DyadicBound b = vr_dyadic_bound(a, r);
            if (b.lhs > b.rhs * (1.0 + 1e-12)) ++violations;
            if (b.rhs > 0) worst_ratio = std::max(worst_ratio, b.lhs / b.rhs);
        }
    }
    c.count0("bound violations", violations, "1000 sequences of length 65, r in {2, 3}");
    c.le("worst lhs/rhs ratio", worst_ratio, 1.0 + 1e-12, "sharpness margin");
    return c.finish(10.0);
}

// =============================================================================
// 3. variation-algebra
// =============================================================================
CriterionResult crit_variation_algebra(const AcceptanceOptions& opt) {
    Crit c("variation-algebra", opt);
    Rng rng(opt.seed * 1000003ull + 3);
    const double slack = 1.0 + 1e-12;

    // sup_j |a_j| <= V_r + min_{j0} |a_{j0}| (strongest anchor)
    int v_sup = 0;
    for (int t = 0; t < 1000; ++t) {
        auto a = random_seq(rng, static_cast<std::size_t>(rng.range(2, 30)));
        double r = (t % 3 == 0) ? 1.5 : (t % 3 == 1 ? 2.0 : 3.0);
        double V = vr(a, r);
        double sup = 0, mn = std::numeric_limits<double>::infinity();
        for (auto& v : a) {
            sup = std::max(sup, std::abs(v));
            mn = std::min(mn, std::abs(v));
        }
        if (sup > (V + mn) * slack) ++v_sup;
    }
    c.count0("sup-bound violations", v_sup, "sup |a_j| <= V_r + min_j0 |a_j0|, 1000 trials");

    // block chaining: V_r(whole) <= K^{1-1/r} (sum_k V_r(block k)^r)^{1/r},
    // blocks sharing endpoints
    int v_chain = 0;
    for (int t = 0; t < 1000; ++t) {
        std::size_t len = 41;
        auto a = random_seq(rng, len);
        double r = (t % 3 == 0) ? 1.5 : (t % 3 == 1 ? 2.0 : 3.0);
        int K = static_cast<int>(rng.range(2, 6));
        std::vector<std::size_t> cuts{0, len - 1};
        while (static_cast<int>(cuts.size()) < K + 1) {
            std::size_t u = static_cast<std::size_t>(rng.range(1, static_cast<i64>(len) - 2));
            if (std::find(cuts.begin(), cuts.end(), u) == cuts.end()) cuts.push_back(u);
        }
        std::sort(cuts.begin(), cuts.end());
        double sum_r = 0;
        for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
            std::span<const cplx> blk(a.data() + cuts[k], cuts[k + 1] - cuts[k] + 1);
            sum_r += std::pow(vr(blk, r), r);
        }
        double rhs = std::pow(static_cast<double>(K), 1.0 - 1.0 / r) * std::pow(sum_r, 1.0 / r);
        if (vr(a, r) > rhs * slack) ++v_chain;
    }
    c.count0("block-chaining violations", v_chain,
             "V_r(whole) <= K^{1-1/r} ell^r of inclusive block variations, 1000 trials");

    // r -> V_r is non-increasing
    int v_mono = 0;
    const double rgrid[] = {1.0, 1.5, 2.0, 3.0, 10.0};
    for (int t = 0; t < 1000; ++t) {
        auto a = random_seq(rng, static_cast<std::size_t>(rng.range(3, 24)));
        double prev = std::numeric_limits<double>::infinity();
        for (double r : rgrid) {
            double V = vr(a, r);
            if (V > prev * slack) ++v_mono;
            prev = V;
        }
    }
    c.count0("r-monotonicity violations", v_mono, "V_r non-increasing over r in {1,1.5,2,3,10}");

    // V_r <= 2 (sum_j |a_j|^r)^{1/r}
    int v_mink = 0;
    for (int t = 0; t < 1000; ++t) {
        auto a = random_seq(rng, static_cast<std::size_t>(rng.range(2, 24)));
        double r = (t % 3 == 0) ? 1.5 : (t % 3 == 1 ? 2.0 : 3.0);
        double s = 0;
        for (auto& v : a) s += std::pow(std::abs(v), r);
        if (vr(a, r) > 2.0 * std::pow(s, 1.0 / r) * slack) ++v_mink;
    }
    c.count0("ell^r comparison violations", v_mink, "V_r <= 2 ||a||_{ell^r}, 1000 trials");

    // O_J <= J^{1/2 - 1/r} V_r for r >= 2
    int v_osc = 0;
    for (int t = 0; t < 1000; ++t) {
        std::size_t len = 33;
        IndexedSequence seq;
        seq.idx.resize(len);
        std::iota(seq.idx.begin(), seq.idx.end(), 0);
        seq.val = random_seq(rng, len);
        double r = (t % 3 == 0) ? 2.0 : (t % 3 == 1 ? 2.5 : 3.0);
        int J = static_cast<int>(rng.range(2, 8));
        std::vector<i64> lac{0, static_cast<i64>(len) - 1};
        while (static_cast<int>(lac.size()) < J + 1) {
            i64 u = rng.range(1, static_cast<i64>(len) - 2);
            if (std::find(lac.begin(), lac.end(), u) == lac.end()) lac.push_back(u);
        }
        std::sort(lac.begin(), lac.end());
        double osc = oscillation(seq, lac);
        double rhs = std::pow(static_cast<double>(lac.size() - 1), 0.5 - 1.0 / r) * vr(seq, r);
        if (osc > rhs * slack) ++v_osc;
    }
    c.count0("oscillation-bound violations", v_osc,
             "O_J <= J^{1/2-1/r} V_r, r in {2, 2.5, 3}, 1000 trials");
    return c.finish(30.0);
}

// =============================================================================
// 4. ramanujan
// =============================================================================
CriterionResult crit_ramanujan(const AcceptanceOptions& opt) {
    Crit c("ramanujan", opt);
    double max_err = 0;
    for (i64 q = 1; q <= 500; ++q) {
        for (i64 a = 1; a <= q; ++a) {
            cplx avg = ramanujan_average(a, q);
            double closed = ramanujan_closed_form(a, q);
            max_err = std::max(max_err, std::abs(avg - closed));
        }
    }
    c.le("max |average - closed form|", max_err, 1e-12, "all q <= 500, all residues a");
    return c.finish(30.0);
}

// =============================================================================
// 5. gauss-crt
// =============================================================================
CriterionResult crit_gauss_crt(const AcceptanceOptions& opt) {
    Crit c("gauss-crt", opt);
    Rng rng(opt.seed * 1000003ull + 5);
    MultiIndexSet G1 = build_gamma(1, 2);
    MultiIndexSet G2 = build_gamma(2, 2);
    OrbitStructure st1{0, 1, false};
    OrbitStructure st2{1, 1, false};
    struct Case {
        const MultiIndexSet* G;
        const OrbitStructure* st;
        const char* label;
    } cases[] = {{&G1, &st1, "k=1 prime axis"}, {&G2, &st2, "k=2 mixed axes"}};

    double max_err = 0;
    int tested = 0;
    for (i64 q = 4; q <= 100; ++q) {
        bool prime = true;
        for (i64 p = 2; p * p <= q; ++p)
            if (q % p == 0) { prime = false; break; }
        if (prime) continue;
        for (const auto& cs : cases) {
            for (int t = 0; t < 20; ++t) {
                std::vector<i64> a(static_cast<std::size_t>(cs.G->d));
                int guard = 0;
                do {
                    for (auto& ai : a) ai = rng.range(1, q);
                    if (++guard > 500) fail("gauss-crt: could not draw a in A_q");
                } while (!in_A_q(a, q));
                cplx d = gaussian_sum_direct(a, q, *cs.st, *cs.G);
                cplx m = gaussian_sum_crt(a, q, *cs.st, *cs.G);
                max_err = std::max(max_err, std::abs(d - m));
                ++tested;
            }
        }
    }
    c.le("max |direct - CRT|", max_err, 1e-10, "composite q <= 100, 20 random a per (q, structure)");
    c.ge("pairs tested", static_cast<double>(tested), 2000.0, "coverage floor");
    return c.finish(60.0);
}

// =============================================================================
// 6. gauss-decay
// =============================================================================
CriterionResult crit_gauss_decay(const AcceptanceOptions& opt) {
    Crit c("gauss-decay", opt);
    MultiIndexSet G = build_gamma(1, 2);
    OrbitStructure st{0, 1, false};
    GaussScan scan = gauss_scan(200, st, G);
    c.ge("fitted decay exponent delta", scan.delta_fit, 0.2, "max_a |G(a/q)| <= C q^{-delta}");
    // highly composite q keep |G| large (r^2 = 1 mod 24 for every unit), so
    // the envelope at the least-squares delta drifts up with qmax; the bound
    // pair the criterion quantifies over is checked at the exponent floor,
    // where C(delta) is smallest among admissible delta
    double C02 = envelope_constant(scan, 0.2);
    c.le("envelope constant at delta = 1/5", C02, 5.0, "smallest valid C with delta >= 1/5");
    c.frozen("frozen delta", scan.delta_fit, kRefGaussDelta, false);
    c.frozen("frozen C", C02, kRefGaussC, false);
    return c.finish(300.0);
}

// =============================================================================
// 7. chebyshev-asymptotic
// =============================================================================
CriterionResult crit_chebyshev(const AcceptanceOptions& opt) {
    Crit c("chebyshev-asymptotic", opt);
    PrimeTable primes = sieve_primes_cached(100000);
    struct Case {
        ConvexBody B;
        OrbitStructure st;
        const char* label;
    } cases[] = {{ConvexBody::cube(1), {0, 1, false}, "interval"},
                 {ConvexBody::cube(2), {1, 1, false}, "square"},
                 {ConvexBody::euclidean_ball(2), {1, 1, false}, "disc"}};
    for (auto& cs : cases) {
        std::vector<double> errs;
        for (int e = 8; e <= 14; ++e) {
            i64 N = i64{1} << e;
            Counting ct = counting(cs.B, N, cs.st, primes);
            double denom = cs.B.orthant_volume * std::pow(static_cast<double>(N), cs.B.k);
            errs.push_back(std::abs(ct.vartheta / denom - 1.0));
        }
        std::vector<double> tail(errs.end() - 4, errs.end());
        c.trend(std::string(cs.label) + " |ratio - 1|", tail,
                3.0 / std::log(std::pow(2.0, 14.0)));
    }
    return c.finish(120.0);
}

// =============================================================================
// 8 and 9. major-arc approximations
// =============================================================================
std::vector<RationalFrequency> arc_frequencies() {
    // first component carries a/q in {0/1, 1/2, 1/3}, second is rational zero
    std::vector<RationalFrequency> out;
    out.push_back(make_rational_frequency(1, {1, 1}, {0.0, 0.0}));
    out.push_back(make_rational_frequency(2, {1, 2}, {0.0, 0.0}));
    out.push_back(make_rational_frequency(3, {1, 3}, {0.0, 0.0}));
    return out;
}

CriterionResult crit_major_arc(const AcceptanceOptions& opt) {
    Crit c("major-arc", opt);
    MajorArcSetup setup;
    setup.B = ConvexBody::cube(1);
    setup.st = {0, 1, false};
    setup.G = build_gamma(1, 2);
    PrimeTable primes = sieve_primes_cached(i64{1} << 12);
    setup.primes = &primes;
    setup.nodes = 96;
    auto freqs = arc_frequencies();
    const char* labels[] = {"a/q = 0", "a/q = 1/2", "a/q = 1/3"};
    double finals[3] = {0, 0, 0};
    for (std::size_t i = 0; i < freqs.size(); ++i) {
        std::vector<double> errs;
        for (int e = 6; e <= 12; ++e)
            errs.push_back(
                major_arc_error(freqs[i], i64{1} << e, MultiplierKind::discrete_average, setup)
                    .err);
        finals[i] = errs.back();
        c.trend(std::string(labels[i]) + " error", errs, 0.05);
    }
    c.frozen("frozen final error at 1/2", finals[1], kRefMajorArcQ2, false);
    c.frozen("frozen final error at 1/3", finals[2], kRefMajorArcQ3, false);
    return c.finish(180.0);
}

CriterionResult crit_singular_major_arc(const AcceptanceOptions& opt) {
    Crit c("singular-major-arc", opt);
    MajorArcSetup setup;
    setup.B = ConvexBody::cube(1);
    setup.st = {0, 1, true};
    setup.G = build_gamma(1, 2);
    PrimeTable primes = sieve_primes_cached(i64{1} << 12);
    setup.primes = &primes;
    setup.kernel = make_cz_kernel(1);
    setup.nodes = 96;
    auto freqs = arc_frequencies();
    const char* labels[] = {"a/q = 0", "a/q = 1/2", "a/q = 1/3"};
    double final3 = 0;
    for (std::size_t i = 0; i < freqs.size(); ++i) {
        std::vector<double> errs;
        for (int e = 6; e <= 11; ++e)
            errs.push_back(
                major_arc_error(freqs[i], i64{1} << e, MultiplierKind::discrete_singular, setup)
                    .err);
        if (i == 2) final3 = errs.back();
        c.trend(std::string(labels[i]) + " shell error", errs, -1.0);
    }
    c.frozen("frozen final error at 1/3", final3, kRefSingularQ3, false);
    return c.finish(180.0);
}

// =============================================================================
// 10. telescoping
// =============================================================================
CriterionResult crit_telescoping(const AcceptanceOptions& opt) {
    Crit c("telescoping", opt);
    Rng rng(opt.seed * 1000003ull + 10);
    PrimeTable primes = sieve_primes_cached(4096);
    const i64 top = 300;
    std::vector<double> th(static_cast<std::size_t>(top) + 1, 0.0);
    for (i64 n = 1; n <= top; ++n)
        th[static_cast<std::size_t>(n)] =
            th[static_cast<std::size_t>(n - 1)] +
            (primes.is_prime(n) ? std::log(static_cast<double>(n)) : 0.0);

    // closed forms against the direct scan of |kappa_{n+1} - kappa_n| on the
    // fiber of a single prime p: the averaging kernel is log p / vartheta(n)
    // once p <= n, the singular kernel is K(p) log p once p <= n.
    CZKernel kern = make_cz_kernel(1);
    double max_rel = 0;
    for (int t = 0; t < 50; ++t) {
        i64 N1 = rng.range(3, 150);
        i64 N2 = rng.range(N1 + 1, top);
        std::size_t np = primes.count_below(N2);
        i64 p = primes.primes[static_cast<std::size_t>(rng.below(static_cast<i64>(np)))];
        double lp = std::log(static_cast<double>(p));
        bool avg = (t % 2 == 0);
        double direct = 0, prev;
        if (avg) {
            prev = p <= N1 ? lp / th[static_cast<std::size_t>(N1)] : 0.0;
            for (i64 n = N1 + 1; n <= N2; ++n) {
                double cur = p <= n ? lp / th[static_cast<std::size_t>(n)] : 0.0;
                direct += std::abs(cur - prev);
                prev = cur;
            }
        } else {
            double x[1] = {static_cast<double>(p)};
            double Kp = kern.evaluate(std::span<const double>(x, 1));
            prev = p <= N1 ? Kp * lp : 0.0;
            for (i64 n = N1 + 1; n <= N2; ++n) {
                double cur = p <= n ? Kp * lp : 0.0;
                direct += std::abs(cur - prev);
                prev = cur;
            }
        }
        double closed;
        if (avg)
            closed = p <= N1 ? lp * (1.0 / th[static_cast<std::size_t>(N1)] -
                                     1.0 / th[static_cast<std::size_t>(N2)])
                             : lp * (2.0 / th[static_cast<std::size_t>(p)] -
                                     1.0 / th[static_cast<std::size_t>(N2)]);
        else {
            double x[1] = {static_cast<double>(p)};
            closed = p <= N1 ? 0.0
                             : std::abs(kern.evaluate(std::span<const double>(x, 1))) * lp;
        }
        double rel = std::abs(direct - closed) / std::max(std::abs(closed), 1e-30);
        if (closed == 0.0) rel = std::abs(direct);
        max_rel = std::max(max_rel, rel);
    }
    c.le("max closed-form vs direct gap", max_rel, 1e-12, "50 random (N1, N2, prime) triples");

    // l^1 bound with the frozen constant, both kinds.  The constant is the
    // sup of lhs / (N1^{-k} (vartheta(N2) - vartheta(N1))) over the window
    // family below, measured on the pinned run.  Short windows where a single
    // prime enters dominate: on (p-1, p] the averaging ratio is exactly
    // 2 (p-1) / vartheta(p), so the sup sits near p = 11, not at the wide
    // doubling windows.
    MultiIndexSet G = build_gamma(1, 2);
    TelescopingSetup ts;
    ts.B = ConvexBody::cube(1);
    ts.lift = identity_lift(G);
    ts.primes = &primes;
    ts.kernel = kern;
    double worst_avg = 0, worst_sing = 0;
    int pw_fail = 0, bound_fail = 0;
    auto probe = [&](i64 N1, i64 N2) {
        ts.st = {0, 1, false};
        TelescopingResult ra = telescoping_l1(TelescopingKind::average, N1, N2, ts);
        if (!ra.pointwise_ok) ++pw_fail;
        if (ra.lhs > ra.rhs_bound * c.tol) ++bound_fail;
        if (ra.raw_factor > 0) worst_avg = std::max(worst_avg, ra.lhs / ra.raw_factor);
        ts.st = {0, 1, true};
        TelescopingResult rs = telescoping_l1(TelescopingKind::singular, N1, N2, ts);
        if (!rs.pointwise_ok) ++pw_fail;
        if (rs.lhs > rs.rhs_bound * c.tol) ++bound_fail;
        if (rs.raw_factor > 0) worst_sing = std::max(worst_sing, rs.lhs / rs.raw_factor);
    };
    for (i64 N1 = 3; N1 < 128; ++N1)
        for (i64 N2 = N1 + 1; N2 <= 128; ++N2) probe(N1, N2);
    probe(64, 256);
    c.count0("fiber identity failures", pw_fail, "closed form on fibers inside B_{N1}");
    c.count0("l^1 bound failures", bound_fail,
             "lhs <= C N1^{-k} (vartheta(N2) - vartheta(N1)), frozen C, "
             "all windows 3 <= N1 < N2 <= 128 plus (64, 256)");
    if (opt.refit) {
        c.frozen("refit telescoping C (average)", worst_avg, kUnfrozen, false);
        c.frozen("refit telescoping C (singular)", worst_sing, kUnfrozen, false);
    }
    return c.finish(60.0);
}

// =============================================================================
// 11. fourier-consistency
// =============================================================================
CriterionResult crit_fourier(const AcceptanceOptions& opt) {
    Crit c("fourier-consistency", opt);
    Rng rng(opt.seed * 1000003ull + 11);
    MultiIndexSet G = build_gamma(1, 2);
    OrbitStructure st{0, 1, false};
    PrimeTable primes = sieve_primes_cached(64);
    WeightedOrbit orb = enumerate_orbit(ConvexBody::cube(1), 64, st, G, primes);
    Lift lift = identity_lift(G);

    std::vector<RationalFrequency> freqs;
    for (int i = 0; i < 100; ++i) freqs.push_back(pure_offset({rng.uniform(), rng.uniform()}));
    std::vector<cplx> mhat = m_hat(freqs, orb);

    std::vector<SparseFunction> fs;
    fs.push_back(SparseFunction::delta(2));
    for (int i = 0; i < 9; ++i) {
        SparseFunction f(SparseFunction::delta(2));
        f.a.clear();
        for (int s = 0; s < 8; ++s) {
            std::vector<i64> x{rng.range(-20, 20), rng.range(-20, 20)};
            f.add(x, rng.gaussian_pair());
        }
        f.prune_zeros();
        fs.push_back(std::move(f));
    }

    double max_gap = 0;
    for (const auto& f : fs) {
        SparseFunction g = apply_average(f, orb, lift, true);
        for (std::size_t i = 0; i < freqs.size(); ++i) {
            auto xi = freqs[i].xi();
            cplx lhs = transform_sparse(g, xi);
            cplx rhs = mhat[i] * transform_sparse(f, xi);
            max_gap = std::max(max_gap, std::abs(lhs - rhs));
        }
    }
    c.le("max |transform(Af) - m * transform(f)|", max_gap, 1e-10,
         "100 frequencies x 10 sparse functions, N = 64");

    std::vector<RationalFrequency> zero{pure_offset({0.0, 0.0})};
    c.le("|m(0) - 1|", std::abs(m_hat(zero, orb)[0] - 1.0), 1e-13,
         "weights renormalize to mass one");
    return c.finish(60.0);
}

// =============================================================================
// 12. envelopes
// =============================================================================
CriterionResult crit_envelopes(const AcceptanceOptions& opt) {
    Crit c("envelopes", opt);
    Rng rng(opt.seed * 1000003ull + 12);
    const i64 N = i64{1} << 10;

    // k = 1: a 100 x 100 grid in the rescaled variable z = N^A xi covering
    // both envelope regimes while staying inside quadrature resolution
    {
        MultiIndexSet G = build_gamma(1, 2);
        ConvexBody B = ConvexBody::cube(1);
        CZKernel kern = make_cz_kernel(1);
        std::vector<std::vector<double>> xis;
        double N1 = static_cast<double>(N), N2 = N1 * N1;
        for (int i = 0; i < 100; ++i)
            for (int j = 0; j < 100; ++j) {
                double z1 = -24.0 + 48.0 * (i + 0.5) / 100.0;
                double z2 = -24.0 + 48.0 * (j + 0.5) / 100.0;
                xis.push_back({z1 / N1, z2 / N2});
            }
        EnvelopeReport rep = envelope_check(xis, N, B, G, &kern, 96);
        c.count0("interval envelope violations", static_cast<double>(rep.violations),
                 "ratios above the a-priori cap on a 10^4 grid");
        c.le("interval C for |Phi|", rep.C_phi, 10.0, "|Phi| <= C min{1, z^{-1/d}}");
        c.le("interval C for |Phi - 1|", rep.C_phi_minus_1, 10.0, "|Phi - 1| <= C min{1, z}");
        c.le("interval C for |Psi_N - Psi_2N|", rep.C_psi_diff, 10.0,
             "|Psi_N - Psi_{2N}| <= C min{z, z^{-1/d}}");
        c.flag("shell difference audited", rep.psi_checked, "k = 1 kernel path exercised");

        // pure-frequency closed form: Phi over the positive piece of the
        // interval is (e(z) - 1) / (2 pi i z)
        double max_cf = 0;
        for (int t = 0; t < 100; ++t) {
            double z = rng.uniform(1e-3, 20.0);
            std::vector<double> xi{z / N1, 0.0};
            cplx quad = phi_integral(xi, B, G, N, 96, true).value;
            cplx closed = (unit_phase(torus_reduce(z)) - 1.0) / (cplx(0.0, kTwoPi) * z);
            max_cf = std::max(max_cf, std::abs(quad - closed));
        }
        c.le("closed form vs quadrature", max_cf, 1e-10, "linear phases, 100 samples");
    }

    // k = 2 disc, degree 2 (d = 8): random rescaled frequencies
    {
        MultiIndexSet G = build_gamma(2, 2);
        ConvexBody B = ConvexBody::euclidean_ball(2);
        std::vector<std::vector<double>> xis;
        for (int t = 0; t < 500; ++t) {
            std::vector<double> xi(static_cast<std::size_t>(G.d));
            for (int i = 0; i < G.d; ++i) {
                double z = rng.uniform(-6.0, 6.0);
                xi[static_cast<std::size_t>(i)] =
                    z / std::pow(static_cast<double>(N), G.total[static_cast<std::size_t>(i)]);
            }
            xis.push_back(std::move(xi));
        }
        EnvelopeReport rep = envelope_check(xis, N, B, G, nullptr, 64);
        c.count0("disc envelope violations", static_cast<double>(rep.violations),
                 "500 random rescaled frequencies");
        c.le("disc C for |Phi|", rep.C_phi, 10.0, "|Phi| <= C min{1, z^{-1/d}}");
        c.le("disc C for |Phi - 1|", rep.C_phi_minus_1, 10.0, "|Phi - 1| <= C min{1, z}");
    }
    return c.finish(120.0);
}

// =============================================================================
// 13. weighted-unweighted
// =============================================================================
CriterionResult crit_weighted_unweighted(const AcceptanceOptions& opt) {
    Crit c("weighted-unweighted", opt);
    Rng rng(opt.seed * 1000003ull + 13);
    MultiIndexSet G = build_gamma(1, 2);
    OrbitStructure st{0, 1, false};
    ConvexBody B = ConvexBody::cube(1);
    Lift lift = identity_lift(G);
    PrimeTable primes = sieve_primes_cached(i64{1} << 13);
    std::vector<i64> Nlist;
    for (int e = 6; e <= 13; ++e) Nlist.push_back(i64{1} << e);

    std::vector<SparseFunction> fs;
    fs.push_back(SparseFunction::delta(2));
    for (int i = 0; i < 2; ++i) {
        SparseFunction f = SparseFunction::delta(2);
        f.a.clear();
        for (int s = 0; s < 5; ++s) {
            std::vector<i64> x{rng.range(-50, 50), rng.range(-50, 50)};
            f.add(x, rng.gaussian_pair());
        }
        f.prune_zeros();
        fs.push_back(std::move(f));
    }
    const char* labels[] = {"delta_0", "random f1", "random f2"};
    const double refs[] = {kRefWUFitDelta, kRefWUFitRand1, kRefWUFitRand2};
    for (std::size_t i = 0; i < fs.size(); ++i) {
        double fnorm = lp_norm(fs[i], 1.0);
        WeightedUnweightedTable tab =
            compare_weighted_unweighted(fs[i], B, st, lift, primes, Nlist, 1.0);
        double cfit = tab.C_fit / fnorm;
        c.le(std::string(labels[i]) + " sup_N log N ||Mf - Af||/||f||", cfit, 4.0,
             "log-decay constant stays moderate");
        c.frozen(std::string(labels[i]) + " frozen constant", cfit, refs[i], i > 0);
        double last = tab.rows.back().diff_norm / fnorm;
        double bound = cfit / std::log(static_cast<double>(Nlist.back()));
        c.le(std::string(labels[i]) + " final gap vs C/log N", last, bound * (1.0 + 1e-12),
             "the fitted constant really dominates the final scale");
    }
    return c.finish(120.0);
}

// =============================================================================
// 14. iw-partition
// =============================================================================
CriterionResult crit_iw_partition(const AcceptanceOptions& opt) {
    Crit c("iw-partition", opt);

    RationalSet P1 = build_Pn(1, 1);
    c.flag("P_1 = {1}", P1.qs == std::vector<i64>{1}, "base level is trivial");

    std::vector<i64> expect{1};
    for (int e = 1; e <= 21; ++e) expect.push_back(i64{1} << e);
    std::sort(expect.begin(), expect.end());
    RationalSet P2 = build_Pn(2, 1);
    c.flag("P_2 = {2^e : e <= 21} + {1}", P2.qs == expect,
           "n0 = 1, D = 21, lone admissible prime 2");

    // N_{n^beta} inclusion at materializable sizes
    const std::pair<int, int> incl[] = {{10, 1}, {100, 1}, {10000, 1}, {100, 2}, {21, 2}};
    i64 missing = 0;
    for (auto [n, beta] : incl) {
        i64 top = 1;
        for (int b = 0; b < beta; ++b) top *= n;
        for (i64 m = 1; m <= top; ++m)
            if (!in_Pn(m, n, beta)) ++missing;
    }
    c.count0("N_{n^beta} inclusion misses", static_cast<double>(missing),
             "every m <= n^beta is an admissible denominator");

    // support disjointness across shells and bump scales
    MultiIndexSet G = build_gamma(1, 2);
    ScaleLadder ladder = make_ladder(0.5, G.d, i64{1} << 20, 64);
    int fails = 0;
    for (int beta = 1; beta <= 2; ++beta) {
        XiPartitionParams par;
        par.beta = beta;
        par.rho = 0.5;
        par.chi = 0.05;
        par.ladder = &ladder;
        par.G = &G;
        for (int s = 0; s <= 3; ++s)
            for (int m = s + 1; m <= 10; ++m)
                if (!disjointness_check(s, m, par).ok) ++fails;
    }
    c.count0("bump overlap failures", static_cast<double>(fails),
             "shells s <= 3, scales m <= 10, beta <= 2, rho = 1/2, chi = 1/20");
    return c.finish(60.0);
}

// =============================================================================
// 15. minor-arc-decay
// =============================================================================
CriterionResult crit_minor_arc(const AcceptanceOptions& opt) {
    Crit c("minor-arc-decay", opt);
    Rng rng(opt.seed * 1000003ull + 15);
    MultiIndexSet G = build_gamma(1, 2);
    PrimeTable primes = sieve_primes_cached(i64{1} << 13);

    auto minor_component = [&](double x) { return dirichlet_approx(x, 100).err > 1e-3; };
    int improved = 0;
    double worst_ratio = 0;
    for (int t = 0; t < 10; ++t) {
        double x1 = 0, x2 = 0;
        int guard = 0;
        do {
            x1 = rng.uniform();
            x2 = rng.uniform();
            if (++guard > 1000) fail("minor-arc-decay: could not draw a minor-arc frequency");
        } while (!minor_component(x1) || !minor_component(x2));
        ExpSumSpec spec;
        spec.k = 1;
        spec.sets = {AxisSet::primes};
        spec.G = &G;
        spec.poly = {x1, x2};
        spec.logweights = true;
        double lo = weyl_sum(spec, i64{1} << 10, primes).normalized;
        double hi = weyl_sum(spec, i64{1} << 13, primes).normalized;
        if (hi < lo) ++improved;
        if (lo > 0) worst_ratio = std::max(worst_ratio, hi / lo);
    }
    c.ge("frequencies with decay", static_cast<double>(improved), 9.0,
         "|S|/N shrinks from N = 2^10 to N = 2^13 on at least 9 of 10 draws");
    c.le("worst growth ratio", worst_ratio, 1.5,
         "even a failing draw must not blow up");
    return c.finish(300.0);
}

}  // namespace

// =============================================================================
// Dispatch
// =============================================================================
std::vector<std::string> acceptance_names() {
    return {"vr-oracle",      "dyadic-lemma",       "variation-algebra",
            "ramanujan",      "gauss-crt",          "gauss-decay",
            "chebyshev-asymptotic", "major-arc",    "singular-major-arc",
            "telescoping",    "fourier-consistency", "envelopes",
            "weighted-unweighted", "iw-partition",  "minor-arc-decay"};
}

CriterionResult run_criterion(const std::string& name, const AcceptanceOptions& opt) {
    if (name == "vr-oracle") return crit_vr_oracle(opt);
    if (name == "dyadic-lemma") return crit_dyadic(opt);
    if (name == "variation-algebra") return crit_variation_algebra(opt);
    if (name == "ramanujan") return crit_ramanujan(opt);
    if (name == "gauss-crt") return crit_gauss_crt(opt);
    if (name == "gauss-decay") return crit_gauss_decay(opt);
    if (name == "chebyshev-asymptotic") return crit_chebyshev(opt);
    if (name == "major-arc") return crit_major_arc(opt);
    if (name == "singular-major-arc") return crit_singular_major_arc(opt);
    if (name == "telescoping") return crit_telescoping(opt);
    if (name == "fourier-consistency") return crit_fourier(opt);
    if (name == "envelopes") return crit_envelopes(opt);
    if (name == "weighted-unweighted") return crit_weighted_unweighted(opt);
    if (name == "iw-partition") return crit_iw_partition(opt);
    if (name == "minor-arc-decay") return crit_minor_arc(opt);
    std::string known;
    for (const auto& n : acceptance_names()) known += " " + n;
    fail("unknown criterion '" + name + "'; known:" + known);
}

int run_acceptance(const std::string& which, const AcceptanceOptions& opt) {
    std::vector<std::string> names;
    if (which == "all")
        names = acceptance_names();
    else
        names.push_back(which);

    std::vector<CriterionResult> results;
    int failed = 0;
    auto all = acceptance_names();
    for (const auto& name : names) {
        std::size_t ord = 1 + static_cast<std::size_t>(
                                  std::find(all.begin(), all.end(), name) - all.begin());
        CriterionResult r = run_criterion(name, opt);
        std::printf("[%2zu/15] %-22s %s %8.2f s\n", ord, r.name.c_str(),
                    r.pass ? "PASS" : "FAIL", r.seconds);
        if (!r.pass) {
            ++failed;
            for (const auto& ck : r.checks)
                if (!ck.pass)
                    std::printf("        [FAIL] %-40s value %-14.6g bound %-12.6g %s\n",
                                ck.name.c_str(), ck.value, ck.bound, ck.note.c_str());
        } else if (opt.refit) {
            for (const auto& ck : r.checks)
                if (ck.note.rfind("FROZEN CANDIDATE", 0) == 0)
                    std::printf("        [REFIT] %-40s %s\n", ck.name.c_str(), ck.note.c_str());
        }
        results.push_back(std::move(r));
    }
    std::printf("acceptance: %zu/%zu criteria passed (seed %llu, tolerance %g)\n",
                results.size() - static_cast<std::size_t>(failed), results.size(),
                static_cast<unsigned long long>(opt.seed), opt.tolerance);

    if (!opt.out_json.empty()) {
        nlohmann::json j;
        j["seed"] = opt.seed;
        j["tolerance"] = opt.tolerance;
        j["refit"] = opt.refit;
        j["total"] = results.size();
        j["failed"] = failed;
        j["criteria"] = nlohmann::json::array();
        for (const auto& r : results) {
            nlohmann::json jc;
            jc["name"] = r.name;
            jc["pass"] = r.pass;
            jc["seconds"] = r.seconds;
            jc["checks"] = nlohmann::json::array();
            for (const auto& ck : r.checks)
                jc["checks"].push_back({{"name", ck.name},
                                        {"value", ck.value},
                                        {"bound", ck.bound},
                                        {"pass", ck.pass},
                                        {"note", ck.note}});
            j["criteria"].push_back(std::move(jc));
        }
        std::ofstream out(opt.out_json, std::ios::binary);
        if (!out) fail("cannot write verdict to " + opt.out_json);
        out << j.dump(2) << "\n";
    }
    return failed;
}

}  // namespace rvl
