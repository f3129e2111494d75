#include "rvl/expsums.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

#include "rvl/phase.hpp"

namespace rvl {

namespace {

struct AxisVals {
    std::vector<i64> vals;
    std::vector<double> logs;  // ln|p| on prime axes, 0 elsewhere
};

AxisVals expsum_axis(AxisSet set, const std::vector<i64>* custom, i64 N,
                     const PrimeTable& primes) {
    AxisVals a;
    switch (set) {
        case AxisSet::integers:
            for (i64 v = -N; v <= N; ++v) a.vals.push_back(v);
            a.logs.assign(a.vals.size(), 0.0);
            break;
        case AxisSet::primes: {
            std::size_t np = primes.count_below(N);
            for (std::size_t i = 0; i < np; ++i) {
                a.vals.push_back(primes.primes[i]);
                a.logs.push_back(primes.logs[i]);
            }
            break;
        }
        case AxisSet::signed_primes: {
            std::size_t np = primes.count_below(N);
            for (std::size_t i = np; i-- > 0;) {
                a.vals.push_back(-primes.primes[i]);
                a.logs.push_back(primes.logs[i]);
            }
            for (std::size_t i = 0; i < np; ++i) {
                a.vals.push_back(primes.primes[i]);
                a.logs.push_back(primes.logs[i]);
            }
            break;
        }
        case AxisSet::custom: {
            if (custom == nullptr) fail("weyl_sum: custom axis without a list");
            for (i64 v : *custom) {
                if (v < -N || v > N) fail("weyl_sum: custom axis value outside the bounding cube");
                a.vals.push_back(v);
                a.logs.push_back(0.0);
            }
            break;
        }
    }
    return a;
}

}  // namespace

WeylSum weyl_sum(const ExpSumSpec& spec, i64 N, const PrimeTable& primes) {
    if (spec.k < 1) fail("weyl_sum: k < 1");
    if (static_cast<int>(spec.sets.size()) != spec.k) fail("weyl_sum: one set per axis required");
    if (spec.G == nullptr) fail("weyl_sum: missing exponent set");
    const MultiIndexSet& G = *spec.G;
    if (G.k != spec.k) fail("weyl_sum: exponent arity mismatch");
    if (static_cast<int>(spec.poly.size()) != G.d) fail("weyl_sum: coefficient arity mismatch");
    bool need_sieve = false;
    for (AxisSet s : spec.sets)
        if (s == AxisSet::primes || s == AxisSet::signed_primes) need_sieve = true;
    if (need_sieve && primes.limit < N) fail("weyl_sum: sieve limit below N");

    std::vector<AxisVals> axes;
    for (int i = 0; i < spec.k; ++i) {
        const std::vector<i64>* cl = nullptr;
        if (spec.sets[static_cast<std::size_t>(i)] == AxisSet::custom) {
            if (static_cast<int>(spec.custom_lists.size()) <= i)
                fail("weyl_sum: custom axis without a list");
            cl = &spec.custom_lists[static_cast<std::size_t>(i)];
        }
        axes.push_back(expsum_axis(spec.sets[static_cast<std::size_t>(i)], cl, N, primes));
    }

    std::vector<double> red(spec.poly.size());
    for (std::size_t i = 0; i < spec.poly.size(); ++i) red[i] = torus_reduce(spec.poly[i]);

    std::size_t nlead = axes[0].vals.size();
    std::vector<cplx> block_sums(nlead, cplx(0, 0));
    std::vector<i64> block_counts(nlead, 0);

    parallel_chunks(nlead, [&](std::size_t bi) {
        int k = spec.k;
        std::vector<std::size_t> idx(static_cast<std::size_t>(k), 0);
        std::vector<i64> pt(static_cast<std::size_t>(k));
        std::vector<double> ptd(static_cast<std::size_t>(k));
        std::vector<i64> img(static_cast<std::size_t>(G.d));
        pt[0] = axes[0].vals[bi];
        ptd[0] = static_cast<double>(pt[0]);
        cplx acc = 0;
        i64 cnt = 0;
        bool done = false;
        while (!done) {
            for (int i = 1; i < k; ++i) {
                pt[static_cast<std::size_t>(i)] =
                    axes[static_cast<std::size_t>(i)].vals[idx[static_cast<std::size_t>(i)]];
                ptd[static_cast<std::size_t>(i)] = static_cast<double>(pt[static_cast<std::size_t>(i)]);
            }
            if (!spec.region || spec.region(pt)) {
                eval_Q_into(G, pt, img);
                cplx term = unit_phase(frac_dot(red, img));
                if (spec.amplitude) term *= spec.amplitude(ptd);
                if (spec.logweights) {
                    double w = 1.0;
                    for (int i = 0; i < k; ++i)
                        if (spec.sets[static_cast<std::size_t>(i)] == AxisSet::primes ||
                            spec.sets[static_cast<std::size_t>(i)] == AxisSet::signed_primes)
                            w *= (i == 0) ? axes[0].logs[bi]
                                          : axes[static_cast<std::size_t>(i)]
                                                .logs[idx[static_cast<std::size_t>(i)]];
                    term *= w;
                }
                acc += term;
                ++cnt;
            }
            int j = k - 1;
            while (j >= 1) {
                if (++idx[static_cast<std::size_t>(j)] < axes[static_cast<std::size_t>(j)].vals.size())
                    break;
                idx[static_cast<std::size_t>(j)] = 0;
                --j;
            }
            if (j < 1) done = true;
        }
        block_sums[bi] = acc;
        block_counts[bi] = cnt;
    });

    WeylSum out;
    out.sum = pairwise_sum(block_sums);
    for (i64 c : block_counts) out.points += c;
    out.normalized = std::abs(out.sum) / std::pow(static_cast<double>(N), spec.k);
    return out;
}

// -----------------------------------------------------------------------------
// Independent evaluation of vartheta_B(N) m_N(xi): direct nested loops over
// the axis sets with scaled-body membership and Kahan accumulation, no orbit
// materialization and a different summation order than the multiplier path.
// -----------------------------------------------------------------------------
cplx prime_weyl_sum(std::span<const double> xi, const OrbitStructure& st,
                    const ConvexBody& B, const MultiIndexSet& G, i64 N,
                    const PrimeTable& primes) {
    int k = st.k();
    if (G.k != k || B.k != k) fail("prime_weyl_sum: dimension mismatch");
    if (static_cast<int>(xi.size()) != G.d) fail("prime_weyl_sum: xi arity mismatch");
    if (st.kpp > 0 && primes.limit < N) fail("prime_weyl_sum: sieve limit below N");

    std::vector<AxisVals> axes;
    for (int i = 0; i < k; ++i) {
        AxisSet s;
        if (i < st.kprime)
            s = st.with_sign ? AxisSet::integers : AxisSet::custom;
        else
            s = st.with_sign ? AxisSet::signed_primes : AxisSet::primes;
        if (s == AxisSet::custom) {
            AxisVals a;
            for (i64 v = 1; v <= N; ++v) a.vals.push_back(v);
            a.logs.assign(a.vals.size(), 0.0);
            axes.push_back(std::move(a));
        } else {
            axes.push_back(expsum_axis(s, nullptr, N, primes));
        }
    }

    std::vector<double> red(xi.size());
    for (std::size_t i = 0; i < xi.size(); ++i) red[i] = torus_reduce(xi[i]);

    std::vector<std::size_t> idx(static_cast<std::size_t>(k), 0);
    std::vector<i64> pt(static_cast<std::size_t>(k));
    std::vector<double> xd(static_cast<std::size_t>(k));
    std::vector<i64> img(static_cast<std::size_t>(G.d));
    cplx s = 0, comp = 0;  // Kahan
    bool done = axes[0].vals.empty();
    while (!done) {
        bool zero = true;
        for (int i = 0; i < k; ++i) {
            pt[static_cast<std::size_t>(i)] =
                axes[static_cast<std::size_t>(i)].vals[idx[static_cast<std::size_t>(i)]];
            xd[static_cast<std::size_t>(i)] =
                static_cast<double>(pt[static_cast<std::size_t>(i)]) / static_cast<double>(N);
            if (pt[static_cast<std::size_t>(i)] != 0) zero = false;
        }
        if (!zero && B.pred(xd)) {
            eval_Q_into(G, pt, img);
            double w = 1.0;
            for (int i = st.kprime; i < k; ++i)
                w *= axes[static_cast<std::size_t>(i)].logs[idx[static_cast<std::size_t>(i)]];
            cplx term = unit_phase(frac_dot(red, img)) * w;
            cplx y = term - comp;
            cplx t = s + y;
            comp = (t - s) - y;
            s = t;
        }
        int j = k - 1;
        while (j >= 0) {
            if (++idx[static_cast<std::size_t>(j)] < axes[static_cast<std::size_t>(j)].vals.size())
                break;
            idx[static_cast<std::size_t>(j)] = 0;
            --j;
        }
        if (j < 0) done = true;
    }
    return s;
}

// -----------------------------------------------------------------------------
// Polynomial-regularity scanner
// -----------------------------------------------------------------------------
std::vector<RegularityTrial> regularity_scan(AxisSet axis, int degree,
                                             std::span<const i64> Nlist, i64 Q,
                                             double alpha, int trials,
                                             std::uint64_t seed,
                                             const PrimeTable& primes,
                                             double beta) {
    if (degree < 1) fail("regularity_scan: degree < 1");
    if (Q < 1) fail("regularity_scan: Q < 1");
    if (axis != AxisSet::integers && axis != AxisSet::primes)
        fail("regularity_scan: axis must be integers or primes");
    if (axis == AxisSet::primes)
        for (i64 N : Nlist)
            if (primes.limit < N) fail("regularity_scan: sieve limit below N");

    std::vector<RegularityTrial> rows;
    for (i64 N : Nlist) {
        if (N < 3) fail("regularity_scan: N too small");
        double lnN = std::log(static_cast<double>(N));
        if (static_cast<double>(Q) > std::pow(lnN, 2.0 * std::max(1.0, alpha)) + 1.0)
            fail("regularity_scan: Q outside the (log N)-power window");
        i64 q_lo = static_cast<i64>(std::ceil(std::pow(lnN, beta)));
        double hi = std::pow(static_cast<double>(N), degree) * std::pow(lnN, -beta);
        i64 q_hi = (hi > 2e18) ? static_cast<i64>(2e18) : static_cast<i64>(std::floor(hi));
        if (q_lo < 2) q_lo = 2;
        if (q_lo > q_hi) {
            RegularityTrial t;
            t.N = N;
            t.Q = Q;
            t.skipped = true;
            rows.push_back(t);
            continue;
        }

        std::vector<RegularityTrial> batch(static_cast<std::size_t>(trials));
        parallel_chunks(batch.size(), [&](std::size_t ti) {
            std::uint64_t s = seed + 0x9e3779b97f4a7c15ull * (ti + 1) +
                              0x1000003ull * static_cast<std::uint64_t>(N);
            Rng rng(s);
            i64 q = q_lo + static_cast<i64>(rng.below(static_cast<std::uint64_t>(q_hi - q_lo + 1)));
            i64 a = 1 + static_cast<i64>(rng.below(static_cast<std::uint64_t>(q)));
            while (gcd_i64(a, q) != 1) a = 1 + static_cast<i64>(rng.below(static_cast<std::uint64_t>(q)));
            // P(n) = (a/q) n^degree + lower-order real coefficients
            std::vector<double> coeff(static_cast<std::size_t>(degree), 0.0);
            for (int j = 0; j + 1 < degree; ++j) coeff[static_cast<std::size_t>(j)] = rng.uniform();
            double lead = torus_reduce(static_cast<double>(a) / static_cast<double>(q));
            coeff[static_cast<std::size_t>(degree - 1)] = lead;

            std::vector<cplx> per_r(static_cast<std::size_t>(Q), cplx(0, 0));
            auto add_point = [&](i64 n) {
                double ph = 0;
                i64 m = n;
                for (int j = 0; j < degree; ++j) {  // m = n^{j+1}, exact below 2^62
                    double c = coeff[static_cast<std::size_t>(j)];
                    if (c != 0.0) ph += frac_mul(c, m);
                    if (j + 1 < degree) {
                        __int128 nx = static_cast<__int128>(m) * n;
                        if (nx > (static_cast<__int128>(1) << 62))
                            fail("regularity_scan: monomial exceeds 2^62");
                        m = static_cast<i64>(nx);
                    }
                }
                i64 r = n % Q;
                per_r[static_cast<std::size_t>(r)] += unit_phase(torus_reduce(ph));
            };
            if (axis == AxisSet::integers) {
                for (i64 n = 1; n <= N; ++n) add_point(n);
            } else {
                std::size_t np = primes.count_below(N);
                for (std::size_t i = 0; i < np; ++i) add_point(primes.primes[i]);
            }
            double mx = 0;
            for (const cplx& v : per_r) mx = std::max(mx, std::abs(v));
            RegularityTrial t;
            t.N = N;
            t.q = q;
            t.Q = Q;
            t.seed = s;
            t.ratio = mx * static_cast<double>(Q) * std::pow(lnN, alpha) / static_cast<double>(N);
            batch[ti] = t;
        });
        rows.insert(rows.end(), batch.begin(), batch.end());
    }
    return rows;
}

}  // namespace rvl
