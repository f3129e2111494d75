#include "rvl/lattice.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numbers>

namespace rvl {

// -----------------------------------------------------------------------------
// Gamma and the canonical map
// -----------------------------------------------------------------------------
MultiIndexSet build_gamma(int k, int degree) {
    if (k < 1 || degree < 1) fail("build_gamma: need k >= 1 and degree >= 1");
    double dcount = std::pow(static_cast<double>(degree) + 1.0, k) - 1.0;
    if (dcount > 1e6) fail("build_gamma: (degree+1)^k - 1 exceeds 10^6 entries");

    MultiIndexSet G;
    G.k = k;
    G.degree = degree;
    std::vector<int> g(static_cast<std::size_t>(k), 0);
    // odometer with the last coordinate fastest = lexicographic order
    for (;;) {
        int j = k - 1;
        while (j >= 0 && g[static_cast<std::size_t>(j)] == degree) {
            g[static_cast<std::size_t>(j)] = 0;
            --j;
        }
        if (j < 0) break;
        ++g[static_cast<std::size_t>(j)];
        G.gammas.push_back(g);
        int tot = 0;
        for (int v : g) tot += v;
        G.total.push_back(tot);
    }
    G.d = static_cast<int>(G.gammas.size());
    assert(G.d == static_cast<int>(std::llround(dcount)));
    return G;
}

namespace {

const __int128 kImageCap = static_cast<__int128>(1) << 62;

i64 pow_checked(i64 base, int e) {
    __int128 acc = 1;
    for (int t = 0; t < e; ++t) {
        acc *= base;
        if (acc > kImageCap || -acc > kImageCap)
            fail("eval_Q: |x^gamma| exceeds 2^62; scale too large for 64-bit images");
    }
    return static_cast<i64>(acc);
}

}  // namespace

void eval_Q_into(const MultiIndexSet& G, std::span<const i64> x, std::span<i64> out) {
    assert(static_cast<int>(x.size()) == G.k);
    assert(static_cast<int>(out.size()) == G.d);
    for (int i = 0; i < G.d; ++i) {
        const auto& g = G.gammas[static_cast<std::size_t>(i)];
        __int128 acc = 1;
        for (int j = 0; j < G.k; ++j) {
            int e = g[static_cast<std::size_t>(j)];
            if (e == 0) continue;
            acc *= pow_checked(x[static_cast<std::size_t>(j)], e);
            if (acc > kImageCap || -acc > kImageCap)
                fail("eval_Q: |x^gamma| exceeds 2^62; scale too large for 64-bit images");
        }
        out[static_cast<std::size_t>(i)] = static_cast<i64>(acc);
    }
}

std::vector<i64> eval_Q(const MultiIndexSet& G, std::span<const i64> x) {
    std::vector<i64> img(static_cast<std::size_t>(G.d));
    eval_Q_into(G, x, img);
    return img;
}

std::vector<double> eval_Q_real(const MultiIndexSet& G, std::span<const double> x) {
    std::vector<double> img(static_cast<std::size_t>(G.d));
    for (int i = 0; i < G.d; ++i) {
        const auto& g = G.gammas[static_cast<std::size_t>(i)];
        double acc = 1.0;
        for (int j = 0; j < G.k; ++j)
            for (int e = 0; e < g[static_cast<std::size_t>(j)]; ++e)
                acc *= x[static_cast<std::size_t>(j)];
        img[static_cast<std::size_t>(i)] = acc;
    }
    return img;
}

// -----------------------------------------------------------------------------
// PolynomialMap and lifting
// -----------------------------------------------------------------------------
std::vector<i64> PolynomialMap::eval(std::span<const i64> x) const {
    std::vector<__int128> acc(static_cast<std::size_t>(d0), 0);
    for (const auto& t : terms) {
        __int128 mono = 1;
        for (int j = 0; j < k; ++j)
            mono *= pow_checked(x[static_cast<std::size_t>(j)], t.gamma[static_cast<std::size_t>(j)]);
        acc[static_cast<std::size_t>(t.j)] += static_cast<__int128>(t.c) * mono;
    }
    std::vector<i64> out(static_cast<std::size_t>(d0));
    for (int j = 0; j < d0; ++j) {
        if (acc[static_cast<std::size_t>(j)] > kImageCap || -acc[static_cast<std::size_t>(j)] > kImageCap)
            fail("PolynomialMap::eval: value exceeds 2^62");
        out[static_cast<std::size_t>(j)] = static_cast<i64>(acc[static_cast<std::size_t>(j)]);
    }
    return out;
}

PolynomialMap make_polynomial(int k, int d0, std::vector<PolyTerm> terms) {
    if (k < 1 || d0 < 1) fail("make_polynomial: need k >= 1 and d0 >= 1");
    PolynomialMap P;
    P.k = k;
    P.d0 = d0;
    for (const auto& t : terms) {
        if (t.j < 0 || t.j >= d0) fail("make_polynomial: output index out of range");
        if (static_cast<int>(t.gamma.size()) != k)
            fail("make_polynomial: exponent vector has wrong arity");
        int mx = 0, tot = 0;
        for (int e : t.gamma) {
            if (e < 0) fail("make_polynomial: negative exponent");
            mx = std::max(mx, e);
            tot += e;
        }
        if (tot == 0) fail("make_polynomial: constant term present (gamma = 0)");
        P.degree = std::max(P.degree, mx);
    }
    P.terms = std::move(terms);
    return P;
}

Lift lift_polynomial(const PolynomialMap& P) {
    Lift lift;
    lift.G = build_gamma(P.k, P.degree);
    lift.L.assign(static_cast<std::size_t>(P.d0),
                  std::vector<i64>(static_cast<std::size_t>(lift.G.d), 0));
    for (const auto& t : P.terms) {
        auto it = std::lower_bound(lift.G.gammas.begin(), lift.G.gammas.end(), t.gamma);
        if (it == lift.G.gammas.end() || *it != t.gamma)
            fail("lift_polynomial: exponent vector not found in Gamma");
        auto idx = static_cast<std::size_t>(it - lift.G.gammas.begin());
        lift.L[static_cast<std::size_t>(t.j)][idx] += t.c;
    }

    // L o Q = P on random integer points, exact arithmetic
    Rng rng(0x5eed11f7u);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<i64> x(static_cast<std::size_t>(P.k));
        for (auto& v : x) v = rng.range(-10, 10);
        auto img = eval_Q(lift.G, x);
        auto via = apply_lift(lift, img);
        auto direct = P.eval(x);
        if (via != direct) fail("lift_polynomial: L o Q != P on a random point");
    }
    return lift;
}

Lift identity_lift(const MultiIndexSet& G) {
    Lift lift;
    lift.G = G;
    lift.L.assign(static_cast<std::size_t>(G.d), std::vector<i64>(static_cast<std::size_t>(G.d), 0));
    for (int i = 0; i < G.d; ++i) lift.L[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 1;
    return lift;
}

std::vector<i64> apply_lift(const Lift& lift, std::span<const i64> image) {
    std::size_t d0 = lift.L.size();
    std::vector<i64> out(d0);
    for (std::size_t j = 0; j < d0; ++j) {
        __int128 acc = 0;
        const auto& row = lift.L[j];
        for (std::size_t i = 0; i < row.size(); ++i)
            acc += static_cast<__int128>(row[i]) * image[i];
        if (acc > kImageCap || -acc > kImageCap) fail("apply_lift: value exceeds 2^62");
        out[j] = static_cast<i64>(acc);
    }
    return out;
}

// -----------------------------------------------------------------------------
// ConvexBody
// -----------------------------------------------------------------------------
bool ConvexBody::contains(std::span<const double> x) const { return pred(x); }

bool ConvexBody::contains_scaled(std::span<const i64> x, double lambda) const {
    std::vector<double> xd(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) xd[i] = static_cast<double>(x[i]) / lambda;
    return pred(xd);
}

ConvexBody ConvexBody::cube(int k) {
    ConvexBody B;
    B.kind = Kind::cube;
    B.k = k;
    B.iota = 1.0;
    B.volume = std::pow(2.0, k);
    B.orthant_volume = 1.0;
    B.pred = [](std::span<const double> x) {
        for (double v : x)
            if (std::abs(v) > 1.0) return false;
        return true;
    };
    return B;
}

ConvexBody ConvexBody::euclidean_ball(int k) {
    ConvexBody B;
    B.kind = Kind::ball;
    B.k = k;
    B.iota = 1.0 / std::sqrt(static_cast<double>(k));
    B.volume = std::pow(std::numbers::pi, k / 2.0) / std::tgamma(k / 2.0 + 1.0);
    B.orthant_volume = B.volume / std::pow(2.0, k);
    B.pred = [](std::span<const double> x) {
        double s = 0;
        for (double v : x) s += v * v;
        // closed ball: lattice points exactly on the sphere reach s = 1 only
        // up to rounding in x/N, so admit a sliver far below the 1/N^2 gap
        // separating distinct rational values of s
        return s <= 1.0 + 1e-12;
    };
    return B;
}

ConvexBody ConvexBody::custom(int k, std::function<bool(std::span<const double>)> pred,
                              double iota, double volume, double mc_samples) {
    ConvexBody B;
    B.kind = Kind::custom;
    B.k = k;
    B.iota = iota;
    B.pred = std::move(pred);
    auto n = static_cast<std::size_t>(mc_samples);
    // Orthant volume is always Monte-Carlo for custom bodies.
    Rng rng(0xb0d75eedu);
    std::vector<double> x(static_cast<std::size_t>(k));
    std::size_t hits_full = 0, hits_orth = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (auto& v : x) v = rng.uniform(-1.0, 1.0);
        if (B.pred(x)) ++hits_full;
        for (auto& v : x) v = std::abs(v);
        if (B.pred(x)) ++hits_orth;
    }
    double cube_vol = std::pow(2.0, k);
    double pf = static_cast<double>(hits_full) / static_cast<double>(n);
    double po = static_cast<double>(hits_orth) / static_cast<double>(n);
    if (volume >= 0.0) {
        B.volume = volume;
        B.volume_stderr = 0.0;
    } else {
        B.volume = cube_vol * pf;
        B.volume_stderr = cube_vol * std::sqrt(pf * (1.0 - pf) / static_cast<double>(n));
    }
    B.orthant_volume = po;  // orthant cube has volume 1
    return B;
}

bool check_body_inclusions(const ConvexBody& B, std::string* msg) {
    // corners and edge midpoints of the iota-cube must lie in (closed) B
    int k = B.k;
    std::vector<double> x(static_cast<std::size_t>(k));
    i64 npts = 1;
    for (int i = 0; i < k; ++i) npts *= 3;
    for (i64 code = 0; code < npts; ++code) {
        i64 c = code;
        bool zero = true;
        for (int i = 0; i < k; ++i) {
            int t = static_cast<int>(c % 3);
            c /= 3;
            x[static_cast<std::size_t>(i)] = (t - 1) * B.iota;
            if (t != 1) zero = false;
        }
        if (zero) continue;
        if (!B.pred(x)) {
            if (msg) *msg = "iota-cube sample outside B";
            return false;
        }
    }
    // membership must not escape the unit cube
    Rng rng(0x1c1u);
    for (int t = 0; t < 2000; ++t) {
        for (auto& v : x) v = rng.uniform(-1.5, 1.5);
        bool inside_cube = true;
        for (double v : x)
            if (std::abs(v) > 1.0) inside_cube = false;
        if (!inside_cube && B.pred(x)) {
            if (msg) *msg = "B membership outside the unit cube";
            return false;
        }
    }
    return true;
}

// -----------------------------------------------------------------------------
// Orbit enumeration
// -----------------------------------------------------------------------------
namespace {

struct AxisDomain {
    std::vector<i64> vals;
    std::vector<double> logs;  // log|p| on prime axes, 1.0-neutral on integer axes
};

AxisDomain axis_domain(bool prime_axis, bool with_sign, i64 N, const PrimeTable& primes) {
    AxisDomain a;
    if (!prime_axis) {
        if (with_sign) {
            for (i64 v = -N; v <= N; ++v) a.vals.push_back(v);
        } else {
            for (i64 v = 1; v <= N; ++v) a.vals.push_back(v);
        }
        a.logs.assign(a.vals.size(), 0.0);  // contributes no log factor
    } else {
        std::size_t np = primes.count_below(N);
        if (with_sign) {
            for (std::size_t i = np; i-- > 0;) {
                a.vals.push_back(-primes.primes[i]);
                a.logs.push_back(primes.logs[i]);
            }
        }
        for (std::size_t i = 0; i < np; ++i) {
            a.vals.push_back(primes.primes[i]);
            a.logs.push_back(primes.logs[i]);
        }
    }
    return a;
}

}  // namespace

WeightedOrbit enumerate_orbit(const ConvexBody& B, i64 N, const OrbitStructure& st,
                              const MultiIndexSet& G, const PrimeTable& primes,
                              std::size_t cap) {
    int k = st.k();
    if (k < 1) fail("enumerate_orbit: empty structure");
    if (G.k != k) fail("enumerate_orbit: Gamma arity mismatch");
    if (B.k != k) fail("enumerate_orbit: body dimension mismatch");
    if (st.kpp > 0 && primes.limit < N)
        fail("enumerate_orbit: sieve limit below N; sieve further first");

    std::vector<AxisDomain> axes;
    for (int i = 0; i < k; ++i)
        axes.push_back(axis_domain(i >= st.kprime, st.with_sign, N, primes));

    WeightedOrbit orb;
    orb.N = N;
    orb.st = st;
    orb.G = G;

    std::size_t nlead = axes[0].vals.size();
    struct Block {
        std::vector<i64> coords;
        std::vector<double> weights;
        std::vector<i64> images;
        double wsum = 0;  // sequential within-block sum; merged pairwise later
        std::string error;
    };
    std::vector<Block> blocks(nlead);

    parallel_chunks(nlead, [&](std::size_t bi) {
        Block& blk = blocks[bi];
        try {
            std::vector<std::size_t> idx(static_cast<std::size_t>(k), 0);
            std::vector<i64> pt(static_cast<std::size_t>(k));
            std::vector<double> xd(static_cast<std::size_t>(k));
            std::vector<i64> img(static_cast<std::size_t>(G.d));
            pt[0] = axes[0].vals[bi];
            xd[0] = static_cast<double>(pt[0]) / static_cast<double>(N);
            double lead_log = axes[0].logs[bi];
            bool done = false;
            while (!done) {
                bool zero = pt[0] == 0;
                for (int i = 1; i < k; ++i) {
                    pt[static_cast<std::size_t>(i)] =
                        axes[static_cast<std::size_t>(i)].vals[idx[static_cast<std::size_t>(i)]];
                    xd[static_cast<std::size_t>(i)] =
                        static_cast<double>(pt[static_cast<std::size_t>(i)]) / static_cast<double>(N);
                    if (pt[static_cast<std::size_t>(i)] != 0) zero = false;
                }
                // weight = product of log|p| over the prime axes (empty product 1)
                double w = 1.0;
                for (int i = 0; i < k; ++i)
                    if (i >= st.kprime)
                        w *= (i == 0) ? lead_log
                                      : axes[static_cast<std::size_t>(i)].logs[idx[static_cast<std::size_t>(i)]];
                if (!zero && B.pred(xd)) {
                    eval_Q_into(G, pt, img);
                    blk.coords.insert(blk.coords.end(), pt.begin(), pt.end());
                    blk.weights.push_back(w);
                    blk.wsum += w;
                    blk.images.insert(blk.images.end(), img.begin(), img.end());
                }
                // odometer over axes 1..k-1, last fastest
                int j = k - 1;
                while (j >= 1) {
                    if (++idx[static_cast<std::size_t>(j)] <
                        axes[static_cast<std::size_t>(j)].vals.size())
                        break;
                    idx[static_cast<std::size_t>(j)] = 0;
                    --j;
                }
                if (j < 1) done = true;
            }
        } catch (const std::exception& e) {
            blk.error = e.what();
        }
    });

    std::size_t total = 0;
    for (auto& blk : blocks) {
        if (!blk.error.empty()) fail(blk.error);
        total += blk.weights.size();
    }
    if (total > cap)
        fail("enumerate_orbit: point count " + std::to_string(total) +
             " exceeds cap " + std::to_string(cap));

    orb.npoints = total;
    orb.coords.reserve(total * static_cast<std::size_t>(k));
    orb.weights.reserve(total);
    orb.images.reserve(total * static_cast<std::size_t>(G.d));
    std::vector<double> wsums;
    wsums.reserve(nlead);
    for (auto& blk : blocks) {
        orb.coords.insert(orb.coords.end(), blk.coords.begin(), blk.coords.end());
        orb.weights.insert(orb.weights.end(), blk.weights.begin(), blk.weights.end());
        orb.images.insert(orb.images.end(), blk.images.begin(), blk.images.end());
        wsums.push_back(blk.wsum);
    }
    // canonical normalizer association: pairwise over ordered per-leading-value
    // partials, shared with counting() so both give bit-identical vartheta
    orb.vartheta = pairwise_sum(wsums);
    return orb;
}

Counting counting(const ConvexBody& B, i64 N, const OrbitStructure& st,
                  const PrimeTable& primes) {
    int k = st.k();
    if (k < 1) fail("counting: empty structure");
    if (B.k != k) fail("counting: body dimension mismatch");
    if (st.kpp > 0 && primes.limit < N)
        fail("counting: sieve limit below N; sieve further first");

    std::vector<AxisDomain> axes;
    for (int i = 0; i < k; ++i)
        axes.push_back(axis_domain(i >= st.kprime, st.with_sign, N, primes));

    std::size_t nlead = axes[0].vals.size();
    std::vector<i64> cnt(nlead, 0);
    std::vector<double> wsum(nlead, 0.0);

    parallel_chunks(nlead, [&](std::size_t bi) {
        std::vector<std::size_t> idx(static_cast<std::size_t>(k), 0);
        std::vector<i64> pt(static_cast<std::size_t>(k));
        std::vector<double> xd(static_cast<std::size_t>(k));
        pt[0] = axes[0].vals[bi];
        xd[0] = static_cast<double>(pt[0]) / static_cast<double>(N);
        double lead_log = axes[0].logs[bi];
        bool done = false;
        while (!done) {
            bool zero = pt[0] == 0;
            for (int i = 1; i < k; ++i) {
                pt[static_cast<std::size_t>(i)] =
                    axes[static_cast<std::size_t>(i)].vals[idx[static_cast<std::size_t>(i)]];
                xd[static_cast<std::size_t>(i)] =
                    static_cast<double>(pt[static_cast<std::size_t>(i)]) / static_cast<double>(N);
                if (pt[static_cast<std::size_t>(i)] != 0) zero = false;
            }
            if (!zero && B.pred(xd)) {
                double w = 1.0;
                for (int i = 0; i < k; ++i)
                    if (i >= st.kprime)
                        w *= (i == 0) ? lead_log
                                      : axes[static_cast<std::size_t>(i)].logs[idx[static_cast<std::size_t>(i)]];
                ++cnt[bi];
                wsum[bi] += w;
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
    });

    Counting out;
    for (i64 c : cnt) out.pi += c;
    out.vartheta = pairwise_sum(wsum);
    return out;
}

}  // namespace rvl
