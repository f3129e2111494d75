#include "rvl/iw.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <string>

#include "rvl/phase.hpp"

namespace rvl {

namespace {

const __int128 kQCap = static_cast<__int128>(1) << 62;

// n^beta clamped to 2^62 (enough: it only gates which primes are admissible)
i64 pow_clamped(i64 n, int beta) {
    __int128 acc = 1;
    for (int i = 0; i < beta; ++i) {
        acc *= n;
        if (acc > kQCap) return static_cast<i64>(kQCap);
    }
    return static_cast<i64>(acc);
}

double binom(int n, int k) {
    double r = 1;
    for (int i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
    return r;
}

}  // namespace

IWParams make_iw_params(int n, int beta) {
    if (n < 1) fail("make_iw_params: n < 1");
    if (beta < 1) fail("make_iw_params: beta < 1");
    IWParams par;
    par.n = n;
    par.beta = beta;
    double t = std::pow(static_cast<double>(n), 0.05);
    par.n0 = static_cast<i64>(std::floor(t + 1e-9));
    par.D = 20 * beta + 1;
    par.Q0 = factorial_factorized(par.n0).pow(par.D);
    return par;
}

RationalSet build_Pn(int n, int beta, double cap) {
    RationalSet P;
    P.par = make_iw_params(n, beta);
    const IWParams& par = P.par;

    i64 nb = pow_clamped(n, beta);
    if (nb > 100000000) fail("build_Pn: n^beta too large to sieve");
    PrimeTable pt = sieve_primes(std::max<i64>(nb, 4));
    std::vector<i64> big_primes;
    for (i64 p : pt.primes)
        if (p > par.n0 && p <= nb) big_primes.push_back(p);

    // would-be cardinality: divisors(Q0) * sum_{j<=D} C(P,j) D^j
    double ndiv = 1;
    for (auto [p, e] : par.Q0.pe) ndiv *= static_cast<double>(e + 1);
    double npi = 0;
    int Pcount = static_cast<int>(big_primes.size());
    for (int j = 0; j <= std::min(par.D, Pcount); ++j)
        npi += binom(Pcount, j) * std::pow(static_cast<double>(par.D), j);
    P.cardinality = ndiv * npi;
    if (P.cardinality > cap)
        fail("build_Pn: P_n would have " + std::to_string(P.cardinality) +
             " elements, above the cap " + std::to_string(cap));

    // divisors of Q0
    std::vector<i64> divs{1};
    for (auto [p, e] : par.Q0.pe) {
        std::vector<i64> next;
        for (i64 dvalue : divs) {
            __int128 cur = dvalue;
            for (i64 t = 0; t <= e; ++t) {
                if (cur > kQCap) {
                    P.magnitude_truncated = true;
                    break;
                }
                next.push_back(static_cast<i64>(cur));
                cur *= p;
            }
        }
        divs = std::move(next);
    }

    // Pi union {1}: DFS over big primes, at most D distinct, exponents 1..D
    std::vector<i64> prods{1};
    struct Frame {
        std::size_t i;
        __int128 v;
        int used;
    };
    std::vector<Frame> stack{{0, 1, 0}};
    while (!stack.empty()) {
        Frame f = stack.back();
        stack.pop_back();
        if (f.i == big_primes.size()) continue;
        stack.push_back({f.i + 1, f.v, f.used});  // skip this prime
        if (f.used < par.D) {
            __int128 cur = f.v;
            for (int e = 1; e <= par.D; ++e) {
                cur *= big_primes[f.i];
                if (cur > kQCap) {
                    P.magnitude_truncated = true;
                    break;
                }
                prods.push_back(static_cast<i64>(cur));
                stack.push_back({f.i + 1, cur, f.used + 1});
            }
        }
    }

    for (i64 dvalue : divs)
        for (i64 w : prods) {
            __int128 v = static_cast<__int128>(dvalue) * w;
            if (v > kQCap) {
                P.magnitude_truncated = true;
                continue;
            }
            P.qs.push_back(static_cast<i64>(v));
        }
    std::sort(P.qs.begin(), P.qs.end());
    P.qs.erase(std::unique(P.qs.begin(), P.qs.end()), P.qs.end());
    return P;
}

double denominator_cap(int n) {
    if (n < 1) return 0.0;
    return std::exp(std::pow(static_cast<double>(n), 0.1));
}

double epsilon_n(int n, double factor) {
    if (n < 1) fail("epsilon_n: n < 1");
    if (!(factor > 0 && factor <= 1)) fail("epsilon_n: factor outside (0,1]");
    return factor * std::exp(-std::pow(static_cast<double>(n), 0.2));
}

bool in_Pn(i64 m, int n, int beta) {
    if (m < 1) return false;
    if (m == 1) return true;
    IWParams par = make_iw_params(n, beta);
    i64 nb = pow_clamped(n, beta);
    Factorized f0 = factorial_factorized(par.n0);
    auto fac = factorize(m);
    int big_count = 0;
    for (auto [p, e] : fac) {
        if (p <= par.n0) {
            i64 allowed = 0;
            for (auto [p0, e0] : f0.pe)
                if (p0 == p) allowed = e0 * par.D;
            if (e > allowed) return false;
        } else if (p <= nb) {
            if (e > par.D) return false;
            if (++big_count > par.D) return false;
        } else {
            return false;
        }
    }
    return true;
}

// -----------------------------------------------------------------------------
// The plateau bump
// -----------------------------------------------------------------------------
namespace {

inline double mollifier(double u) { return (u <= 0.0) ? 0.0 : std::exp(-1.0 / u); }

}  // namespace

double eta(std::span<const double> x) {
    if (x.empty()) fail("eta: empty argument");
    double d = static_cast<double>(x.size());
    double m = 0;
    for (double v : x) m = std::max(m, std::abs(v));
    double lo = 1.0 / (32.0 * d);
    double hi = 1.0 / (16.0 * d);
    if (m <= lo) return 1.0;
    if (m >= hi) return 0.0;
    double t = (m - lo) / (hi - lo);
    double a = mollifier(1.0 - t);
    double b = mollifier(t);
    return a / (a + b);
}

double eta_n(std::span<const double> offset, i64 Nn, double chi, const MultiIndexSet& G) {
    if (static_cast<int>(offset.size()) != G.d) fail("eta_n: arity mismatch");
    if (Nn < 1) fail("eta_n: N_n < 1");
    double scale = std::exp2(-chi * std::sqrt(std::log2(static_cast<double>(Nn))));
    std::vector<double> arg(offset.size());
    for (int i = 0; i < G.d; ++i)
        arg[static_cast<std::size_t>(i)] =
            scale * std::pow(static_cast<double>(Nn), G.total[static_cast<std::size_t>(i)]) *
            offset[static_cast<std::size_t>(i)];
    return eta(arg);
}

// -----------------------------------------------------------------------------
// Fractions
// -----------------------------------------------------------------------------
std::vector<double> Fraction::point() const {
    std::vector<double> p(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        p[i] = torus_reduce(static_cast<double>(a[i]) / static_cast<double>(q));
    return p;
}

std::vector<Fraction> enumerate_fractions(const RationalSet& P, int d, std::size_t cap) {
    std::vector<Fraction> out;
    for (i64 q : P.qs) {
        double combos = std::pow(static_cast<double>(q), d);
        if (static_cast<double>(out.size()) + combos > static_cast<double>(cap))
            fail("enumerate_fractions: set too large to materialize");
        std::vector<i64> a(static_cast<std::size_t>(d), 1);
        bool done = false;
        while (!done) {
            i64 g = q;
            for (i64 v : a) g = gcd_i64(g, v);
            if (g == 1) {
                Fraction f;
                f.q = q;
                f.a = a;
                out.push_back(std::move(f));
            }
            int j = d - 1;
            while (j >= 0) {
                if (++a[static_cast<std::size_t>(j)] <= q) break;
                a[static_cast<std::size_t>(j)] = 1;
                --j;
            }
            if (j < 0) done = true;
        }
    }
    return out;
}

// -----------------------------------------------------------------------------
// Partition multipliers
// -----------------------------------------------------------------------------
i64 u_level(int n, double rho) {
    if (n <= 0) return 0;
    double t = std::pow(static_cast<double>(n), rho);
    if (std::abs(t - std::round(t)) < 1e-9) t = std::round(t);
    return static_cast<i64>(std::floor(t));
}

namespace {

struct SupportWidths {
    std::vector<double> h;  // per component gamma
};

SupportWidths support_widths(i64 Nn, double chi, const MultiIndexSet& G) {
    SupportWidths w;
    w.h.resize(static_cast<std::size_t>(G.d));
    double blow = std::exp2(chi * std::sqrt(std::log2(static_cast<double>(Nn))));
    for (int i = 0; i < G.d; ++i)
        w.h[static_cast<std::size_t>(i)] =
            blow / (16.0 * G.d *
                    std::pow(static_cast<double>(Nn), G.total[static_cast<std::size_t>(i)]));
    return w;
}

void check_partition_common(const XiPartitionParams& par) {
    if (par.ladder == nullptr || par.G == nullptr) fail("xi_partition: missing ladder or Gamma");
    if (!(par.rho > 0 && par.rho < 1)) fail("xi_partition: rho outside (0,1)");
    if (!(par.chi > 0)) fail("xi_partition: chi <= 0");
    if (par.beta < 1) fail("xi_partition: beta < 1");
}

void check_partition_params(const XiPartitionParams& par) {
    check_partition_common(par);
    // the partition itself demands the paper's gate; the disjointness checker
    // accepts any chi > 0 so oversized bumps can be exhibited as witnesses
    if (!(par.chi < 0.1)) fail("xi_partition: chi outside (0, 1/10)");
}

}  // namespace

double xi_partition(std::span<const double> xi, int n, std::optional<int> s,
                    const XiPartitionParams& par) {
    check_partition_params(par);
    const MultiIndexSet& G = *par.G;
    if (static_cast<int>(xi.size()) != G.d) fail("xi_partition: xi arity mismatch");
    if (n < 1) fail("xi_partition: n < 1");
    if (n >= static_cast<int>(par.ladder->Nseq.size()))
        fail("xi_partition: n beyond the ladder");
    if (s && (*s < 0 || *s >= n)) fail("xi_partition: need 0 <= s < n");

    i64 m2 = s ? u_level(*s + 1, par.rho) : u_level(n, par.rho);
    i64 m1 = s ? u_level(*s, par.rho) : 0;
    if (m2 < 1) return 0.0;

    i64 Nn = par.ladder->Nseq[static_cast<std::size_t>(n)];
    SupportWidths w = support_widths(Nn, par.chi, G);

    // Stream denominators below the materialization bound; P_n membership is
    // decided by factorization, never by building the whole set.
    i64 qmax = static_cast<i64>(std::floor(denominator_cap(static_cast<int>(m2))));
    double cap1 = (m1 >= 1) ? denominator_cap(static_cast<int>(m1)) : 0.0;

    double total = 0;
    std::vector<i64> jlo(static_cast<std::size_t>(G.d)), jhi(static_cast<std::size_t>(G.d));
    for (i64 q = 1; q <= qmax; ++q) {
        if (!in_Pn(q, static_cast<int>(m2), par.beta)) continue;
        if (m1 >= 1 && static_cast<double>(q) <= cap1 && in_Pn(q, static_cast<int>(m1), par.beta))
            continue;
        // candidate numerators per component: only a/q within the support box
        double combos = 1;
        for (int i = 0; i < G.d; ++i) {
            double lo = (xi[static_cast<std::size_t>(i)] - w.h[static_cast<std::size_t>(i)]) * q;
            double hi = (xi[static_cast<std::size_t>(i)] + w.h[static_cast<std::size_t>(i)]) * q;
            i64 l = static_cast<i64>(std::ceil(lo - 1e-12));
            i64 r = static_cast<i64>(std::floor(hi + 1e-12));
            if (r - l + 1 >= q) {
                l = 0;
                r = q - 1;
            }
            jlo[static_cast<std::size_t>(i)] = l;
            jhi[static_cast<std::size_t>(i)] = r;
            combos *= static_cast<double>(r - l + 1);
        }
        if (combos <= 0) continue;
        if (combos > 1e6) fail("xi_partition: candidate set too large to stream");

        std::vector<i64> j(jlo.begin(), jlo.end());
        std::vector<i64> amap(static_cast<std::size_t>(G.d));
        std::vector<double> off(static_cast<std::size_t>(G.d));
        bool done = false;
        while (!done) {
            i64 g = q;
            for (int i = 0; i < G.d; ++i) {
                i64 r = j[static_cast<std::size_t>(i)] % q;
                if (r < 0) r += q;
                amap[static_cast<std::size_t>(i)] = (r == 0) ? q : r;  // N_q convention
                g = gcd_i64(g, amap[static_cast<std::size_t>(i)]);
                double t = xi[static_cast<std::size_t>(i)] -
                           static_cast<double>(j[static_cast<std::size_t>(i)]) / static_cast<double>(q);
                t -= std::round(t);  // torus-signed offset
                off[static_cast<std::size_t>(i)] = t;
            }
            if (g == 1) total += eta_n(off, Nn, par.chi, G);
            int i = G.d - 1;
            while (i >= 0) {
                if (++j[static_cast<std::size_t>(i)] <= jhi[static_cast<std::size_t>(i)]) break;
                j[static_cast<std::size_t>(i)] = jlo[static_cast<std::size_t>(i)];
                --i;
            }
            if (i < 0) done = true;
        }
    }
    return total;
}

DisjointnessResult disjointness_check(int s, int m, const XiPartitionParams& par) {
    check_partition_common(par);
    const MultiIndexSet& G = *par.G;
    if (m <= s) fail("disjointness_check: need m > s");
    if (m >= static_cast<int>(par.ladder->Nseq.size()))
        fail("disjointness_check: m beyond the ladder");

    i64 m2 = u_level(s + 1, par.rho);
    i64 m1 = u_level(s, par.rho);
    DisjointnessResult res;
    if (m2 < 1) return res;  // empty set, vacuously disjoint

    RationalSet Pfiltered;
    Pfiltered.par = make_iw_params(static_cast<int>(m2), par.beta);
    i64 qmax = static_cast<i64>(std::floor(denominator_cap(static_cast<int>(m2))));
    double cap1 = (m1 >= 1) ? denominator_cap(static_cast<int>(m1)) : 0.0;
    for (i64 q = 1; q <= qmax; ++q) {
        if (!in_Pn(q, static_cast<int>(m2), par.beta)) continue;
        if (m1 >= 1 && static_cast<double>(q) <= cap1 && in_Pn(q, static_cast<int>(m1), par.beta))
            continue;
        Pfiltered.qs.push_back(q);
    }
    std::vector<Fraction> fr = enumerate_fractions(Pfiltered, G.d);

    // Two bumps eta_m(. - a/q), eta_m(. - a'/q') can only meet if the centers
    // come within twice the widest half-width, and distinct reduced fractions
    // are at least 1/(q q') apart in some component; the check is exactly that
    // separation inequality at the leading |gamma| = 1 width.
    i64 Nm = par.ladder->Nseq[static_cast<std::size_t>(m)];
    double two_h = 2.0 * std::exp2(par.chi * std::sqrt(std::log2(static_cast<double>(Nm)))) /
                   (16.0 * G.d * static_cast<double>(Nm));

    for (std::size_t i = 0; i < fr.size(); ++i)
        for (std::size_t jdx = i + 1; jdx < fr.size(); ++jdx) {
            double sep = 1.0 / (static_cast<double>(fr[i].q) * static_cast<double>(fr[jdx].q));
            if (!(sep > two_h)) {
                res.ok = false;
                res.has_witness = true;
                res.f1 = fr[i];
                res.f2 = fr[jdx];
                return res;
            }
        }
    return res;
}

}  // namespace rvl
