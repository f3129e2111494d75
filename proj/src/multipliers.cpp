#include "rvl/multipliers.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace rvl {

// -----------------------------------------------------------------------------
// Frequencies
// -----------------------------------------------------------------------------
std::vector<double> RationalFrequency::xi() const {
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        out[i] = torus_reduce(static_cast<double>(a[i]) / static_cast<double>(q) + theta[i]);
    return out;
}

RationalFrequency make_rational_frequency(i64 q, std::vector<i64> a, std::vector<double> theta) {
    if (q < 1) fail("make_rational_frequency: q < 1");
    if (a.empty()) fail("make_rational_frequency: empty numerator vector");
    if (theta.empty()) theta.assign(a.size(), 0.0);
    if (theta.size() != a.size()) fail("make_rational_frequency: theta arity mismatch");
    if (!in_A_q(a, q)) fail("make_rational_frequency: a not in A_q");
    RationalFrequency rf;
    rf.q = q;
    rf.a = std::move(a);
    rf.theta = std::move(theta);
    return rf;
}

RationalFrequency pure_offset(std::vector<double> theta) {
    RationalFrequency rf;
    rf.q = 1;
    rf.a.assign(theta.size(), 1);
    rf.theta = std::move(theta);
    return rf;
}

bool in_A_q(std::span<const i64> a, i64 q) {
    if (q < 1) return false;
    i64 g = q;
    for (i64 v : a) {
        if (v < 1 || v > q) return false;
        g = gcd_i64(g, v);
    }
    return g == 1;
}

// -----------------------------------------------------------------------------
// Discrete multipliers
// -----------------------------------------------------------------------------
namespace {

// phase data for one frequency against one orbit: exact residue for the a/q
// part plus exact fractional reduction for the theta part
struct FreqPlan {
    i64 q = 1;
    std::vector<i64> a;          // residues of a mod q
    std::vector<double> theta;   // reduced to [0,1)
    bool has_theta = false;
    RootTable roots{1};
};

FreqPlan plan_frequency(const RationalFrequency& rf) {
    FreqPlan p;
    p.q = rf.q;
    p.a.resize(rf.a.size());
    for (std::size_t i = 0; i < rf.a.size(); ++i) {
        i64 r = rf.a[i] % rf.q;
        p.a[i] = (r < 0) ? r + rf.q : r;
    }
    p.theta.resize(rf.theta.size());
    for (std::size_t i = 0; i < rf.theta.size(); ++i) {
        double t = torus_reduce(rf.theta[i]);
        p.theta[i] = t;
        if (t != 0.0) p.has_theta = true;
    }
    p.roots = RootTable(rf.q);
    return p;
}

inline cplx point_phase(const FreqPlan& p, std::span<const i64> img) {
    i64 r = 0;
    for (std::size_t g = 0; g < p.a.size(); ++g) {
        i64 m = img[g] % p.q;
        if (m < 0) m += p.q;
        r = (r + p.a[g] % p.q * m) % p.q;
    }
    cplx ph = p.roots[r];
    if (p.has_theta) ph *= unit_phase(frac_dot(p.theta, img));
    return ph;
}

}  // namespace

std::vector<cplx> m_hat(std::span<const RationalFrequency> xis, const WeightedOrbit& orbit) {
    if (orbit.npoints == 0) fail("m_hat: empty orbit (normalizer is zero)");
    if (orbit.vartheta <= 0.0) fail("m_hat: zero normalizer");
    for (const auto& rf : xis)
        if (rf.dim() != orbit.G.d) fail("m_hat: frequency arity must match Gamma");

    std::vector<cplx> out(xis.size());
    std::size_t d = static_cast<std::size_t>(orbit.G.d);
    parallel_chunks(xis.size(), [&](std::size_t xi_idx) {
        FreqPlan p = plan_frequency(xis[xi_idx]);
        cplx s = chunked_sum_cplx(orbit.npoints, [&](std::size_t i) {
            std::span<const i64> img(orbit.images.data() + i * d, d);
            return point_phase(p, img) * orbit.weights[i];
        });
        out[xi_idx] = s / orbit.vartheta;
    });
    return out;
}

std::vector<cplx> h_hat(std::span<const RationalFrequency> xis, const WeightedOrbit& orbit,
                        const CZKernel& kern) {
    if (!orbit.st.with_sign) fail("h_hat: orbit must be the signed kind");
    if (kern.k != orbit.st.k()) fail("h_hat: kernel dimension mismatch");
    for (const auto& rf : xis)
        if (rf.dim() != orbit.G.d) fail("h_hat: frequency arity must match Gamma");

    std::vector<cplx> out(xis.size());
    if (orbit.npoints == 0) return out;  // empty shell, multiplier vanishes

    int k = orbit.st.k();
    std::vector<double> kv(orbit.npoints);
    {
        std::vector<double> xd(static_cast<std::size_t>(k));
        for (std::size_t i = 0; i < orbit.npoints; ++i) {
            auto pt = orbit.point(i);
            for (int j = 0; j < k; ++j)
                xd[static_cast<std::size_t>(j)] = static_cast<double>(pt[static_cast<std::size_t>(j)]);
            kv[i] = kern.evaluate(xd);
        }
    }
    std::size_t d = static_cast<std::size_t>(orbit.G.d);
    parallel_chunks(xis.size(), [&](std::size_t xi_idx) {
        FreqPlan p = plan_frequency(xis[xi_idx]);
        out[xi_idx] = chunked_sum_cplx(orbit.npoints, [&](std::size_t i) {
            std::span<const i64> img(orbit.images.data() + i * d, d);
            return point_phase(p, img) * (kv[i] * orbit.weights[i]);
        });
    });
    return out;
}

cplx transform_sparse(const SparseFunction& f, std::span<const double> xi) {
    if (static_cast<int>(xi.size()) != f.d0) fail("transform_sparse: arity mismatch");
    std::vector<double> red(xi.size());
    for (std::size_t i = 0; i < xi.size(); ++i) red[i] = torus_reduce(xi[i]);
    std::vector<cplx> terms;
    terms.reserve(f.a.size());
    for (const auto& [x, v] : f.a)
        terms.push_back(v * unit_phase(frac_dot(red, x)));
    return pairwise_sum(terms);
}

// -----------------------------------------------------------------------------
// Gauss-Legendre tables
// -----------------------------------------------------------------------------
namespace {

struct GL {
    std::vector<double> x, w;
};

const GL& gl_table(int n) {
    static std::map<int, GL> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    GL gl;
    gl.x.resize(static_cast<std::size_t>(n));
    gl.w.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double pp = 0;
        for (int it2 = 0; it2 < 100; ++it2) {
            double p0 = 1.0, p1 = x;
            for (int j = 2; j <= n; ++j) {
                double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            pp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        double w = 2.0 / ((1.0 - x * x) * pp * pp);
        gl.x[static_cast<std::size_t>(i)] = -x;  // ascending
        gl.w[static_cast<std::size_t>(i)] = w;
        gl.x[static_cast<std::size_t>(n - 1 - i)] = x;
        gl.w[static_cast<std::size_t>(n - 1 - i)] = w;
    }
    return cache.emplace(n, std::move(gl)).first->second;
}

// phase coefficients c_gamma = xi_gamma N^{|gamma|}, phase(x) = sum c_g x^gamma
struct PhasePoly {
    const MultiIndexSet* G;
    std::vector<double> c;
    std::vector<double> parity;  // (-1)^{|gamma|}
};

PhasePoly phase_poly(std::span<const double> xi, const MultiIndexSet& G, i64 N) {
    PhasePoly pp;
    pp.G = &G;
    pp.c.resize(static_cast<std::size_t>(G.d));
    pp.parity.resize(static_cast<std::size_t>(G.d));
    for (int i = 0; i < G.d; ++i) {
        pp.c[static_cast<std::size_t>(i)] =
            xi[static_cast<std::size_t>(i)] *
            std::pow(static_cast<double>(N), G.total[static_cast<std::size_t>(i)]);
        pp.parity[static_cast<std::size_t>(i)] = (G.total[static_cast<std::size_t>(i)] % 2) ? -1.0 : 1.0;
    }
    return pp;
}

inline double phase_at(const PhasePoly& pp, std::span<const double> x, bool negate = false) {
    double s = 0;
    const auto& G = *pp.G;
    for (int i = 0; i < G.d; ++i) {
        double mono = 1.0;
        const auto& g = G.gammas[static_cast<std::size_t>(i)];
        for (int j = 0; j < G.k; ++j)
            for (int e = 0; e < g[static_cast<std::size_t>(j)]; ++e)
                mono *= x[static_cast<std::size_t>(j)];
        double cc = pp.c[static_cast<std::size_t>(i)];
        if (negate) cc *= pp.parity[static_cast<std::size_t>(i)];
        s += cc * mono;
    }
    return s;
}

// tensor Gauss-Legendre over the cube (or its positive orthant)
cplx phi_cube(const PhasePoly& pp, int k, int nodes, bool orthant) {
    const GL& gl = gl_table(nodes);
    std::vector<std::size_t> idx(static_cast<std::size_t>(k), 0);
    std::vector<double> x(static_cast<std::size_t>(k));
    cplx acc = 0;
    bool done = false;
    while (!done) {
        double w = 1.0;
        for (int j = 0; j < k; ++j) {
            double t = gl.x[idx[static_cast<std::size_t>(j)]];
            double wt = gl.w[idx[static_cast<std::size_t>(j)]];
            if (orthant) {
                t = 0.5 * (t + 1.0);
                wt *= 0.5;
            } else {
                wt *= 0.5;  // normalize |B| = 2^k away per axis
            }
            x[static_cast<std::size_t>(j)] = t;
            w *= wt;
        }
        acc += w * unit_phase(torus_reduce(phase_at(pp, x)));
        int j = k - 1;
        while (j >= 0) {
            if (++idx[static_cast<std::size_t>(j)] < gl.x.size()) break;
            idx[static_cast<std::size_t>(j)] = 0;
            --j;
        }
        if (j < 0) done = true;
    }
    return acc;
}

// polar rule on the 2d ball: GL in radius, trapezoid in angle
cplx phi_ball2(const PhasePoly& pp, int nodes, bool orthant) {
    const GL& gl = gl_table(nodes);
    int m = 4 * nodes;
    double ang_hi = orthant ? 0.5 * std::numbers::pi : 2.0 * std::numbers::pi;
    double norm = orthant ? (std::numbers::pi / 4.0) : std::numbers::pi;
    double x[2];
    cplx acc = 0;
    for (int ia = 0; ia < m; ++ia) {
        double ang = ang_hi * (ia + 0.5) / m;
        double ca = std::cos(ang), sa = std::sin(ang);
        cplx radial = 0;
        for (std::size_t ir = 0; ir < gl.x.size(); ++ir) {
            double r = 0.5 * (gl.x[ir] + 1.0);
            double w = 0.5 * gl.w[ir] * r;
            x[0] = r * ca;
            x[1] = r * sa;
            radial += w * unit_phase(torus_reduce(phase_at(pp, std::span<const double>(x, 2))));
        }
        acc += radial;
    }
    return acc * (ang_hi / m) / norm;
}

// quasi-Monte-Carlo fallback for other bodies (Halton points, body indicator)
double halton(std::size_t i, int base) {
    double f = 1.0, r = 0.0;
    std::size_t n = i + 1;
    while (n > 0) {
        f /= base;
        r += f * static_cast<double>(n % static_cast<std::size_t>(base));
        n /= static_cast<std::size_t>(base);
    }
    return r;
}

cplx phi_qmc(const PhasePoly& pp, const ConvexBody& B, std::size_t npts, bool orthant) {
    static const int bases[] = {2, 3, 5, 7, 11, 13, 17, 19};
    int k = B.k;
    if (k > 8) fail("phi_integral: QMC fallback supports k <= 8");
    std::vector<double> x(static_cast<std::size_t>(k));
    cplx acc = 0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < npts; ++i) {
        for (int j = 0; j < k; ++j) {
            double u = halton(i, bases[j]);
            x[static_cast<std::size_t>(j)] = orthant ? u : (2.0 * u - 1.0);
        }
        if (!B.pred(x)) continue;
        ++hits;
        acc += unit_phase(torus_reduce(phase_at(pp, x)));
    }
    if (hits == 0) fail("phi_integral: no QMC point hit the body");
    return acc / static_cast<double>(hits);
}

}  // namespace

QuadratureResult phi_integral(std::span<const double> xi, const ConvexBody& B,
                              const MultiIndexSet& G, i64 N, int nodes, bool orthant) {
    if (static_cast<int>(xi.size()) != G.d) fail("phi_integral: xi arity mismatch");
    if (G.k != B.k) fail("phi_integral: body dimension mismatch");
    if (nodes < 4) fail("phi_integral: too few nodes");
    PhasePoly pp = phase_poly(xi, G, N);
    QuadratureResult res;
    if (B.kind == ConvexBody::Kind::cube) {
        res.coarse = phi_cube(pp, B.k, nodes, orthant);
        res.value = phi_cube(pp, B.k, 2 * nodes, orthant);
    } else if (B.kind == ConvexBody::Kind::ball && B.k == 2) {
        res.coarse = phi_ball2(pp, nodes, orthant);
        res.value = phi_ball2(pp, 2 * nodes, orthant);
    } else {
        std::size_t npts = static_cast<std::size_t>(nodes) * nodes * 16;
        res.coarse = phi_qmc(pp, B, npts, orthant);
        res.value = phi_qmc(pp, B, 4 * npts, orthant);
    }
    res.err = std::abs(res.value - res.coarse);
    return res;
}

// -----------------------------------------------------------------------------
// Psi, principal value through the symmetrized integrand
// -----------------------------------------------------------------------------
namespace {

// (1/2) K(u) [e(phi(u)) - e(phi(-u))]
inline cplx psi_integrand(const PhasePoly& pp, const CZKernel& kern, std::span<const double> u) {
    cplx br = unit_phase(torus_reduce(phase_at(pp, u, false))) -
              unit_phase(torus_reduce(phase_at(pp, u, true)));
    return 0.5 * kern.evaluate(u) * br;
}

cplx psi_interval(const PhasePoly& pp, const CZKernel& kern, int nodes) {
    const GL& gl = gl_table(2 * ((nodes + 1) / 2));  // even count keeps 0 off the rule
    cplx acc = 0;
    double u[1];
    for (std::size_t i = 0; i < gl.x.size(); ++i) {
        u[0] = gl.x[i];
        acc += gl.w[i] * psi_integrand(pp, kern, std::span<const double>(u, 1));
    }
    return acc;
}

cplx psi_ball2(const PhasePoly& pp, const CZKernel& kern, int nodes) {
    const GL& gl = gl_table(2 * ((nodes + 1) / 2));
    int m = 4 * nodes;
    double u[2];
    cplx acc = 0;
    for (int ia = 0; ia < m; ++ia) {
        double ang = 2.0 * std::numbers::pi * (ia + 0.5) / m;
        double ca = std::cos(ang), sa = std::sin(ang);
        cplx radial = 0;
        for (std::size_t ir = 0; ir < gl.x.size(); ++ir) {
            double r = 0.5 * (gl.x[ir] + 1.0);
            if (r == 0.0) continue;
            double w = 0.5 * gl.w[ir] * r;  // Jacobian tames K ~ r^{-2}
            u[0] = r * ca;
            u[1] = r * sa;
            radial += w * psi_integrand(pp, kern, std::span<const double>(u, 2));
        }
        acc += radial;
    }
    return acc * (2.0 * std::numbers::pi / m);
}

// generic body: epsilon-excluded QMC with Richardson extrapolation in epsilon
cplx psi_qmc(const PhasePoly& pp, const ConvexBody& B, const CZKernel& kern,
             std::size_t npts, double eps) {
    static const int bases[] = {2, 3, 5, 7, 11, 13, 17, 19};
    int k = B.k;
    if (k > 8) fail("psi_pv: QMC fallback supports k <= 8");
    std::vector<double> x(static_cast<std::size_t>(k));
    cplx acc = 0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < npts; ++i) {
        double r2 = 0;
        for (int j = 0; j < k; ++j) {
            x[static_cast<std::size_t>(j)] = 2.0 * halton(i, bases[j]) - 1.0;
            r2 += x[static_cast<std::size_t>(j)] * x[static_cast<std::size_t>(j)];
        }
        if (!B.pred(x)) continue;
        ++hits;
        if (r2 < eps * eps) continue;
        acc += psi_integrand(pp, kern, x);
    }
    if (hits == 0) fail("psi_pv: no QMC point hit the body");
    return acc * (B.volume / static_cast<double>(hits));
}

}  // namespace

QuadratureResult psi_pv(std::span<const double> xi, const ConvexBody& B,
                        const MultiIndexSet& G, const CZKernel& kern, i64 N, int nodes) {
    if (static_cast<int>(xi.size()) != G.d) fail("psi_pv: xi arity mismatch");
    if (G.k != B.k || kern.k != B.k) fail("psi_pv: dimension mismatch");
    PhasePoly pp = phase_poly(xi, G, N);
    QuadratureResult res;
    if (B.kind == ConvexBody::Kind::cube && B.k == 1) {
        res.coarse = psi_interval(pp, kern, nodes);
        res.value = psi_interval(pp, kern, 2 * nodes);
        res.err = std::abs(res.value - res.coarse);
    } else if (B.kind == ConvexBody::Kind::ball && B.k == 2) {
        res.coarse = psi_ball2(pp, kern, nodes);
        res.value = psi_ball2(pp, kern, 2 * nodes);
        res.err = std::abs(res.value - res.coarse);
    } else {
        std::size_t npts = static_cast<std::size_t>(nodes) * nodes * 64;
        double eps = 1.0 / nodes;
        cplx v1 = psi_qmc(pp, B, kern, npts, eps);
        cplx v2 = psi_qmc(pp, B, kern, npts, eps / 2.0);
        res.coarse = v1;
        res.value = 2.0 * v2 - v1;  // Richardson in epsilon
        res.err = std::abs(v2 - v1);
    }
    return res;
}

// -----------------------------------------------------------------------------
// Gaussian sums
// -----------------------------------------------------------------------------
namespace {

double direct_cost(i64 q, const OrbitStructure& st) {
    return std::pow(static_cast<double>(q), st.k());
}

}  // namespace

cplx gaussian_sum_direct(std::span<const i64> a, i64 q, const OrbitStructure& st,
                         const MultiIndexSet& G) {
    if (!in_A_q(a, q)) fail("gaussian_sum: a not in A_q");
    if (G.k != st.k()) fail("gaussian_sum: Gamma arity mismatch");
    if (direct_cost(q, st) > 1e8) fail("gaussian_sum_direct: q^k above the direct cap");
    if (q == 1) return 1.0;

    int k = st.k();
    // per-value power table: powtab[v][e] = v^e mod q for v in [0,q), e <= degree
    int deg = G.degree;
    std::vector<i64> powtab(static_cast<std::size_t>(q) * (deg + 1));
    for (i64 v = 0; v < q; ++v) {
        powtab[static_cast<std::size_t>(v) * (deg + 1)] = 1 % q;
        for (int e = 1; e <= deg; ++e)
            powtab[static_cast<std::size_t>(v) * (deg + 1) + e] =
                powtab[static_cast<std::size_t>(v) * (deg + 1) + e - 1] * v % q;
    }

    std::vector<i64> units = unit_group(q);
    std::vector<std::vector<i64>> domains;
    for (int i = 0; i < k; ++i) {
        if (i < st.kprime) {
            std::vector<i64> full(static_cast<std::size_t>(q));
            for (i64 v = 1; v <= q; ++v) full[static_cast<std::size_t>(v - 1)] = v % q;
            domains.push_back(std::move(full));
        } else {
            std::vector<i64> u;
            for (i64 v : units) u.push_back(v % q);
            domains.push_back(std::move(u));
        }
    }

    std::vector<i64> ared(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) ared[i] = a[i] % q;

    RootTable roots(q);
    std::vector<std::size_t> idx(static_cast<std::size_t>(k), 0);
    cplx acc = 0;
    bool done = false;
    while (!done) {
        i64 r = 0;
        for (int g = 0; g < G.d; ++g) {
            i64 mono = 1;
            const auto& gam = G.gammas[static_cast<std::size_t>(g)];
            for (int j = 0; j < k; ++j) {
                int e = gam[static_cast<std::size_t>(j)];
                if (e == 0) continue;
                i64 v = domains[static_cast<std::size_t>(j)][idx[static_cast<std::size_t>(j)]];
                mono = mono * powtab[static_cast<std::size_t>(v) * (deg + 1) + e] % q;
            }
            r = (r + ared[static_cast<std::size_t>(g)] * mono) % q;
        }
        acc += roots[r];
        int j = k - 1;
        while (j >= 0) {
            if (++idx[static_cast<std::size_t>(j)] < domains[static_cast<std::size_t>(j)].size()) break;
            idx[static_cast<std::size_t>(j)] = 0;
            --j;
        }
        if (j < 0) done = true;
    }
    double norm = std::pow(static_cast<double>(q), st.kprime) *
                  std::pow(static_cast<double>(units.size()), st.kpp);
    return acc / norm;
}

cplx gaussian_sum_crt(std::span<const i64> a, i64 q, const OrbitStructure& st,
                      const MultiIndexSet& G) {
    if (!in_A_q(a, q)) fail("gaussian_sum: a not in A_q");
    if (q == 1) return 1.0;
    auto fac = factorize(q);
    cplx prod = 1.0;
    for (auto [p, e] : fac) {
        i64 pe = 1;
        for (int t = 0; t < e; ++t) pe *= p;
        i64 m = (q / pe) % pe;
        i64 minv = mod_inv(m, pe);
        std::vector<i64> atw(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            i64 r = a[i] % pe;
            r = r * (minv % pe) % pe;
            atw[i] = (r == 0) ? pe : r;  // N_q convention maps residue 0 to q
        }
        prod *= gaussian_sum_direct(atw, pe, st, G);
    }
    return prod;
}

cplx gaussian_sum(std::span<const i64> a, i64 q, const OrbitStructure& st,
                  const MultiIndexSet& G) {
    if (direct_cost(q, st) <= 1e8 && q <= (1 << 20)) return gaussian_sum_direct(a, q, st, G);
    return gaussian_sum_crt(a, q, st, G);
}

namespace {

// residue image vectors (Q_gamma(tuple) mod q)_gamma over the whole domain of
// one q, so the a-sweep is a plain dot-product scan against a shared table
std::vector<i64> residue_images(i64 q, const OrbitStructure& st, const MultiIndexSet& G) {
    int k = st.k();
    int deg = G.degree;
    std::vector<i64> powtab(static_cast<std::size_t>(q) * (deg + 1));
    for (i64 v = 0; v < q; ++v) {
        powtab[static_cast<std::size_t>(v) * (deg + 1)] = 1 % q;
        for (int e = 1; e <= deg; ++e)
            powtab[static_cast<std::size_t>(v) * (deg + 1) + e] =
                powtab[static_cast<std::size_t>(v) * (deg + 1) + e - 1] * v % q;
    }
    std::vector<i64> units = unit_group(q);
    std::vector<std::vector<i64>> domains;
    for (int i = 0; i < k; ++i) {
        if (i < st.kprime) {
            std::vector<i64> full(static_cast<std::size_t>(q));
            for (i64 v = 1; v <= q; ++v) full[static_cast<std::size_t>(v - 1)] = v % q;
            domains.push_back(std::move(full));
        } else {
            std::vector<i64> u;
            for (i64 v : units) u.push_back(v % q);
            domains.push_back(std::move(u));
        }
    }
    std::vector<i64> images;
    std::vector<std::size_t> idx(static_cast<std::size_t>(k), 0);
    bool done = false;
    while (!done) {
        for (int g = 0; g < G.d; ++g) {
            i64 mono = 1;
            const auto& gam = G.gammas[static_cast<std::size_t>(g)];
            for (int j = 0; j < k; ++j) {
                int e = gam[static_cast<std::size_t>(j)];
                if (e == 0) continue;
                i64 v = domains[static_cast<std::size_t>(j)][idx[static_cast<std::size_t>(j)]];
                mono = mono * powtab[static_cast<std::size_t>(v) * (deg + 1) + e] % q;
            }
            images.push_back(mono);
        }
        int j = k - 1;
        while (j >= 0) {
            if (++idx[static_cast<std::size_t>(j)] < domains[static_cast<std::size_t>(j)].size()) break;
            idx[static_cast<std::size_t>(j)] = 0;
            --j;
        }
        if (j < 0) done = true;
    }
    return images;
}

}  // namespace

GaussScan gauss_scan(i64 qmax, const OrbitStructure& st, const MultiIndexSet& G) {
    if (qmax < 2) fail("gauss_scan: qmax < 2");
    if (G.d * std::log(static_cast<double>(qmax)) > std::log(1e7))
        fail("gauss_scan: A_q too large to enumerate at this qmax and d");
    GaussScan scan;
    scan.rows.resize(static_cast<std::size_t>(qmax - 1));
    parallel_chunks(scan.rows.size(), [&](std::size_t slot) {
        i64 q = static_cast<i64>(slot) + 2;
        GaussScanRow row;
        row.q = q;
        std::vector<i64> images = residue_images(q, st, G);
        std::size_t d = static_cast<std::size_t>(G.d);
        std::size_t T = images.size() / d;
        double norm = std::pow(static_cast<double>(q), st.kprime) *
                      std::pow(static_cast<double>(totient(q)), st.kpp);
        RootTable roots(q);
        std::vector<i64> a(d, 1);
        bool done = false;
        while (!done) {
            if (in_A_q(a, q)) {
                cplx acc = 0;
                for (std::size_t t = 0; t < T; ++t) {
                    i64 r = 0;
                    for (std::size_t g = 0; g < d; ++g)
                        r = (r + a[g] % q * images[t * d + g]) % q;
                    acc += roots[r];
                }
                double v = std::abs(acc) / norm;
                if (v > row.max_abs) {
                    row.max_abs = v;
                    row.argmax_a = a;
                }
            }
            int j = G.d - 1;
            while (j >= 0) {
                if (++a[static_cast<std::size_t>(j)] <= q) break;
                a[static_cast<std::size_t>(j)] = 1;
                --j;
            }
            if (j < 0) done = true;
        }
        scan.rows[slot] = std::move(row);
    });
    // least-squares fit of log max|G| = log C - delta log q
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t n = 0;
    for (const auto& row : scan.rows) {
        if (row.max_abs <= 0) continue;
        double lx = std::log(static_cast<double>(row.q));
        double ly = std::log(row.max_abs);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++n;
    }
    if (n >= 2) {
        double denom = static_cast<double>(n) * sxx - sx * sx;
        double slope = (static_cast<double>(n) * sxy - sx * sy) / denom;
        scan.delta_fit = -slope;
        // lift C until the bound C q^{-delta} actually dominates every row
        scan.C_fit = envelope_constant(scan, scan.delta_fit);
    }
    return scan;
}

double envelope_constant(const GaussScan& scan, double delta) {
    double C = 0;
    for (const auto& row : scan.rows)
        C = std::max(C, row.max_abs * std::pow(static_cast<double>(row.q), delta));
    return C;
}

// -----------------------------------------------------------------------------
// Major-arc approximation error
// -----------------------------------------------------------------------------
MajorArcError major_arc_error(const RationalFrequency& rf, i64 N, MultiplierKind kind,
                              const MajorArcSetup& setup) {
    if (N < 2) fail("major_arc_error: N too small");
    const PrimeTable& primes = *setup.primes;
    MajorArcError out;
    out.q = rf.q;
    out.N = N;
    for (std::size_t i = 0; i < rf.theta.size(); ++i) {
        double L = std::abs(rf.theta[i]) *
                   std::pow(static_cast<double>(N), setup.G.total[i]);
        out.L = std::max(out.L, L);
    }
    double lnN = std::log(static_cast<double>(N));
    out.hypothesis_ok = static_cast<double>(rf.q) <= std::pow(lnN, setup.beta_prime) &&
                        out.L <= std::exp(std::sqrt(lnN));

    cplx g = gaussian_sum(rf.a, rf.q, setup.st, setup.G);

    if (kind == MultiplierKind::discrete_average || kind == MultiplierKind::continuous_average) {
        WeightedOrbit orb = enumerate_orbit(setup.B, N, setup.st, setup.G, primes);
        std::vector<RationalFrequency> one{rf};
        out.discrete = m_hat(one, orb)[0];
        bool orthant = !setup.st.with_sign;
        QuadratureResult phi = phi_integral(rf.theta, setup.B, setup.G, N, setup.nodes, orthant);
        out.model = g * phi.value;
    } else {
        WeightedOrbit orb1 = enumerate_orbit(setup.B, N, setup.st, setup.G, primes);
        WeightedOrbit orb2 = enumerate_orbit(setup.B, 2 * N, setup.st, setup.G, primes);
        std::vector<RationalFrequency> one{rf};
        cplx h1 = h_hat(one, orb1, setup.kernel)[0];
        cplx h2 = h_hat(one, orb2, setup.kernel)[0];
        QuadratureResult p1 = psi_pv(rf.theta, setup.B, setup.G, setup.kernel, N, setup.nodes);
        QuadratureResult p2 = psi_pv(rf.theta, setup.B, setup.G, setup.kernel, 2 * N, setup.nodes);
        out.discrete = h2 - h1;
        out.model = g * (p2.value - p1.value);
    }
    out.err = std::abs(out.discrete - out.model);
    return out;
}

// -----------------------------------------------------------------------------
// Envelopes
// -----------------------------------------------------------------------------
double nA_norm(std::span<const double> xi, const MultiIndexSet& G, i64 N) {
    double m = 0;
    for (int i = 0; i < G.d; ++i)
        m = std::max(m, std::abs(xi[static_cast<std::size_t>(i)]) *
                            std::pow(static_cast<double>(N),
                                     G.total[static_cast<std::size_t>(i)]));
    return m;
}

EnvelopeReport envelope_check(std::span<const std::vector<double>> xis, i64 N,
                              const ConvexBody& B, const MultiIndexSet& G,
                              const CZKernel* kern, int nodes) {
    EnvelopeReport rep;
    rep.n = xis.size();
    double invd = 1.0 / G.d;
    for (const auto& xi : xis) {
        double z = nA_norm(xi, G, N);
        QuadratureResult phi = phi_integral(xi, B, G, N, nodes, false);
        double aphi = std::abs(phi.value);
        double b1 = std::min(1.0, (z > 0) ? std::pow(z, -invd) : 1.0);
        double r1 = aphi / b1;
        rep.C_phi = std::max(rep.C_phi, r1);
        if (r1 > 10.0) ++rep.violations;
        if (z > 0) {
            double r2 = std::abs(phi.value - 1.0) / std::min(1.0, z);
            rep.C_phi_minus_1 = std::max(rep.C_phi_minus_1, r2);
            if (r2 > 10.0) ++rep.violations;
        }
        if (kern && B.k == 1 && z > 0) {
            QuadratureResult p1 = psi_pv(xi, B, G, *kern, N, nodes);
            QuadratureResult p2 = psi_pv(xi, B, G, *kern, 2 * N, nodes);
            double bound = std::min(z, std::pow(z, -invd));
            double r3 = std::abs(p2.value - p1.value) / bound;
            rep.C_psi_diff = std::max(rep.C_psi_diff, r3);
            if (r3 > 10.0) ++rep.violations;
            rep.psi_checked = true;
        }
    }
    return rep;
}

}  // namespace rvl
