#include "rvl/numtheory.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "rvl/phase.hpp"

namespace rvl {

// -----------------------------------------------------------------------------
// Sieve
// -----------------------------------------------------------------------------
PrimeTable sieve_primes(i64 limit) {
    if (limit < 2) fail("sieve_primes: limit must be >= 2");
    PrimeTable t;
    t.limit = limit;
    t.mark.assign(static_cast<std::size_t>(limit) + 1, 1);
    t.mark[0] = t.mark[1] = 0;
    for (i64 p = 2; p * p <= limit; ++p) {
        if (!t.mark[static_cast<std::size_t>(p)]) continue;
        for (i64 m = p * p; m <= limit; m += p) t.mark[static_cast<std::size_t>(m)] = 0;
    }
    for (i64 n = 2; n <= limit; ++n) {
        if (t.mark[static_cast<std::size_t>(n)]) {
            t.primes.push_back(n);
            t.logs.push_back(std::log(static_cast<double>(n)));
        }
    }
    return t;
}

std::size_t PrimeTable::count_below(i64 x) const {
    auto it = std::upper_bound(primes.begin(), primes.end(), x);
    return static_cast<std::size_t>(it - primes.begin());
}

PrimeTable sieve_primes_cached(i64 limit, const std::string& dir) {
    std::string cache_dir = dir;
    if (cache_dir.empty()) {
        const char* env = std::getenv("RVL_SIEVE_CACHE");
        if (env != nullptr) cache_dir = env;
    }
    if (cache_dir.empty()) return sieve_primes(limit);

    std::filesystem::create_directories(cache_dir);
    std::string path = cache_dir + "/primes_" + std::to_string(limit) + ".bin";
    {
        std::ifstream in(path, std::ios::binary);
        if (in) {
            i64 lim = 0, n = 0;
            in.read(reinterpret_cast<char*>(&lim), sizeof lim);
            in.read(reinterpret_cast<char*>(&n), sizeof n);
            if (in && lim == limit && n >= 0) {
                PrimeTable t;
                t.limit = limit;
                t.primes.resize(static_cast<std::size_t>(n));
                in.read(reinterpret_cast<char*>(t.primes.data()),
                        static_cast<std::streamsize>(sizeof(i64) * t.primes.size()));
                if (in) {
                    t.logs.reserve(t.primes.size());
                    for (i64 p : t.primes) t.logs.push_back(std::log(static_cast<double>(p)));
                    t.mark.assign(static_cast<std::size_t>(limit) + 1, 0);
                    for (i64 p : t.primes) t.mark[static_cast<std::size_t>(p)] = 1;
                    return t;
                }
            }
        }
    }
    PrimeTable t = sieve_primes(limit);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (out) {
        i64 n = static_cast<i64>(t.primes.size());
        out.write(reinterpret_cast<const char*>(&t.limit), sizeof t.limit);
        out.write(reinterpret_cast<const char*>(&n), sizeof n);
        out.write(reinterpret_cast<const char*>(t.primes.data()),
                  static_cast<std::streamsize>(sizeof(i64) * t.primes.size()));
    }
    return t;
}

// -----------------------------------------------------------------------------
// Multiplicative functions
// -----------------------------------------------------------------------------
i64 gcd_i64(i64 a, i64 b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) {
        i64 t = a % b;
        a = b;
        b = t;
    }
    return a;
}

std::vector<std::pair<i64, int>> factorize(i64 q) {
    if (q < 1) fail("factorize: q must be >= 1");
    std::vector<std::pair<i64, int>> f;
    for (i64 p = 2; p * p <= q; ++p) {
        if (q % p != 0) continue;
        int e = 0;
        while (q % p == 0) {
            q /= p;
            ++e;
        }
        f.emplace_back(p, e);
    }
    if (q > 1) f.emplace_back(q, 1);
    return f;
}

i64 totient(i64 q) {
    if (q < 1) fail("totient: q must be >= 1");
    i64 r = q;
    for (auto [p, e] : factorize(q)) r -= r / p;
    return r;
}

int moebius(i64 q) {
    if (q < 1) fail("moebius: q must be >= 1");
    int sign = 1;
    for (auto [p, e] : factorize(q)) {
        if (e >= 2) return 0;
        sign = -sign;
    }
    return sign;
}

i64 mod_pow(i64 b, i64 e, i64 m) {
    assert(m >= 1 && e >= 0);
    b %= m;
    if (b < 0) b += m;
    unsigned __int128 acc = 1, base = static_cast<unsigned __int128>(b);
    while (e > 0) {
        if (e & 1) acc = acc * base % static_cast<unsigned __int128>(m);
        base = base * base % static_cast<unsigned __int128>(m);
        e >>= 1;
    }
    return static_cast<i64>(acc);
}

i64 mod_inv(i64 a, i64 m) {
    // extended Euclid
    i64 r0 = m, r1 = a % m, s0 = 0, s1 = 1;
    if (r1 < 0) r1 += m;
    while (r1 != 0) {
        i64 k = r0 / r1;
        i64 r2 = r0 - k * r1;
        i64 s2 = s0 - k * s1;
        r0 = r1;
        r1 = r2;
        s0 = s1;
        s1 = s2;
    }
    if (r0 != 1) fail("mod_inv: not invertible");
    return s0 < 0 ? s0 + m : s0;
}

std::vector<i64> unit_group(i64 q) {
    if (q < 1) fail("unit_group: q must be >= 1");
    if (q > 1000000) fail("unit_group: refusing to enumerate units mod q > 10^6");
    std::vector<i64> u;
    for (i64 x = 1; x <= q; ++x)
        if (gcd_i64(x, q) == 1) u.push_back(x);  // N_q = {1..q}, so q=1 yields {1}
    return u;
}

double ramanujan_closed_form(i64 a, i64 q) {
    i64 g = gcd_i64(a == 0 ? q : a, q);
    i64 m = q / g;
    return static_cast<double>(moebius(m)) / static_cast<double>(totient(m));
}

cplx ramanujan_average(i64 a, i64 q) {
    if (q < 1) fail("ramanujan_average: q must be >= 1");
    RootTable roots(q);
    auto units = unit_group(q);
    i64 ar = a % q;
    if (ar < 0) ar += q;
    cplx s = chunked_sum_cplx(units.size(), [&](std::size_t i) {
        return roots[(ar * (units[i] % q)) % q];
    });
    return s / static_cast<double>(totient(q));
}

// -----------------------------------------------------------------------------
// theta(x; q, r)
// -----------------------------------------------------------------------------
double theta_progression(double x, i64 q, i64 r, const PrimeTable& primes) {
    if (x < 2) return 0.0;
    if (x > static_cast<double>(primes.limit))
        fail("theta_progression: x exceeds the sieve limit; sieve further first");
    if (q < 1) fail("theta_progression: q must be >= 1");
    i64 rr = r % q;
    if (rr < 0) rr += q;
    std::size_t n = primes.count_below(static_cast<i64>(x));
    return chunked_sum(n, [&](std::size_t i) {
        return primes.primes[i] % q == rr ? primes.logs[i] : 0.0;
    });
}

// -----------------------------------------------------------------------------
// Dirichlet approximation
// -----------------------------------------------------------------------------
RationalApprox dirichlet_approx(double xi, i64 Q) {
    if (Q < 1) fail("dirichlet_approx: Q must be >= 1");
    double target = torus_reduce(xi);

    // continued fraction of target; convergents p/q with q <= Q
    i64 p0 = 1, q0 = 0;  // h_{-1}, k_{-1}
    i64 p1 = 0, q1 = 1;  // h_{-2}, k_{-2} -- so the first convergent is a0/1
    double x = target;
    i64 bp = 0, bq = 1;  // best so far: 0/1
    for (int it = 0; it < 64; ++it) {
        double fa = std::floor(x);
        if (fa > 9.0e18) break;
        i64 a0 = static_cast<i64>(fa);
        // p_k = a_k p_{k-1} + p_{k-2}
        i64 pk, qk;
        if (__builtin_mul_overflow(a0, p0, &pk) || __builtin_add_overflow(pk, p1, &pk)) break;
        if (__builtin_mul_overflow(a0, q0, &qk) || __builtin_add_overflow(qk, q1, &qk)) break;
        if (qk > Q) break;
        p1 = p0;
        q1 = q0;
        p0 = pk;
        q0 = qk;
        bp = p0;
        bq = q0;
        double frac = x - fa;
        if (frac < 1e-18) break;  // target is (numerically) rational; convergent exact
        x = 1.0 / frac;
    }

    RationalApprox out;
    out.target = target;
    out.q = bq;
    out.a = bp % bq;
    if (out.a <= 0) out.a += bq;  // 0/1 is reported as 1/1 (same torus point)
    out.err = torus_dist(target, static_cast<double>(bp) / static_cast<double>(bq));

    // The convergent guarantee can only be spoiled by floating-point noise in
    // the CF iteration; fall back to an exhaustive scan if it ever is.
    double bound = 1.0 / (static_cast<double>(out.q) * static_cast<double>(Q));
    if (out.err > bound * (1.0 + 1e-9)) {
        for (i64 q = 1; q <= Q; ++q) {
            i64 a = static_cast<i64>(std::llround(target * static_cast<double>(q)));
            double err = torus_dist(target, static_cast<double>(a) / static_cast<double>(q));
            if (err <= 1.0 / (static_cast<double>(q) * static_cast<double>(Q))) {
                i64 g = gcd_i64(a == 0 ? q : a, q);
                out.q = q / g;
                out.a = (a / g) % out.q;
                if (out.a <= 0) out.a += out.q;
                out.err = err;
                break;
            }
        }
    }
    return out;
}

// -----------------------------------------------------------------------------
// Factorized integers
// -----------------------------------------------------------------------------
std::optional<i64> Factorized::value() const {
    unsigned __int128 acc = 1;
    const auto cap = static_cast<unsigned __int128>(1) << 62;
    for (auto [p, e] : pe) {
        for (i64 j = 0; j < e; ++j) {
            acc *= static_cast<unsigned __int128>(p);
            if (acc > cap) return std::nullopt;
        }
    }
    return static_cast<i64>(acc);
}

double Factorized::log_value() const {
    double s = 0;
    for (auto [p, e] : pe) s += static_cast<double>(e) * std::log(static_cast<double>(p));
    return s;
}

bool Factorized::divides(const Factorized& other) const {
    std::size_t j = 0;
    for (auto [p, e] : pe) {
        while (j < other.pe.size() && other.pe[j].first < p) ++j;
        if (j >= other.pe.size() || other.pe[j].first != p || other.pe[j].second < e)
            return false;
    }
    return true;
}

Factorized Factorized::pow(i64 k) const {
    Factorized r = *this;
    for (auto& [p, e] : r.pe) e *= k;
    return r;
}

Factorized Factorized::times(const Factorized& other) const {
    Factorized r;
    std::size_t i = 0, j = 0;
    while (i < pe.size() || j < other.pe.size()) {
        if (j >= other.pe.size() || (i < pe.size() && pe[i].first < other.pe[j].first))
            r.pe.push_back(pe[i++]);
        else if (i >= pe.size() || other.pe[j].first < pe[i].first)
            r.pe.push_back(other.pe[j++]);
        else {
            r.pe.emplace_back(pe[i].first, pe[i].second + other.pe[j].second);
            ++i;
            ++j;
        }
    }
    return r;
}

Factorized factorial_factorized(i64 n) {
    Factorized f;
    if (n < 2) return f;
    PrimeTable t = sieve_primes(n);
    for (i64 p : t.primes) {
        i64 e = 0;
        for (i64 pk = p; pk <= n; pk *= p) {
            e += n / pk;
            if (pk > n / p) break;  // next pk would overflow the loop bound
        }
        f.pe.emplace_back(p, e);
    }
    return f;
}

Factorized factorize_value(i64 n) {
    Factorized f;
    for (auto [p, e] : factorize(n)) f.pe.emplace_back(p, static_cast<i64>(e));
    return f;
}

}  // namespace rvl
