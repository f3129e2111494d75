#include "rvl/variation.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

namespace rvl {

void IndexedSequence::validate() const {
    if (idx.size() != val.size()) fail("IndexedSequence: index/value length mismatch");
    if (idx.empty()) fail("IndexedSequence: empty");
    for (std::size_t i = 1; i < idx.size(); ++i)
        if (idx[i] <= idx[i - 1]) fail("IndexedSequence: indices not strictly increasing");
}

ScaleLadder make_ladder(double rho, int d, i64 max_N, int max_s) {
    if (!(rho > 0.0 && rho < 1.0)) fail("make_ladder: rho must lie in (0,1)");
    if (d < 1) fail("make_ladder: d must be positive");
    ScaleLadder lad;
    lad.rho = rho;
    lad.d = d;
    for (int n = 0;; ++n) {
        double t = std::pow(static_cast<double>(n), rho);
        if (std::abs(t - std::round(t)) < 1e-9) t = std::round(t);  // 4^{1/2} = 2 exactly
        double v = std::exp2(t);
        if (std::abs(v - std::round(v)) < 1e-6) v = std::round(v);
        i64 Nn = static_cast<i64>(std::floor(v));
        lad.Nseq.push_back(Nn);
        if (Nn > max_N || n > 4096) break;
    }
    for (int s = 0; s < max_s; ++s) {
        double u = std::pow(static_cast<double>(s + 1), rho / 10.0);
        lad.kappas.push_back(20 * static_cast<i64>(d) *
                             (static_cast<i64>(std::floor(u / rho)) + 1));
        lad.Qs.push_back(factorial_factorized(static_cast<i64>(std::floor(std::exp(u)))));
    }
    return lad;
}

// -----------------------------------------------------------------------------
// V_r
// -----------------------------------------------------------------------------
namespace {

void check_r(double r) {
    if (r < 1.0) fail("vr: r < 1 is not a variation exponent");
    if (r > 64.0) fail("vr: r > 64 unsupported");
}

double pow_r(double b, double r) {
    // b in [0,1] after normalization; log-space keeps large r honest
    if (b <= 0.0) return 0.0;
    if (r > 16.0) return std::exp(r * std::log(b));
    return std::pow(b, r);
}

double max_pair_gap(std::span<const cplx> a) {
    double m = 0.0;
    for (std::size_t j = 1; j < a.size(); ++j)
        for (std::size_t i = 0; i < j; ++i) m = std::max(m, std::abs(a[j] - a[i]));
    return m;
}

}  // namespace

double vr(std::span<const cplx> a, double r) {
    check_r(r);
    if (a.empty()) fail("vr: empty sequence");
    std::size_t n = a.size();
    if (n == 1) return 0.0;
    double M = max_pair_gap(a);
    if (M == 0.0) return 0.0;
    std::vector<double> best(n, 0.0);
    for (std::size_t j = 1; j < n; ++j) {
        double b = 0.0;
        for (std::size_t i = 0; i < j; ++i)
            b = std::max(b, best[i] + pow_r(std::abs(a[j] - a[i]) / M, r));
        best[j] = b;
    }
    double top = *std::max_element(best.begin(), best.end());
    return M * std::pow(top, 1.0 / r);
}

double vr(const IndexedSequence& seq, double r) {
    seq.validate();
    return vr(std::span<const cplx>(seq.val), r);
}

double vr_bruteforce(std::span<const cplx> a, double r) {
    check_r(r);
    if (a.empty()) fail("vr_bruteforce: empty sequence");
    std::size_t n = a.size();
    if (n > 16) fail("vr_bruteforce: length > 16");
    double M = max_pair_gap(a);
    if (M == 0.0) return 0.0;
    double top = 0.0;
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
        double s = 0.0;
        bool have = false;
        cplx prev;
        for (std::size_t j = 0; j < n; ++j) {
            if (!(mask & (1u << j))) continue;
            if (have) s += pow_r(std::abs(a[j] - prev) / M, r);
            prev = a[j];
            have = true;
        }
        top = std::max(top, s);
    }
    return M * std::pow(top, 1.0 / r);
}

// -----------------------------------------------------------------------------
// Dyadic bound, lhs <= rhs for r >= 2 and length 2^s + 1
// -----------------------------------------------------------------------------
DyadicBound vr_dyadic_bound(std::span<const cplx> a, double r) {
    if (r < 2.0) fail("vr_dyadic_bound: needs r >= 2");
    std::size_t n = a.size();
    std::size_t s = 0, len = 2;
    while (len < n) {
        len = 2 * len - 1;
        ++s;
    }
    if (len != n) fail("vr_dyadic_bound: length must be 2^s + 1 (pad by repetition first)");

    DyadicBound out;
    out.lhs = vr(a, r);
    std::size_t step = 1;
    double acc = 0.0;
    for (std::size_t lvl = 0; lvl <= s; ++lvl) {
        double sq = 0.0;
        for (std::size_t j = 0; (j + 1) * step < n; ++j) {
            double d = std::abs(a[(j + 1) * step] - a[j * step]);
            sq += d * d;
        }
        acc += std::sqrt(sq);
        step *= 2;
    }
    out.rhs = std::sqrt(2.0) * acc;
    return out;
}

// -----------------------------------------------------------------------------
// Oscillation seminorm
// -----------------------------------------------------------------------------
double oscillation(const IndexedSequence& seq, std::span<const i64> lacunary) {
    seq.validate();
    if (lacunary.empty()) fail("oscillation: empty lacunary set");
    auto pos_of = [&](i64 N) {
        auto it = std::lower_bound(seq.idx.begin(), seq.idx.end(), N);
        if (it == seq.idx.end() || *it != N) fail("oscillation: lacunary index not in sequence");
        return static_cast<std::size_t>(it - seq.idx.begin());
    };
    double acc = 0.0;
    for (std::size_t j = 0; j + 1 < lacunary.size(); ++j) {
        if (lacunary[j + 1] <= lacunary[j]) fail("oscillation: lacunary set not increasing");
        std::size_t lo = pos_of(lacunary[j]);
        std::size_t hi = pos_of(lacunary[j + 1]);
        double sup = 0.0;
        for (std::size_t p = lo; p <= hi; ++p)
            sup = std::max(sup, std::abs(seq.val[p] - seq.val[lo]));
        acc += sup * sup;
    }
    return std::sqrt(acc);
}

// -----------------------------------------------------------------------------
// Long/short split over the ladder N_n = floor(2^{n^rho})
// -----------------------------------------------------------------------------
SplitVariation split_variation(const IndexedSequence& seq, double rho, double r) {
    seq.validate();
    check_r(r);
    i64 max_idx = seq.idx.back();
    ScaleLadder lad = make_ladder(rho, 1, max_idx, 1);
    if (seq.idx.front() < lad.Nseq.front())
        fail("split_variation: sequence starts below N_0");

    // deduplicate collided scales, keep first occurrence, clip to the range
    std::vector<i64> scales;
    for (i64 Nn : lad.Nseq) {
        if (Nn > max_idx) break;
        if (scales.empty() || Nn != scales.back()) scales.push_back(Nn);
    }
    if (scales.empty() || scales.back() != max_idx) scales.push_back(max_idx);

    auto pos_of = [&](i64 N) {
        auto it = std::lower_bound(seq.idx.begin(), seq.idx.end(), N);
        if (it == seq.idx.end() || *it != N)
            fail("split_variation: sequence must contain every ladder scale up to its top");
        return static_cast<std::size_t>(it - seq.idx.begin());
    };

    SplitVariation out;
    out.scales_used = scales;

    std::vector<cplx> at_scales;
    for (i64 Nn : scales) at_scales.push_back(seq.val[pos_of(Nn)]);
    out.long_part = vr(at_scales, r);

    double M = max_pair_gap(std::span<const cplx>(seq.val));
    double short_acc = 0.0;  // in units of M^r
    for (std::size_t b = 0; b + 1 < scales.size(); ++b) {
        std::size_t lo = pos_of(scales[b]);
        std::size_t hi = pos_of(scales[b + 1]);  // block [N_b, N_{b+1}) plus last block's top
        std::size_t end = (b + 2 == scales.size()) ? hi + 1 : hi;  // half-open except final
        if (end - lo < 2) continue;
        double v = vr(std::span<const cplx>(seq.val).subspan(lo, end - lo), r);
        if (M > 0.0) short_acc += pow_r(v / M, r);
    }
    out.short_part = (M > 0.0) ? M * std::pow(short_acc, 1.0 / r) : 0.0;

    out.total = vr(seq, r);
    double denom = out.long_part + out.short_part;
    out.c_min = (denom > 0.0) ? out.total / denom : 0.0;
    out.ok_c2 = out.total <= 2.0 * denom + 1e-12 * (1.0 + out.total);
    return out;
}

}  // namespace rvl
