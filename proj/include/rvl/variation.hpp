// =============================================================================
// r-variational seminorms and their discrete toolbox.
//
// For a complex sequence (a_j : j in A), A a finite increasing index set,
//
//   V_r(a_j) = sup over increasing subsequences j_0 < j_1 < ... < j_J of
//              ( sum_m |a_{j_{m+1}} - a_{j_m}|^r )^{1/r},   r >= 1.
//
// The supremum is attained and computed exactly by dynamic programming:
//   best[j] = max_{i<j} ( best[i] + |a_j - a_i|^r ),  V_r^r = max_j best[j].
// Any chain through intermediate points is dominated by the chain that keeps
// only its "extremal" stops, which the DP explores in O(n^2).
//
// Dyadic bound (r >= 2, length 2^s + 1):
//   V_r <= sqrt(2) * sum_{i=0}^{s} ( sum_j |a_{(j+1)2^i} - a_{j 2^i}|^2 )^{1/2}.
//
// Oscillation seminorm for a lacunary subset N_0 < N_1 < ... < N_J of A:
//   O_J = ( sum_j sup_{N_j <= n <= N_{j+1}} |a_n - a_{N_j}|^2 )^{1/2}.
//
// Long/short split along the subexponential ladder N_n = floor(2^{n^rho}):
//   total variation over all scales is controlled by the variation sampled at
//   the N_n ("long") plus an ell^r aggregate of the variations inside the
//   half-open blocks [N_n, N_{n+1}) ("short").  A crossing of a block is
//   charged to one long jump plus at most two short pieces, so
//   total <= long + 2 * short holds deterministically; we also report the
//   smallest constant that would have sufficed for the run.
// =============================================================================
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rvl/numtheory.hpp"
#include "rvl/util.hpp"

namespace rvl {

struct IndexedSequence {
    std::vector<i64> idx;   // strictly increasing
    std::vector<cplx> val;  // same length
    void validate() const;
    std::size_t size() const { return idx.size(); }
};

// N_n = floor(2^{n^rho}), kappa_s = 20 d (floor(rho^{-1} (s+1)^{rho/10}) + 1),
// Q_s = (floor(e^{(s+1)^{rho/10}}))!  (kept factorized; the raw value explodes)
struct ScaleLadder {
    double rho = 0.5;
    int d = 1;
    std::vector<i64> Nseq;
    std::vector<i64> kappas;
    std::vector<Factorized> Qs;
};
ScaleLadder make_ladder(double rho, int d, i64 max_N, int max_s = 32);

double vr(std::span<const cplx> a, double r);
double vr(const IndexedSequence& seq, double r);

double vr_bruteforce(std::span<const cplx> a, double r);

struct DyadicBound {
    double lhs = 0;  // V_r of the sequence
    double rhs = 0;  // sqrt(2) * sum of dyadic-level ell^2 sums
};
DyadicBound vr_dyadic_bound(std::span<const cplx> a, double r);

double oscillation(const IndexedSequence& seq, std::span<const i64> lacunary);

struct SplitVariation {
    double long_part = 0;   // V_r over the ladder scales
    double short_part = 0;  // ell^r aggregate of in-block variations
    double total = 0;       // V_r over every index
    double c_min = 0;       // smallest C with total <= C (long + short)
    bool ok_c2 = true;      // total <= 2 (long + short)
    std::vector<i64> scales_used;
};
SplitVariation split_variation(const IndexedSequence& seq, double rho, double r);

}  // namespace rvl
