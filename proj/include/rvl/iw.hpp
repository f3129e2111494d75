// =============================================================================
// Ionescu-Wainger rational partition machinery.
//
// Level parameters: n0 = floor(n^{1/20}), D = 20 beta + 1, Q0 = (n0!)^D.
// The admissible denominators are
//
//   P_n = { Q w : Q | Q0, w in Pi union {1} }
//
// where Pi collects products of at most D distinct primes from (n0, n^beta],
// each with exponent in {1..D}.  P_n is divisor-closed and contains N_{n^beta}
// (every m <= n^beta factors into a part made of primes <= n0 dividing Q0 --
// exponents of m are at most log2(n^beta) <= D nu_p(n0!) -- and at most D
// large primes with small exponents).  U_n^beta = { a/q : q in P_n, a in A_q }
// as reduced points of T^d; since P_n is divisor-closed this enumeration sees
// every rational point exactly once.
//
// The bump eta is a smooth ell^infty plateau: exactly 1 for |x|_inf <= 1/(32d)
// and exactly 0 for |x|_inf >= 1/(16d), built from the exp(-1/t) mollifier
// profile.  Scaled copies
//
//   eta_n(xi) = eta( 2^{-chi sqrt(log2 N_n)} N_n^A xi ),   N_n = floor(2^{n^rho}),
//
// have per-component support half-widths h_gamma = (16d)^{-1} 2^{chi sqrt(log2
// N_n)} N_n^{-|gamma|}, which drives the streamed evaluation of
//
//   Xi_n(xi)   = sum_{a/q in U_{floor(n^rho)}}  eta_n(xi - a/q)
//   Xi_{n,s}   = sum_{a/q in R_s}               eta_n(xi - a/q),
//   R_s        = U_{floor((s+1)^rho)} \ U_{floor(s^rho)}   (U_0 = empty).
//
// The evaluated U_n keeps only denominators q <= e^{n^{1/10}}: that inclusion
// is what every support-separation argument consumes, and it is only
// asymptotic for the raw P_n.  Distinct reduced fractions are >= 1/(q q')
// apart in some component, so supports of eta_m-bumps at a/q != a'/q' are
// disjoint exactly when 1/(q q') > 2 (16d)^{-1} 2^{chi sqrt(log2 N_m)} / N_m,
// the widest (|gamma| = 1) box dimension; that closed form is the pairwise
// check.
// =============================================================================
#pragma once

#include <optional>
#include <span>
#include <vector>

#include "rvl/lattice.hpp"
#include "rvl/numtheory.hpp"
#include "rvl/util.hpp"
#include "rvl/variation.hpp"

namespace rvl {

struct IWParams {
    int n = 1;
    int beta = 1;
    i64 n0 = 1;
    int D = 21;
    Factorized Q0;
};
IWParams make_iw_params(int n, int beta);

struct RationalSet {
    IWParams par;
    std::vector<i64> qs;  // sorted, exact up to magnitude 2^62
    double cardinality = 0;
    bool magnitude_truncated = false;
};
RationalSet build_Pn(int n, int beta, double cap = 1e6);
bool in_Pn(i64 m, int n, int beta);  // membership without materialization

// Magnitude cap e^{n^{1/10}} under which P_n is materialized into fractions.
// The inclusion P_n <= N_{e^{n^{1/10}}} is asymptotic (it fails at small n:
// 2^21 in P_2), but the partition and disjointness arguments use only
// denominators below this bound, so the evaluated sets enforce it.
double denominator_cap(int n);

// eps_{n,gamma} = factor * exp(-n^{1/5}), factor <= 1: the diagonal entries of
// the transference rescaling matrix.
double epsilon_n(int n, double factor = 1.0);

double eta(std::span<const double> x);
double eta_n(std::span<const double> offset, i64 Nn, double chi, const MultiIndexSet& G);

struct Fraction {
    i64 q = 1;
    std::vector<i64> a;  // entries in {1..q}, joint gcd 1
    std::vector<double> point() const;
};
std::vector<Fraction> enumerate_fractions(const RationalSet& P, int d,
                                          std::size_t cap = 2000000);

struct XiPartitionParams {
    int beta = 1;
    double rho = 0.5;
    double chi = 0.05;
    const ScaleLadder* ladder = nullptr;
    const MultiIndexSet* G = nullptr;
};
i64 u_level(int n, double rho);  // floor(n^rho)
double xi_partition(std::span<const double> xi, int n, std::optional<int> s,
                    const XiPartitionParams& par);

struct DisjointnessResult {
    bool ok = true;
    bool has_witness = false;
    Fraction f1, f2;
};
DisjointnessResult disjointness_check(int s, int m, const XiPartitionParams& par);

}  // namespace rvl
