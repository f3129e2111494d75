// =============================================================================
// Fourier multipliers of the averaging and singular operators, their
// continuous envelopes, and Gaussian sums.
//
//   m_N(xi)  = vartheta_B(N)^{-1} sum_{(n,p) in B_N} e(  <xi, Q(n,p)> ) prod log p_j
//   h_N(xi)  = sum_{(n,p) in B_N, signed} e( <xi, Q(n,p)> ) K(n,p) prod log|p_j|
//   Phi_N(xi) = |B|^{-1} int_B e( <xi, Q(N x)> ) dx
//   Psi_N(xi) = p.v. int_{B_N} e( <xi, Q(x)> ) K(x) dx
//             = p.v. int_B e( <xi, Q(N u)> ) K(u) du     (K homogeneous of -k)
//   G(a/q)   = q^{-k'} phi(q)^{-k''} sum_{x in N_q^{k'}} sum_{y in U_q^{k''}}
//              e( <a/q, Q(x,y)> )
//
// with e(t) = exp(2 pi i t).  Frequencies are carried as xi = a/q + theta with
// a in A_q (the joint-gcd condition); the a/q part of every phase is computed
// from exact integer residues mod q through a root-of-unity table, the theta
// part through exact fractional-part reduction, so no precision is lost even
// against images of size ~ 2^60.
//
// For averages over unsigned axes the matching continuous object is the
// integral over the positive orthant piece of B (the point masses live there),
// so Phi accepts an orthant flag; the signed singular objects use the full
// body.  p.v. integrals are symmetrized, (1/2) int K(u) [e(phi(u)) -
// e(phi(-u))] du, which cancels the kernel singularity against the odd phase
// difference; in one dimension the symmetrized integrand is smooth.
// =============================================================================
#pragma once

#include <span>
#include <string>
#include <vector>

#include "rvl/lattice.hpp"
#include "rvl/numtheory.hpp"
#include "rvl/operators.hpp"
#include "rvl/phase.hpp"
#include "rvl/util.hpp"

namespace rvl {

// -----------------------------------------------------------------------------
// Frequencies
// -----------------------------------------------------------------------------
struct RationalFrequency {
    i64 q = 1;
    std::vector<i64> a;        // entries in {1..q}, joint gcd with q equal 1
    std::vector<double> theta; // real offset, same arity

    std::vector<double> xi() const;  // a/q + theta reduced to [0,1)^d
    int dim() const { return static_cast<int>(a.size()); }
};
RationalFrequency make_rational_frequency(i64 q, std::vector<i64> a,
                                          std::vector<double> theta = {});
RationalFrequency pure_offset(std::vector<double> theta);  // q = 1 carrier

enum class MultiplierKind { discrete_average, discrete_singular, continuous_average, continuous_singular };
struct MultiplierSample {
    std::vector<double> xi;
    cplx value;
    i64 N = 0;
    MultiplierKind kind = MultiplierKind::discrete_average;
};

// -----------------------------------------------------------------------------
// Discrete multipliers (exact phases, deterministic chunked summation)
// -----------------------------------------------------------------------------
std::vector<cplx> m_hat(std::span<const RationalFrequency> xis, const WeightedOrbit& orbit);
std::vector<cplx> h_hat(std::span<const RationalFrequency> xis, const WeightedOrbit& orbit,
                        const CZKernel& kern);

// discrete transform of a sparse function with the same e(+<xi,x>) convention
cplx transform_sparse(const SparseFunction& f, std::span<const double> xi);

// -----------------------------------------------------------------------------
// Continuous counterparts
// -----------------------------------------------------------------------------
struct QuadratureResult {
    cplx value;        // finer level
    double err = 0;    // |finer - coarser|
    cplx coarse;       // coarser level
};

// Phi_N over the body (or its positive-orthant piece), tensor Gauss-Legendre
// on the cube, polar rules on the 2d ball, quasi-Monte-Carlo otherwise.
QuadratureResult phi_integral(std::span<const double> xi, const ConvexBody& B,
                              const MultiIndexSet& G, i64 N, int nodes = 64,
                              bool orthant = false);

// Psi_N, principal value via the symmetrized integrand.
QuadratureResult psi_pv(std::span<const double> xi, const ConvexBody& B,
                        const MultiIndexSet& G, const CZKernel& kern, i64 N,
                        int nodes = 64);

// -----------------------------------------------------------------------------
// Gaussian sums
// -----------------------------------------------------------------------------
// direct O(q^{k'} phi(q)^{k''}) evaluation below the op cap, CRT factorization
// above it; `force_direct` / `force_crt` pin the path for cross-validation
cplx gaussian_sum(std::span<const i64> a, i64 q, const OrbitStructure& st,
                  const MultiIndexSet& G);
cplx gaussian_sum_direct(std::span<const i64> a, i64 q, const OrbitStructure& st,
                         const MultiIndexSet& G);
cplx gaussian_sum_crt(std::span<const i64> a, i64 q, const OrbitStructure& st,
                      const MultiIndexSet& G);

bool in_A_q(std::span<const i64> a, i64 q);  // a in {1..q}^d with joint gcd 1

struct GaussScanRow {
    i64 q = 0;
    double max_abs = 0;
    std::vector<i64> argmax_a;
};
// max_{a in A_q} |G(a/q)| for q = 2..qmax, plus the fitted C q^{-delta} bound
struct GaussScan {
    std::vector<GaussScanRow> rows;
    double C_fit = 0;
    double delta_fit = 0;
};
GaussScan gauss_scan(i64 qmax, const OrbitStructure& st, const MultiIndexSet& G);

// smallest C with max_abs(q) <= C q^{-delta} across the scanned rows.  C is
// increasing in delta, so a bound "delta >= d0 with C <= c0" holds for some
// valid pair iff envelope_constant(scan, d0) <= c0.
double envelope_constant(const GaussScan& scan, double delta);

// -----------------------------------------------------------------------------
// Major-arc approximation error
// -----------------------------------------------------------------------------
struct MajorArcSetup {
    ConvexBody B;
    OrbitStructure st;        // unsigned for average, signed for singular
    MultiIndexSet G;
    const PrimeTable* primes = nullptr;
    CZKernel kernel;          // singular kind
    int nodes = 96;
    double beta_prime = 2.0;  // hypothesis gate q <= (log N)^{beta'}
};
struct MajorArcError {
    double err = 0;       // |m_N(xi) - G(a/q) Phi_N(theta)|  or the h/Psi analogue
    double L = 0;         // max_gamma |theta_gamma| N^{|gamma|}
    i64 q = 0;
    i64 N = 0;
    bool hypothesis_ok = true;  // q within the (log N)^{beta'} gate, L moderate
    cplx discrete;        // m_N(xi) or (h_{2N} - h_N)(xi)
    cplx model;           // G(a/q) Phi_N(theta) or G(a/q)(Psi_{2N}-Psi_N)(theta)
};
MajorArcError major_arc_error(const RationalFrequency& rf, i64 N, MultiplierKind kind,
                              const MajorArcSetup& setup);

// -----------------------------------------------------------------------------
// van der Corput envelopes
// -----------------------------------------------------------------------------
struct EnvelopeReport {
    std::size_t n = 0;          // frequencies tested
    double C_phi = 0;           // max |Phi| / min{1, |N^A xi|^{-1/d}}
    double C_phi_minus_1 = 0;   // max |Phi - 1| / min{1, |N^A xi|}
    double C_psi_diff = 0;      // max |Psi_N - Psi_{2N}| / min{z, z^{-1/d}}, k = 1 only
    int violations = 0;         // ratios above the a-priori cap 10
    bool psi_checked = false;
};
EnvelopeReport envelope_check(std::span<const std::vector<double>> xis, i64 N,
                              const ConvexBody& B, const MultiIndexSet& G,
                              const CZKernel* kern = nullptr, int nodes = 64);

double nA_norm(std::span<const double> xi, const MultiIndexSet& G, i64 N);  // |N^A xi|_inf

}  // namespace rvl
