// =============================================================================
// lattice.hpp
//
// Multi-index machinery and weighted orbits.
//
//   Gamma = { gamma in N_0^k \ {0} : gamma_j <= degree },  lexicographic,
//   d = |Gamma| = (degree+1)^k - 1.
//
//   Canonical map  Q(x) = (x^gamma : gamma in Gamma) : R^k -> R^d.
//   Any polynomial mapping P with integer coefficients and no constant term
//   factors as P = L o Q for the integer matrix (L v)_j = sum c_{j,gamma}
//   v_gamma, so operators need only be implemented for Q.
//
//   Scaling matrix A is diagonal with (A v)_gamma = |gamma| v_gamma, and
//   t^A v = (t^{|gamma|} v_gamma).
//
//   A convex body B (open, bounded, 0 in B, with [-iota,iota]^k <= B <=
//   [-1,1]^k) dilates as B_N = { x : x/N in B }.  The built-in cube and
//   euclidean ball are taken CLOSED so that lattice points sitting exactly on
//   the boundary (p = N on the interval, say) are counted; the dilation
//   predicate is unaffected.
//
//   An orbit at scale N collects (n, p) in N^{k'} x P^{k''} (or the signed
//   variants) inside B_N together with the weights prod_j log|p_j| and the
//   precomputed images Q(n, p).
//
//     pi_B(N)       = #orbit,
//     vartheta_B(N) = sum of weights  (the Chebyshev normalizer).
// =============================================================================

#pragma once

#include <functional>
#include <string>

#include "rvl/numtheory.hpp"
#include "rvl/util.hpp"

namespace rvl {

// -----------------------------------------------------------------------------
// MultiIndexSet
// -----------------------------------------------------------------------------
struct MultiIndexSet {
    int k = 0;
    int degree = 0;
    std::vector<std::vector<int>> gammas;  // lexicographic, nonzero
    std::vector<int> total;                // |gamma| per entry = diag of A
    int d = 0;
};

// Errors when (degree+1)^k - 1 > 10^6.
MultiIndexSet build_gamma(int k, int degree);

// Q(x) for an integer point; errors if any |x^gamma| > 2^62.
std::vector<i64> eval_Q(const MultiIndexSet& G, std::span<const i64> x);
void eval_Q_into(const MultiIndexSet& G, std::span<const i64> x, std::span<i64> out);

// Q(x) for a real point (used by quadratures; no overflow concern).
std::vector<double> eval_Q_real(const MultiIndexSet& G, std::span<const double> x);

// -----------------------------------------------------------------------------
// PolynomialMap: P_j(x) = sum_gamma c_{j,gamma} x^gamma, no constant terms.
// -----------------------------------------------------------------------------
struct PolyTerm {
    int j;                   // output coordinate, 0-based
    std::vector<int> gamma;  // exponent vector, nonzero
    i64 c;
};

struct PolynomialMap {
    int k = 0;
    int d0 = 0;
    int degree = 0;
    std::vector<PolyTerm> terms;

    std::vector<i64> eval(std::span<const i64> x) const;  // exact; overflow-guarded
};

// Constructor with validation (constant term -> error; degree from terms).
PolynomialMap make_polynomial(int k, int d0, std::vector<PolyTerm> terms);

struct Lift {
    MultiIndexSet G;
    std::vector<std::vector<i64>> L;  // d0 x d integer matrix
};

// P = L o Q; the identity is re-checked on 100 random integer points in
// [-10,10]^k with exact arithmetic before returning.
Lift lift_polynomial(const PolynomialMap& P);

// The identity lift on Z^d (L = I), for working with Q directly.
Lift identity_lift(const MultiIndexSet& G);

// Apply L to an image vector.
std::vector<i64> apply_lift(const Lift& lift, std::span<const i64> image);

// -----------------------------------------------------------------------------
// ConvexBody
// -----------------------------------------------------------------------------
struct ConvexBody {
    enum class Kind { cube, ball, custom };
    Kind kind = Kind::cube;
    int k = 1;
    double iota = 1.0;
    double volume = 2.0;            // |B|
    double orthant_volume = 1.0;    // |B intersect R_+^k|; the normalizer the
                                    // discrete sums actually approach
    double volume_stderr = 0.0;     // 0 for closed forms
    std::function<bool(std::span<const double>)> pred;  // membership in B

    bool contains(std::span<const double> x) const;
    // x / lambda in B
    bool contains_scaled(std::span<const i64> x, double lambda) const;

    static ConvexBody cube(int k);
    static ConvexBody euclidean_ball(int k);
    // volume < 0 requests a Monte-Carlo estimate (deterministic internal seed,
    // reported standard error).
    static ConvexBody custom(int k, std::function<bool(std::span<const double>)> pred,
                             double iota, double volume = -1.0, double mc_samples = 2e5);
};

// eq-151-style sanity: corners of the iota-cube lie in B and membership never
// escapes [-1,1]^k on a sample grid.  Returns false with a message on failure.
bool check_body_inclusions(const ConvexBody& B, std::string* msg = nullptr);

// -----------------------------------------------------------------------------
// Orbits
// -----------------------------------------------------------------------------
struct OrbitStructure {
    int kprime = 0;      // leading integer axes
    int kpp = 0;         // trailing prime axes
    bool with_sign = false;

    int k() const { return kprime + kpp; }
};

struct WeightedOrbit {
    i64 N = 0;
    OrbitStructure st;
    MultiIndexSet G;
    std::size_t npoints = 0;
    std::vector<i64> coords;   // npoints * k, point-major
    std::vector<double> weights;
    std::vector<i64> images;   // npoints * d, point-major
    double vartheta = 0.0;     // pairwise sum of weights
    // views
    std::span<const i64> point(std::size_t i) const {
        return {coords.data() + i * static_cast<std::size_t>(st.k()),
                static_cast<std::size_t>(st.k())};
    }
    std::span<const i64> image(std::size_t i) const {
        return {images.data() + i * static_cast<std::size_t>(G.d),
                static_cast<std::size_t>(G.d)};
    }
};

// Enumerates B_N in deterministic order (ascending per axis, leading axis
// outermost), internally parallel over the leading axis with an ordered
// merge.  Errors if the point count exceeds cap.
WeightedOrbit enumerate_orbit(const ConvexBody& B, i64 N, const OrbitStructure& st,
                              const MultiIndexSet& G, const PrimeTable& primes,
                              std::size_t cap = 50'000'000);

struct Counting {
    i64 pi = 0;          // pi_B(N)
    double vartheta = 0; // vartheta_B(N)
};

// Same loops as enumerate_orbit but without storing points.
Counting counting(const ConvexBody& B, i64 N, const OrbitStructure& st,
                  const PrimeTable& primes);

}  // namespace rvl
