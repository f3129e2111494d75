// =============================================================================
// Averaging and singular operators on the model shift system Z^{d0}.
//
// For a finitely supported f : Z^{d0} -> C and the weighted orbit of B_N,
//
//   M_N f(x)  =  (1/vartheta_B(N)) sum_{(n,p) in B_N} f(x - LQ(n,p)) prod log p_j
//   A_N f(x)  =  (1/pi_B(N))       sum_{(n,p) in B_N} f(x - LQ(n,p))
//   H_N f(x)  =  sum_{(n,p) in B_N, signed} f(x - LQ(n,p)) K(n,p) prod log|p_j|
//
// with K a Calderon-Zygmund kernel: |x|^k |K(x)| + |x|^{k+1} |grad K(x)| <= 1
// and vanishing shell integrals.  The built-in kernel
//
//   K(x) = x_1 / ((k+1) ||x||^{k+1})
//
// is odd and homogeneous of degree -k; with u = x/||x|| the size expression is
// |u_1| + sqrt(1 + (k^2-1) u_1^2), increasing in |u_1| with maximum k+1 at the
// poles, so the 1/(k+1) normalization makes the differential bound exactly 1.
// Oddness plus an origin-symmetric body makes every shell integral vanish.
//
// The telescoping diagnostics bound the l^1 mass of sum_n |kappa_{n+1} -
// kappa_n| over convolution kernels kappa_n of M_n (or H_n): a point that is
// inside B_{N1} contributes w(z) (1/vartheta(N1) - 1/vartheta(N2)) exactly,
// a point entering at scale n0 contributes w(z) (2/vartheta(n0) -
// 1/vartheta(N2)), and the singular kernels only change on the shell, giving
// sum_{B_{N2} \ B_{N1}} |K| w.  All are ~ N1^{-k} (vartheta(N2)-vartheta(N1)).
// =============================================================================
#pragma once

#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "rvl/lattice.hpp"
#include "rvl/numtheory.hpp"
#include "rvl/util.hpp"

namespace rvl {

// -----------------------------------------------------------------------------
// SparseFunction
// -----------------------------------------------------------------------------
struct SparseFunction {
    int d0 = 1;
    std::map<std::vector<i64>, cplx> a;  // sorted keys give deterministic order

    static SparseFunction delta(int d0);
    static SparseFunction delta_at(std::vector<i64> x, cplx v = 1.0);

    void add(std::span<const i64> x, cplx v);  // accumulate, keep exact zeros out later
    void prune_zeros();
    std::size_t support_size() const { return a.size(); }
};

double lp_norm(const SparseFunction& f, double p);  // p >= 1; p = INFINITY for sup
cplx mass(const SparseFunction& f);
SparseFunction translate(const SparseFunction& f, std::span<const i64> v);
SparseFunction axpy(cplx alpha, const SparseFunction& f, cplx beta, const SparseFunction& g);
double max_abs_diff(const SparseFunction& f, const SparseFunction& g);

void write_sparse_csv(const SparseFunction& f, const std::string& path);
SparseFunction read_sparse_csv(const std::string& path);
void write_sparse_bin(const SparseFunction& f, const std::string& path);
SparseFunction read_sparse_bin(const std::string& path);

// -----------------------------------------------------------------------------
// Calderon-Zygmund kernels
// -----------------------------------------------------------------------------
struct CZKernel {
    int k = 1;
    std::function<double(std::span<const double>)> evaluate;
    std::function<std::vector<double>(std::span<const double>)> gradient;
    double normalization = 1.0;
};

CZKernel make_cz_kernel(int k);  // K(x) = x_1 / ((k+1) ||x||^{k+1})

// Monte-Carlo integral of K over B_{lam_out} \ B_{lam_in}; stderr_out gets the
// statistical error estimate so callers can test "zero within tolerance".
double shell_integral(const CZKernel& kern, const ConvexBody& B, double lam_out,
                      double lam_in, std::size_t nsamples, std::uint64_t seed,
                      double* stderr_out = nullptr);

// size bound on random points ||x|| >= 1 plus vanishing shell integrals
bool validate_kernel(const CZKernel& kern, const ConvexBody& B, std::string* why = nullptr);

// -----------------------------------------------------------------------------
// Operators
// -----------------------------------------------------------------------------
SparseFunction apply_average(const SparseFunction& f, const WeightedOrbit& orbit,
                             const Lift& lift, bool weighted);

SparseFunction apply_singular(const SparseFunction& f, const CZKernel& kern,
                              const WeightedOrbit& orbit, const Lift& lift);

struct WeightedUnweightedRow {
    i64 N = 0;
    double diff_norm = 0;  // ||M_N f - A_N f||_{l^p}
    double c_N = 0;        // diff_norm * log N
    bool skipped = false;  // pi_B(N) = 0
};
struct WeightedUnweightedTable {
    std::vector<WeightedUnweightedRow> rows;
    double C_fit = 0;  // max over rows of c_N
    bool stable = false;
};
WeightedUnweightedTable compare_weighted_unweighted(const SparseFunction& f,
                                                    const ConvexBody& B,
                                                    const OrbitStructure& st,
                                                    const Lift& lift,
                                                    const PrimeTable& primes,
                                                    std::span<const i64> Nlist, double p);

enum class TelescopingKind { average, singular };
struct TelescopingSetup {
    ConvexBody B;
    OrbitStructure st;
    Lift lift;
    const PrimeTable* primes = nullptr;
    CZKernel kernel;  // singular kind only
};
struct TelescopingResult {
    double lhs = 0;        // || sum_n |kappa_{n+1} - kappa_n| ||_{l^1}
    double rhs_bound = 0;  // C N1^{-k} (vartheta(N2) - vartheta(N1)), frozen C
    double raw_factor = 0; // N1^{-k} (vartheta(N2) - vartheta(N1))
    bool pointwise_ok = true;  // closed-form identity on fibers inside B_{N1}
};
TelescopingResult telescoping_l1(TelescopingKind kind, i64 N1, i64 N2,
                                 const TelescopingSetup& setup);

}  // namespace rvl
