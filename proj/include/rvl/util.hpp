// =============================================================================
// util.hpp
//
// Shared plumbing: deterministic summation, a tiny thread pool, seeded RNG
// helpers, wall-clock timing.
//
// Determinism contract: every reduction that may run on several threads is
// expressed as (1) a fixed partition of the index space into chunks, (2) a
// sequential sum within each chunk, (3) a pairwise merge of the ordered chunk
// results.  The chunk boundaries depend only on the problem size, never on
// the thread count, so results are bit-identical for any --threads value.
// =============================================================================

#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rvl {

using cplx = std::complex<double>;

// Chunk width for deterministic reductions.  Fixed; do not derive from the
// thread count.
inline constexpr std::size_t kSumChunk = 4096;

// -----------------------------------------------------------------------------
// Pairwise (tree) summation over an ordered array.  O(log n) rounding depth.
// -----------------------------------------------------------------------------
double pairwise_sum(std::span<const double> xs);
cplx pairwise_sum(std::span<const cplx> xs);

// Deterministic sum of n terms produced by a generator: terms are grouped into
// kSumChunk-wide chunks, each chunk is summed left to right, chunk results are
// merged pairwise.  Matches the parallel accumulators used elsewhere.
double chunked_sum(std::size_t n, const std::function<double(std::size_t)>& term);
cplx chunked_sum_cplx(std::size_t n, const std::function<cplx(std::size_t)>& term);

// -----------------------------------------------------------------------------
// Thread control.  A process-global worker count; 1 disables spawning.
// -----------------------------------------------------------------------------
void set_thread_count(int n);   // n <= 0 resets to hardware concurrency
int thread_count();

// Runs fn(chunk) for chunk = 0..nchunks-1 on up to thread_count() workers.
// fn must write only to per-chunk slots; no ordering between chunks is
// guaranteed, which is harmless exactly because of the determinism contract.
void parallel_chunks(std::size_t nchunks, const std::function<void(std::size_t)>& fn);

// -----------------------------------------------------------------------------
// Seeded RNG.  mt19937_64 with the usual 53-bit uniform; all experiment
// randomness flows through this type so a --seed pin reproduces runs exactly.
// -----------------------------------------------------------------------------
struct Rng {
    std::mt19937_64 eng;

    explicit Rng(std::uint64_t seed) : eng(seed) {}

    // uniform in [0,1)
    double uniform() {
        return static_cast<double>(eng() >> 11) * 0x1.0p-53;
    }
    // uniform in [lo, hi)
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    // uniform integer in [0, n)
    std::int64_t below(std::int64_t n) {
        return static_cast<std::int64_t>(eng() % static_cast<std::uint64_t>(n));
    }
    // uniform integer in [lo, hi] inclusive
    std::int64_t range(std::int64_t lo, std::int64_t hi) {
        return lo + below(hi - lo + 1);
    }
    cplx gaussian_pair() {
        // Box-Muller; only used to generate test data, not in any estimate
        double u1 = uniform(), u2 = uniform();
        while (u1 == 0.0) u1 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        return {r * std::cos(6.283185307179586477 * u2),
                r * std::sin(6.283185307179586477 * u2)};
    }
};

double now_seconds();

[[noreturn]] void fail(const std::string& msg);  // throws std::runtime_error

}  // namespace rvl
