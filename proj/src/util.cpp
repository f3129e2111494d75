#include "rvl/util.hpp"

#include <atomic>
#include <chrono>
#include <thread>

namespace rvl {

// -----------------------------------------------------------------------------
// Pairwise summation: recursive halving down to a 32-element base case.
// The association tree depends only on the length.
// -----------------------------------------------------------------------------
namespace {

template <typename T>
T pairwise_impl(const T* x, std::size_t n) {
    if (n <= 32) {
        T acc{};
        for (std::size_t i = 0; i < n; ++i) acc += x[i];
        return acc;
    }
    std::size_t half = n / 2;
    return pairwise_impl(x, half) + pairwise_impl(x + half, n - half);
}

template <typename T, typename Gen>
T chunked_impl(std::size_t n, const Gen& term) {
    if (n == 0) return T{};
    std::size_t nchunks = (n + kSumChunk - 1) / kSumChunk;
    std::vector<T> slot(nchunks);
    for (std::size_t c = 0; c < nchunks; ++c) {
        std::size_t lo = c * kSumChunk;
        std::size_t hi = std::min(n, lo + kSumChunk);
        T acc{};
        for (std::size_t i = lo; i < hi; ++i) acc += term(i);
        slot[c] = acc;
    }
    return pairwise_impl(slot.data(), slot.size());
}

}  // namespace

double pairwise_sum(std::span<const double> xs) {
    return pairwise_impl(xs.data(), xs.size());
}

cplx pairwise_sum(std::span<const cplx> xs) {
    return pairwise_impl(xs.data(), xs.size());
}

double chunked_sum(std::size_t n, const std::function<double(std::size_t)>& term) {
    return chunked_impl<double>(n, term);
}

cplx chunked_sum_cplx(std::size_t n, const std::function<cplx(std::size_t)>& term) {
    return chunked_impl<cplx>(n, term);
}

// -----------------------------------------------------------------------------
// Thread control
// -----------------------------------------------------------------------------
namespace {
int g_threads = 0;  // 0 = uninitialized
}

void set_thread_count(int n) {
    if (n <= 0) n = static_cast<int>(std::thread::hardware_concurrency());
    if (n <= 0) n = 1;
    g_threads = n;
}

int thread_count() {
    if (g_threads == 0) set_thread_count(0);
    return g_threads;
}

void parallel_chunks(std::size_t nchunks, const std::function<void(std::size_t)>& fn) {
    int workers = thread_count();
    if (workers <= 1 || nchunks <= 1) {
        for (std::size_t c = 0; c < nchunks; ++c) fn(c);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto body = [&]() {
        for (;;) {
            std::size_t c = next.fetch_add(1);
            if (c >= nchunks) return;
            fn(c);
        }
    };
    std::size_t nspawn = std::min<std::size_t>(workers, nchunks);
    std::vector<std::thread> pool;
    pool.reserve(nspawn - 1);
    for (std::size_t t = 1; t < nspawn; ++t) pool.emplace_back(body);
    body();
    for (auto& th : pool) th.join();
}

double now_seconds() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

void fail(const std::string& msg) { throw std::runtime_error(msg); }

}  // namespace rvl
