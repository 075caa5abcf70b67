#pragma once

#include <atomic>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace qpj {

/// Data-parallel map into index-addressed slots: results are a pure function
/// of the index, so output is identical at any thread count.
template <typename T>
std::vector<T> parallel_map(std::size_t count, int threads, const std::function<T(std::size_t)>& fn) {
    std::vector<T> out(count);
    if (threads <= 1 || count < 2) {
        for (std::size_t i = 0; i < count; ++i) out[i] = fn(i);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
                if (failed.load()) return;
                try {
                    out[i] = fn(i);
                } catch (...) {
                    if (!failed.exchange(true)) error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
    return out;
}

/// Index-ascending pairwise tree sum; deterministic regardless of how the
/// values were produced.
inline double pairwise_tree_sum(const std::vector<double>& v, std::size_t lo, std::size_t hi) {
    if (hi - lo <= 8) {
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += v[i];
        return s;
    }
    std::size_t mid = lo + (hi - lo) / 2;
    return pairwise_tree_sum(v, lo, mid) + pairwise_tree_sum(v, mid, hi);
}

inline double pairwise_tree_sum(const std::vector<double>& v) {
    return v.empty() ? 0.0 : pairwise_tree_sum(v, 0, v.size());
}

}  // namespace qpj
