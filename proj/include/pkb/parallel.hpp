#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace pkb {

/// Runs fn(i) for i in [0, count) across up to hardware_concurrency threads.
/// Each index is processed exactly once and results must be written to
/// disjoint slots, so the outcome is identical to the serial loop.
template <typename Fn>
void parallel_for(std::size_t count, Fn&& fn) {
    const std::size_t hw = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    const std::size_t n_threads = std::min(hw, count);
    if (n_threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> workers;
    workers.reserve(n_threads);
    std::vector<std::exception_ptr> errors(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) {
        workers.emplace_back([&, t]() {
            try {
                for (std::size_t i = t; i < count; i += n_threads) fn(i);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& w : workers) w.join();
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

}  // namespace pkb
