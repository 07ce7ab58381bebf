#include "lumen/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace lumen {

namespace {
std::atomic<std::size_t> g_thread_limit{0};
// Set inside workers so nested parallel_for calls run inline.
thread_local bool t_inside_worker = false;
}  // namespace

void set_thread_limit(std::size_t n) { g_thread_limit.store(n); }

std::size_t thread_limit() {
    std::size_t n = g_thread_limit.load();
    if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
    return n;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn) {
    if (n == 0) return;
    // Chunks below this size are not worth a thread.
    constexpr std::size_t kMinChunk = 8;
    const std::size_t workers = std::min(thread_limit(), (n + kMinChunk - 1) / kMinChunk);
    if (workers <= 1 || t_inside_worker) {
        fn(0, n);
        return;
    }
    const std::size_t chunk = (n + workers - 1) / workers;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto guarded = [&](std::size_t begin, std::size_t end) {
        t_inside_worker = true;
        try {
            fn(begin, end);
        } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
        }
        t_inside_worker = false;
    };
    std::vector<std::thread> threads;
    threads.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        threads.emplace_back(guarded, begin, end);
    }
    guarded(0, std::min(n, chunk));
    for (auto& t : threads) t.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace lumen
