// SPDX-License-Identifier: Apache-2.0
#include "bhfr/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace bhfr {
namespace {
std::atomic<unsigned> g_default_threads{0};
thread_local bool t_in_worker = false;

struct WorkerScope {
    bool saved;
    WorkerScope() : saved(t_in_worker) { t_in_worker = true; }
    ~WorkerScope() { t_in_worker = saved; }
};
}

void set_default_threads(unsigned threads) { g_default_threads.store(threads); }

unsigned default_threads() {
    const unsigned t = g_default_threads.load();
    if (t != 0) return t;
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body, unsigned threads) {
    if (n == 0) return;
    if (threads == 0) threads = default_threads();
    // Nested regions run inline on the calling worker.
    const std::size_t workers = t_in_worker ? 1 : std::min<std::size_t>(threads, n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto run = [&] {
        WorkerScope scope;
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(run);
    run();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace bhfr
