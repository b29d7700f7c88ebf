#pragma once

#include <algorithm>
#include <atomic>
#include <mutex>
#include <cstddef>
#include <thread>
#include <vector>

namespace lemni {

/// Global cap on worker threads (set from the CLI --threads flag).
/// 0 means "use hardware concurrency".
inline std::atomic<int>& thread_cap() {
    static std::atomic<int> cap{0};
    return cap;
}

inline int effective_threads(std::size_t n_items) {
    int cap = thread_cap().load();
    if (cap <= 0) cap = static_cast<int>(std::thread::hardware_concurrency());
    if (cap <= 0) cap = 1;
    return static_cast<int>(std::min<std::size_t>(cap, std::max<std::size_t>(n_items, 1)));
}

/// Runs fn(i) for i in [0, n). Work items must be independent; results should
/// be written into per-index slots so that any later reduction happens in
/// index order and the outcome does not depend on the thread count.
/// The first exception thrown by any item is rethrown on the caller's thread.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    const int workers = effective_threads(n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n || failed.load()) break;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                    failed.store(true);
                    break;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

} // namespace lemni
