#include "auditshare/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace auditshare {

void parallel_for(size_t n, const std::function<void(size_t)>& fn) {
    size_t hw = std::thread::hardware_concurrency();
    if (hw < 2 || n < 256) {
        for (size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    size_t workers = std::min(hw, (n + 255) / 256);
    std::atomic<size_t> next{0};
    std::exception_ptr first_error;
    std::mutex err_mu;
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (size_t w = 0; w < workers; ++w) {
        threads.emplace_back([&] {
            constexpr size_t kChunk = 64;
            for (;;) {
                size_t start = next.fetch_add(kChunk);
                if (start >= n) return;
                size_t end = std::min(n, start + kChunk);
                try {
                    for (size_t i = start; i < end; ++i) fn(i);
                } catch (...) {
                    std::lock_guard lk(err_mu);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : threads) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace auditshare
