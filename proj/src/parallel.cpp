#include "padr/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace padr {

namespace {

std::atomic<int> g_override{0};

int default_threads() {
    if (const char* env = std::getenv("PADR_THREADS")) {
        try {
            const int v = std::stoi(env);
            if (v >= 1) return v;
        } catch (const std::exception&) {
        }
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace

int thread_count() {
    const int o = g_override.load();
    if (o > 0) return o;
    static const int def = default_threads();
    return def;
}

void set_thread_count(int threads) { g_override.store(std::max(threads, 0)); }

void parallel_for(std::size_t begin, std::size_t end, std::size_t grain,
                  const std::function<void(std::size_t, std::size_t)>& fn) {
    if (end <= begin) return;
    const std::size_t count = end - begin;
    const auto workers = static_cast<std::size_t>(thread_count());
    if (workers <= 1 || count < std::max<std::size_t>(grain, 2)) {
        fn(begin, end);
        return;
    }
    const std::size_t chunks = std::min(workers, count / std::max<std::size_t>(grain / 2, 1));
    if (chunks <= 1) {
        fn(begin, end);
        return;
    }
    const std::size_t step = (count + chunks - 1) / chunks;
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(chunks);
    for (std::size_t c = 1; c < chunks; ++c) {
        const std::size_t lo = begin + c * step;
        const std::size_t hi = std::min(end, lo + step);
        if (lo >= hi) break;
        pool.emplace_back([&, c, lo, hi] {
            try {
                fn(lo, hi);
            } catch (...) {
                errors[c] = std::current_exception();
            }
        });
    }
    try {
        fn(begin, std::min(end, begin + step));
    } catch (...) {
        errors[0] = std::current_exception();
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace padr
