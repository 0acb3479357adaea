#pragma once

#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace waist {

/// Runs fn(chunk_index) for chunk_index in [0, chunks) on up to `width`
/// threads. Work is identified by chunk index, never by worker identity, so
/// callers that write per-chunk results and reduce them in index order get
/// bit-identical output at every width.
template <typename Fn>
inline void run_chunks(std::size_t chunks, int width, const Fn& fn) {
    if (width <= 1 || chunks <= 1) {
        for (std::size_t c = 0; c < chunks; ++c) fn(c);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t c = next.fetch_add(1);
            if (c >= chunks) return;
            fn(c);
        }
    };
    std::vector<std::thread> pool;
    const std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(width), chunks);
    pool.reserve(n);
    for (std::size_t i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
}

}  // namespace waist
