#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace hetcop {

/// Number of worker threads used when a caller passes width 0.
inline unsigned default_threads() {
    unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : n;
}

/// Run fn(begin, end) over [0, n) split into contiguous chunks, one per
/// worker. The partition depends only on (n, width), and callers write to
/// disjoint output cells, so results do not depend on scheduling. Exceptions
/// from workers are rethrown on the calling thread.
template <typename Fn>
void parallel_for(std::size_t n, unsigned width, Fn&& fn) {
    if (width == 0) width = default_threads();
    width = static_cast<unsigned>(std::min<std::size_t>(width, std::max<std::size_t>(n, 1)));
    if (width <= 1 || n < 2) {
        fn(std::size_t{0}, n);
        return;
    }
    std::size_t chunk = (n + width - 1) / width;
    std::vector<std::thread> workers;
    std::vector<std::exception_ptr> errors(width);
    workers.reserve(width);
    for (unsigned w = 0; w < width; ++w) {
        std::size_t b = std::min<std::size_t>(w * chunk, n);
        std::size_t e = std::min<std::size_t>(b + chunk, n);
        if (b >= e) break;
        workers.emplace_back([&, b, e, w] {
            try {
                fn(b, e);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : workers) t.join();
    for (auto& err : errors)
        if (err) std::rethrow_exception(err);
}

}  // namespace hetcop
