#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace atw {

// Runs f(begin, end, worker) over [0, n) split into contiguous ranges, one
// per worker. Each range is fixed by n and workers alone.
template <class F>
void parallel_for(int workers, std::size_t n, F&& f)
{
    workers = std::max(1, workers);
    if (workers == 1 || n < 2 * std::size_t(workers)) {
        f(std::size_t(0), n, 0);
        return;
    }
    std::vector<std::thread> pool;
    const std::size_t chunk = (n + workers - 1) / workers;
    for (int t = 0; t < workers; ++t) {
        const std::size_t b = std::min(n, t * chunk), e = std::min(n, b + chunk);
        if (b >= e) break;
        pool.emplace_back([&f, b, e, t] { f(b, e, t); });
    }
    for (auto& th : pool) th.join();
}

// Sum of term(i) over [0, n) accumulated in fixed blocks, so the result does
// not depend on the worker count.
template <class F>
double parallel_sum(int workers, std::size_t n, F&& term)
{
    constexpr std::size_t block = 4096;
    const std::size_t nb = (n + block - 1) / block;
    std::vector<double> part(nb, 0.0);
    parallel_for(workers, nb, [&](std::size_t b0, std::size_t b1, int) {
        for (std::size_t b = b0; b < b1; ++b) {
            double s = 0;
            const std::size_t e = std::min(n, (b + 1) * block);
            for (std::size_t i = b * block; i < e; ++i) s += term(i);
            part[b] = s;
        }
    });
    double s = 0;
    for (double p : part) s += p;
    return s;
}

}  // namespace atw
