// util.hpp — numeric helpers, deterministic RNG stream, parallel loop

#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <mutex>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace hofring {

inline constexpr double two_pi = 6.283185307179586476925286766559;

// Principal branch (-pi, pi]
inline double wrap_to_pi(double a) {
    a = std::remainder(a, two_pi);
    if (a <= -two_pi / 2.0) a += two_pi;
    return a;
}

// Canonical [0, 2pi)
inline double wrap_to_2pi(double a) {
    a -= two_pi * std::floor(a / two_pi);
    if (a >= two_pi) a -= two_pi;
    return a;
}

inline std::vector<double> linspace(double lo, double hi, std::size_t n) {
    if (n == 0) return {};
    if (n == 1) return {lo};
    std::vector<double> grid(n);
    const double step = (hi - lo) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) grid[i] = lo + step * static_cast<double>(i);
    grid.back() = hi;
    return grid;
}

inline long long gcd_ll(long long a, long long b) {
    while (b != 0) {
        const long long t = a % b;
        a = b;
        b = t;
    }
    return a < 0 ? -a : a;
}

// Deterministic standard-normal stream. mt19937_64 output words are mapped to
// (0,1] and fed through Box-Muller; std::normal_distribution is avoided because
// its draw sequence is not pinned by the standard. Identical seed gives an
// identical sequence on a given platform.
class GaussianStream {
public:
    explicit GaussianStream(std::uint64_t seed) : rng_(seed) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = next_unit();
        const double u2 = next_unit();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(two_pi * u2);
        have_spare_ = true;
        return r * std::cos(two_pi * u2);
    }

private:
    // strictly positive uniform in (0, 1]
    double next_unit() { return (static_cast<double>(rng_() >> 11) + 1.0) * 0x1p-53; }

    std::mt19937_64 rng_;
    double spare_{0.0};
    bool have_spare_{false};
};

// Static-chunk parallel loop. Each index is visited exactly once, so writers
// to per-index slots stay deterministic regardless of the thread count.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& body) {
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    const std::size_t nthreads = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    std::exception_ptr first_error;
    std::mutex error_mutex;
    for (std::size_t t = 0; t < nthreads; ++t) {
        pool.emplace_back([&, t]() {
            const std::size_t lo = n * t / nthreads;
            const std::size_t hi = n * (t + 1) / nthreads;
            try {
                for (std::size_t i = lo; i < hi; ++i) body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

inline int default_thread_count() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Shortest round-trip formatting for CSV output.
inline std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace hofring
