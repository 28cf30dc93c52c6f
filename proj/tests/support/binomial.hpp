#pragma once

#include <cmath>
#include <cstddef>
#include <utility>

namespace octgate::testing {

/// Central acceptance interval [lo, hi] for the count of a Binomial(n, p):
/// the largest lo with P(X < lo) <= alpha / 2 and the smallest hi with
/// P(X > hi) <= alpha / 2, computed from the exact pmf.
inline std::pair<std::size_t, std::size_t> binomial_interval(std::size_t n, double p, double confidence) {
    const double tail = (1.0 - confidence) / 2.0;
    auto log_pmf = [&](std::size_t k) {
        return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) + k * std::log(p) +
               (n - k) * std::log1p(-p);
    };
    std::size_t lo = 0;
    double below = 0.0;
    while (lo < n && below + std::exp(log_pmf(lo)) <= tail) below += std::exp(log_pmf(lo++));
    std::size_t hi = n;
    double above = 0.0;
    while (hi > 0 && above + std::exp(log_pmf(hi)) <= tail) above += std::exp(log_pmf(hi--));
    return {lo, hi};
}

}  // namespace octgate::testing
