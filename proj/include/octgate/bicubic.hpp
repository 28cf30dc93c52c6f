#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>

namespace octgate {

inline constexpr double kCatmullRomA = -0.5;

/// Keys cubic convolution kernel with parameter a.
inline double cubic_kernel(double x, double a = kCatmullRomA) {
    x = std::abs(x);
    if (x <= 1.0) return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
    if (x < 2.0) return (((x - 5.0) * x + 8.0) * x - 4.0) * a;
    return 0.0;
}

/// Four-tap weights and clamped source indices for sampling position `x`.
struct CubicTaps {
    std::array<std::ptrdiff_t, 4> index;
    std::array<double, 4> weight;
};

inline CubicTaps cubic_taps(double x, std::ptrdiff_t n) {
    const double base = std::floor(x);
    const double t = x - base;
    const auto b = static_cast<std::ptrdiff_t>(base);
    CubicTaps taps{};
    for (int k = 0; k < 4; ++k) {
        std::ptrdiff_t idx = b - 1 + k;
        if (idx < 0) idx = 0;
        if (idx > n - 1) idx = n - 1;
        taps.index[k] = idx;
        taps.weight[k] = cubic_kernel(t - static_cast<double>(k - 1));
    }
    return taps;
}

/// Edge-clamped cubic sample of a 1D signal at fractional position `x`.
template <typename T>
double cubic_sample(std::span<const T> signal, double x) {
    const auto taps = cubic_taps(x, static_cast<std::ptrdiff_t>(signal.size()));
    double acc = 0.0;
    for (int k = 0; k < 4; ++k) acc += taps.weight[k] * static_cast<double>(signal[taps.index[k]]);
    return acc;
}

}  // namespace octgate
