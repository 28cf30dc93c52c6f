#include "octgate/signal.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace octgate {

std::vector<double> gaussian_kernel(double sigma, double truncate) {
    if (!(sigma > 0.0)) throw std::invalid_argument("gaussian_kernel: sigma must be > 0");
    const auto radius = static_cast<std::ptrdiff_t>(std::ceil(truncate * sigma));
    std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
    double sum = 0.0;
    for (std::ptrdiff_t x = -radius; x <= radius; ++x) {
        const double v = std::exp(-0.5 * static_cast<double>(x * x) / (sigma * sigma));
        k[static_cast<std::size_t>(x + radius)] = v;
        sum += v;
    }
    for (double& v : k) v /= sum;
    return k;
}

namespace {
template <typename T>
std::vector<double> convolve_impl(std::span<const T> signal, std::span<const double> kernel) {
    if (kernel.size() % 2 == 0) throw std::invalid_argument("convolve_clamped: kernel length must be odd");
    const auto n = static_cast<std::ptrdiff_t>(signal.size());
    const auto radius = static_cast<std::ptrdiff_t>(kernel.size() / 2);
    std::vector<double> out(signal.size(), 0.0);
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::ptrdiff_t t = -radius; t <= radius; ++t) {
            const std::ptrdiff_t j = std::clamp<std::ptrdiff_t>(i + t, 0, n - 1);
            acc += kernel[static_cast<std::size_t>(t + radius)] * static_cast<double>(signal[static_cast<std::size_t>(j)]);
        }
        out[static_cast<std::size_t>(i)] = acc;
    }
    return out;
}
}  // namespace

std::vector<double> convolve_clamped(std::span<const double> signal, std::span<const double> kernel) {
    return convolve_impl(signal, kernel);
}

std::vector<double> convolve_clamped(std::span<const float> signal, std::span<const double> kernel) {
    return convolve_impl(signal, kernel);
}

}  // namespace octgate
