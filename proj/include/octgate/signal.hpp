#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace octgate {

/// Sampled Gaussian exp(-x^2 / 2 sigma^2) at integer offsets within
/// +-ceil(truncate * sigma), normalized to unit sum.
std::vector<double> gaussian_kernel(double sigma, double truncate = 4.0);

/// 1D convolution of `signal` with an odd-length symmetric `kernel`,
/// replicating the edge samples.
std::vector<double> convolve_clamped(std::span<const double> signal, std::span<const double> kernel);
std::vector<double> convolve_clamped(std::span<const float> signal, std::span<const double> kernel);

}  // namespace octgate
