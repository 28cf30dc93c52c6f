#pragma once

#include <string>
#include <vector>

namespace octgate::testing {

/// Tiny backbone over a [1, 3, 64, 224] input with two tap points:
/// "stem" (32 channels, stride 2) and "block" (96 channels, stride 4).
/// Weights are fixed pseudo-random values.
void write_backbone_fixture(const std::string& path);

struct BackboneWeights {
    std::vector<float> w1, b1;   // [32, 3, 3, 3], [32]
    std::vector<float> w2, b2;   // [96, 32, 3, 3], [96]
};

BackboneWeights backbone_weights();

inline constexpr const char* kBackboneTapA = "stem";
inline constexpr const char* kBackboneTapB = "block";

/// Heatmap graph [1, 1, P] -> [1, 1, P] that returns its input.
void write_identity_heatmap_fixture(const std::string& path);

/// Scratch path under the system temp directory, unique per process.
std::string temp_path(const std::string& name);

}  // namespace octgate::testing
