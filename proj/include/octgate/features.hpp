#pragma once

#include "octgate/scan.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace octgate {

class OnnxModel;

/// K pooled feature vectors for one M-scan, one per extractor scale.
struct FeatureSet {
    std::vector<Eigen::VectorXd> vectors;

    std::size_t scales() const noexcept { return vectors.size(); }
    std::vector<std::size_t> dims() const;
    bool all_finite() const;
    /// All scales stacked into one vector (scale 0 first).
    Eigen::VectorXd concatenated() const;
};

enum class ExtractorKind { builtin_pyramid, exported_network };

std::string_view to_string(ExtractorKind kind);
ExtractorKind extractor_kind_from_string(std::string_view name);

/// Identifies the exact extractor configuration a detector was fitted with.
struct ExtractorDescriptor {
    ExtractorKind kind = ExtractorKind::builtin_pyramid;
    int scales = 4;                         // K
    std::vector<std::size_t> dims;          // per-scale dimensionality
    std::string config_digest;              // stable across runs
    std::string model_path;                 // exported_network only
    std::vector<std::string> tap_points;    // exported_network only
    std::string input_name;                 // exported_network only; empty = first graph input
};

class FeatureExtractor {
public:
    virtual ~FeatureExtractor() = default;
    virtual FeatureSet extract(const PreppedImage& image) const = 0;
    virtual const ExtractorDescriptor& descriptor() const = 0;
};

// --- builtin pyramid ----------------------------------------------------------
//
// Level 0 is the channel mean of the input image; every further level is the
// previous one smoothed by the 3x3 binomial kernel (replicated borders) and
// decimated by two in both axes. Each level contributes six pooled statistics.

inline constexpr int kDefaultPyramidLevels = 4;
inline constexpr std::size_t kLevelFeatureCount = 6;

std::vector<Grid> builtin_pyramid_levels(const PreppedImage& image, int levels);

/// 3x3 binomial smoothing followed by keeping every second row and column
/// (starting at 0).
Grid smooth_and_decimate(const Grid& level);

/// (mean, std, mean |dx|, mean |dy|, mean |laplacian|, mean |x - box3x3(x)|).
///
/// dx/dy are forward differences along columns/rows over the positions where
/// they exist. The 5-point Laplacian and the 3x3 box mean use replicated
/// borders and are averaged over every pixel. std is the population std.
Eigen::VectorXd builtin_level_features(const Grid& level);

class BuiltinPyramidExtractor final : public FeatureExtractor {
public:
    explicit BuiltinPyramidExtractor(int levels = kDefaultPyramidLevels);
    FeatureSet extract(const PreppedImage& image) const override;
    const ExtractorDescriptor& descriptor() const override { return descriptor_; }

private:
    ExtractorDescriptor descriptor_;
};

// --- exported network -----------------------------------------------------------

/// Runs an exported ONNX graph and average-pools each tapped intermediate
/// output over its spatial axes. The graph interpreter holds no per-call
/// state, so extract() is safe to call concurrently without a lock.
///
/// When the graph input has a static shape the per-tap dims are resolved at
/// construction with a zero probe input; otherwise descriptor().dims stays
/// empty until a detector is fitted.
class ExportedNetworkExtractor final : public FeatureExtractor {
public:
    ExportedNetworkExtractor(std::string model_path, std::vector<std::string> tap_points,
                             std::string input_name = {});
    ~ExportedNetworkExtractor() override;

    FeatureSet extract(const PreppedImage& image) const override;
    const ExtractorDescriptor& descriptor() const override { return descriptor_; }

private:
    std::shared_ptr<const OnnxModel> model_;
    ExtractorDescriptor descriptor_;
};

/// One-shot helper over ExportedNetworkExtractor.
FeatureSet exported_network_extract(const PreppedImage& image, const std::string& model_path,
                                    const std::vector<std::string>& tap_points);

/// Rebuild an extractor from a stored descriptor (builtin or exported).
std::unique_ptr<FeatureExtractor> make_extractor(const ExtractorDescriptor& descriptor);

/// 64-bit FNV-1a, rendered as 16 hex digits.
std::string fnv1a_hex(std::string_view bytes);

}  // namespace octgate
