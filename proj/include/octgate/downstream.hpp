#pragma once

#include "octgate/scan.hpp"

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace octgate {

class OnnxModel;

/// Per-location ILM probability for one A-scan. Values lie in [0, 1] and
/// need not sum to one.
struct Heatmap {
    std::vector<double> probs;
};

struct IlmEstimate {
    std::size_t index = 0;        // pixel depth
    double distance_um = 0.0;     // index * resolution
    double confidence = 0.0;      // max heatmap value
};

/// The retinal detection model: A-scan in, heatmap out.
class HeatmapEstimator {
public:
    virtual ~HeatmapEstimator() = default;
    virtual Heatmap heatmap(std::span<const float> ascan) const = 0;
    virtual std::string name() const = 0;
};

struct ReferenceEstimatorConfig {
    double smoothing_sigma = 3.0;   // px
    /// Added to the max rectified gradient before normalizing, so the peak
    /// value grows with edge strength instead of always being 1. Zero gives
    /// plain max normalization.
    double edge_softness = 4.0;
};

/// Deterministic matched-filter stand-in for a trained network: Gaussian
/// depth smoothing, forward-difference gradient, half-wave rectification
/// (rising edges only) and normalization by the strongest edge. An A-scan
/// without rising edges yields an all-zero heatmap.
Heatmap reference_heatmap(std::span<const float> ascan, const ReferenceEstimatorConfig& config = {});

class ReferenceEstimator final : public HeatmapEstimator {
public:
    explicit ReferenceEstimator(ReferenceEstimatorConfig config = {}) : config_(config) {}
    Heatmap heatmap(std::span<const float> ascan) const override { return reference_heatmap(ascan, config_); }
    std::string name() const override { return "reference"; }
    const ReferenceEstimatorConfig& config() const { return config_; }

private:
    ReferenceEstimatorConfig config_;
};

/// Heatmap network loaded from an ONNX file. The graph input must be
/// [1, 1, P] or [1, P]; the first graph output must hold P values, which are
/// clamped to [0, 1].
class ExportedHeatmapEstimator final : public HeatmapEstimator {
public:
    explicit ExportedHeatmapEstimator(const std::string& model_path);
    ~ExportedHeatmapEstimator() override;
    Heatmap heatmap(std::span<const float> ascan) const override;
    std::string name() const override { return "exported"; }

private:
    std::shared_ptr<const OnnxModel> model_;
    std::string input_;
    std::string output_;
};

Heatmap exported_heatmap(std::span<const float> ascan, const std::string& model_path);

/// Argmax localization; ties go to the smallest index.
IlmEstimate ilm_from_heatmap(const Heatmap& heatmap, double resolution_um = kDepthResolutionUm);

/// ILM index for every A-scan of an M-scan.
std::vector<double> estimate_ilm(const MScan& mscan, const HeatmapEstimator& estimator);

/// Mean absolute error in pixels over entries with mask == true. Returns
/// nullopt when no entry is retained.
std::optional<double> mae(std::span<const double> estimates, std::span<const double> truths,
                          const std::vector<bool>& mask);
std::optional<double> mae(std::span<const double> estimates, std::span<const double> truths);

inline double px_to_um(double px, double resolution_um = kDepthResolutionUm) { return px * resolution_um; }

}  // namespace octgate
