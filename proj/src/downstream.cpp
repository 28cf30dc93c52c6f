#include "octgate/downstream.hpp"

#include "octgate/errors.hpp"
#include "octgate/onnx_model.hpp"
#include "octgate/signal.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace octgate {

Heatmap reference_heatmap(std::span<const float> ascan, const ReferenceEstimatorConfig& config) {
    Heatmap h;
    h.probs.assign(ascan.size(), 0.0);
    if (ascan.size() < 2) return h;
    const auto kernel = gaussian_kernel(config.smoothing_sigma);
    const auto smooth = convolve_clamped(ascan, kernel);

    double peak = 0.0;
    for (std::size_t i = 0; i + 1 < smooth.size(); ++i) {
        const double g = std::max(0.0, smooth[i + 1] - smooth[i]);
        h.probs[i] = g;
        peak = std::max(peak, g);
    }
    if (!(peak > 0.0)) {
        std::fill(h.probs.begin(), h.probs.end(), 0.0);
        return h;
    }
    const double denom = peak + config.edge_softness;
    for (double& p : h.probs) p /= denom;
    return h;
}

ExportedHeatmapEstimator::ExportedHeatmapEstimator(const std::string& model_path)
    : model_(std::make_shared<const OnnxModel>(OnnxModel::load(model_path))) {
    if (model_->input_names().empty() || model_->output_names().empty())
        throw GraphError("heatmap model needs one input and one output");
    input_ = model_->input_names().front();
    output_ = model_->output_names().front();
    const auto shape = model_->input_shape(input_);
    if (shape.size() != 2 && shape.size() != 3)
        throw GraphError("heatmap model input must be [1, P] or [1, 1, P]");
}

ExportedHeatmapEstimator::~ExportedHeatmapEstimator() = default;

Heatmap ExportedHeatmapEstimator::heatmap(std::span<const float> ascan) const {
    const auto declared = model_->input_shape(input_);
    const auto p = static_cast<std::int64_t>(ascan.size());
    if (declared.back() > 0 && declared.back() != p)
        throw GraphError("heatmap model expects depth " + std::to_string(declared.back()) + ", got " +
                         std::to_string(p));
    std::vector<std::int64_t> shape = declared.size() == 3 ? std::vector<std::int64_t>{1, 1, p}
                                                           : std::vector<std::int64_t>{1, p};
    const Tensor input(shape, std::vector<float>(ascan.begin(), ascan.end()));
    const std::string requested[] = {output_};
    const auto out = model_->run(input_, input, requested).at(output_);
    if (out.numel() != p)
        throw GraphError("heatmap model produced " + std::to_string(out.numel()) + " values for depth " +
                         std::to_string(p));
    Heatmap h;
    h.probs.reserve(ascan.size());
    for (float v : out.data) {
        if (!std::isfinite(v)) throw GraphError("heatmap model produced a non-finite value");
        h.probs.push_back(std::clamp(static_cast<double>(v), 0.0, 1.0));
    }
    return h;
}

Heatmap exported_heatmap(std::span<const float> ascan, const std::string& model_path) {
    return ExportedHeatmapEstimator(model_path).heatmap(ascan);
}

IlmEstimate ilm_from_heatmap(const Heatmap& heatmap, double resolution_um) {
    IlmEstimate e;
    if (heatmap.probs.empty()) return e;
    // max_element returns the first maximum
    const auto it = std::max_element(heatmap.probs.begin(), heatmap.probs.end());
    e.index = static_cast<std::size_t>(it - heatmap.probs.begin());
    e.confidence = *it;
    e.distance_um = static_cast<double>(e.index) * resolution_um;
    return e;
}

std::vector<double> estimate_ilm(const MScan& mscan, const HeatmapEstimator& estimator) {
    std::vector<double> out;
    out.reserve(mscan.width());
    for (std::size_t j = 0; j < mscan.width(); ++j)
        out.push_back(static_cast<double>(ilm_from_heatmap(estimator.heatmap(mscan.ascan(j))).index));
    return out;
}

std::optional<double> mae(std::span<const double> estimates, std::span<const double> truths,
                          const std::vector<bool>& mask) {
    if (estimates.size() != truths.size() || estimates.size() != mask.size())
        throw std::invalid_argument("mae: length mismatch (" + std::to_string(estimates.size()) + ", " +
                                    std::to_string(truths.size()) + ", " + std::to_string(mask.size()) + ")");
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t k = 0; k < estimates.size(); ++k) {
        if (!mask[k] || !std::isfinite(truths[k])) continue;
        sum += std::abs(estimates[k] - truths[k]);
        ++count;
    }
    if (count == 0) return std::nullopt;
    return sum / static_cast<double>(count);
}

std::optional<double> mae(std::span<const double> estimates, std::span<const double> truths) {
    return mae(estimates, truths, std::vector<bool>(estimates.size(), true));
}

}  // namespace octgate
