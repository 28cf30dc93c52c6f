#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace octgate {

/// Dense float32 tensor, row-major.
struct Tensor {
    std::vector<std::int64_t> shape;
    std::vector<float> data;

    Tensor() = default;
    Tensor(std::vector<std::int64_t> shape_, std::vector<float> data_);
    explicit Tensor(std::vector<std::int64_t> shape_);

    std::int64_t numel() const;
    std::size_t rank() const noexcept { return shape.size(); }
};

/// Minimal CPU interpreter for exported inference graphs in the ONNX format.
///
/// Covers the float32 operator subset that convolutional backbones such as
/// EfficientNet-B0 and small 1D U-Nets export to: Conv, BatchNormalization,
/// pooling, activations (Relu, Sigmoid, Tanh, Clip, HardSigmoid, HardSwish,
/// LeakyRelu, Softmax), broadcasting arithmetic, Gemm/MatMul and the usual
/// shape plumbing (Flatten, Reshape, Squeeze, Unsqueeze, Concat, Transpose).
/// Weights stored as external data are not supported.
///
/// A loaded model is immutable; run() keeps all intermediate state local and
/// may be called from several threads at once.
class OnnxModel {
public:
    static OnnxModel load(const std::string& path);
    static OnnxModel from_bytes(std::string_view bytes);

    OnnxModel(OnnxModel&&) noexcept;
    OnnxModel& operator=(OnnxModel&&) noexcept;
    ~OnnxModel();

    /// Graph inputs that are not initializers, in declaration order.
    const std::vector<std::string>& input_names() const;
    /// Declared shape of an input; dynamic dims are reported as -1.
    std::vector<std::int64_t> input_shape(const std::string& name) const;
    const std::vector<std::string>& output_names() const;
    /// Every value produced by a node, in execution order. These are the
    /// valid tap points.
    const std::vector<std::string>& value_names() const;
    bool has_value(const std::string& name) const;

    /// FNV-1a digest of the serialized model bytes.
    const std::string& content_digest() const;

    /// Evaluate the graph on one input and return the requested values.
    /// Execution stops as soon as every requested value is available.
    std::map<std::string, Tensor> run(const std::string& input_name, const Tensor& input,
                                      std::span<const std::string> requested) const;

private:
    struct Impl;
    explicit OnnxModel(std::unique_ptr<Impl> impl);
    std::unique_ptr<Impl> impl_;
};

}  // namespace octgate
