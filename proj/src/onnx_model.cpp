#include "octgate/onnx_model.hpp"

#include "octgate/errors.hpp"
#include "octgate/features.hpp"

#include "onnx.pb.h"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <iterator>
#include <limits>
#include <numeric>
#include <set>
#include <unordered_map>

namespace octgate {

// --- Tensor --------------------------------------------------------------------------

namespace {
std::int64_t shape_numel(const std::vector<std::int64_t>& shape) {
    std::int64_t n = 1;
    for (auto d : shape) n *= d;
    return n;
}

std::string shape_str(const std::vector<std::int64_t>& shape) {
    std::string s = "[";
    for (std::size_t k = 0; k < shape.size(); ++k) s += (k ? "," : "") + std::to_string(shape[k]);
    return s + "]";
}
}  // namespace

Tensor::Tensor(std::vector<std::int64_t> shape_, std::vector<float> data_)
    : shape(std::move(shape_)), data(std::move(data_)) {
    if (static_cast<std::int64_t>(data.size()) != shape_numel(shape))
        throw GraphError("tensor data size " + std::to_string(data.size()) + " does not match shape " +
                         shape_str(shape));
}

Tensor::Tensor(std::vector<std::int64_t> shape_)
    : shape(std::move(shape_)), data(static_cast<std::size_t>(shape_numel(shape)), 0.0f) {}

std::int64_t Tensor::numel() const { return shape_numel(shape); }

// --- model representation --------------------------------------------------------------

namespace {

using TensorPtr = std::shared_ptr<const Tensor>;

struct Node {
    std::string op;
    std::string name;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    std::unordered_map<std::string, onnx::AttributeProto> attrs;

    const onnx::AttributeProto* attr(const std::string& key) const {
        auto it = attrs.find(key);
        return it == attrs.end() ? nullptr : &it->second;
    }
    std::int64_t attr_int(const std::string& key, std::int64_t fallback) const {
        const auto* a = attr(key);
        return a ? a->i() : fallback;
    }
    float attr_float(const std::string& key, float fallback) const {
        const auto* a = attr(key);
        return a ? a->f() : fallback;
    }
    std::string attr_string(const std::string& key, const std::string& fallback) const {
        const auto* a = attr(key);
        return a ? a->s() : fallback;
    }
    std::vector<std::int64_t> attr_ints(const std::string& key) const {
        const auto* a = attr(key);
        if (!a) return {};
        return {a->ints().begin(), a->ints().end()};
    }
    std::string label() const { return op + (name.empty() ? "" : " \"" + name + "\""); }
};

template <typename T>
void read_le(const std::string& raw, std::vector<float>& out) {
    const std::size_t n = raw.size() / sizeof(T);
    out.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        T v;
        std::memcpy(&v, raw.data() + k * sizeof(T), sizeof(T));
        out[k] = static_cast<float>(v);
    }
}

Tensor tensor_from_proto(const onnx::TensorProto& tp) {
    if (tp.data_location() == onnx::TensorProto::EXTERNAL)
        throw GraphError("tensor \"" + tp.name() + "\" uses external data, which is not supported");
    std::vector<std::int64_t> shape(tp.dims().begin(), tp.dims().end());
    std::vector<float> data;
    const bool raw = tp.has_raw_data();
    switch (tp.data_type()) {
        case onnx::TensorProto::FLOAT:
            if (raw) read_le<float>(tp.raw_data(), data);
            else data.assign(tp.float_data().begin(), tp.float_data().end());
            break;
        case onnx::TensorProto::DOUBLE:
            if (raw) read_le<double>(tp.raw_data(), data);
            else for (double v : tp.double_data()) data.push_back(static_cast<float>(v));
            break;
        case onnx::TensorProto::INT64:
            if (raw) read_le<std::int64_t>(tp.raw_data(), data);
            else for (auto v : tp.int64_data()) data.push_back(static_cast<float>(v));
            break;
        case onnx::TensorProto::INT32:
            if (raw) read_le<std::int32_t>(tp.raw_data(), data);
            else for (auto v : tp.int32_data()) data.push_back(static_cast<float>(v));
            break;
        default:
            throw GraphError("tensor \"" + tp.name() + "\" has unsupported element type " +
                             std::to_string(tp.data_type()));
    }
    return Tensor(std::move(shape), std::move(data));
}

const std::set<std::string>& supported_ops() {
    static const std::set<std::string> ops = {
        "Add", "AveragePool", "BatchNormalization", "Clip", "Concat", "Constant", "Conv", "Div", "Dropout",
        "Flatten", "Gather", "Gemm", "GlobalAveragePool", "GlobalMaxPool", "HardSigmoid", "HardSwish",
        "Identity", "LeakyRelu", "MatMul", "MaxPool", "Mul", "ReduceMean", "Relu", "Reshape", "Shape",
        "Sigmoid", "Softmax", "Squeeze", "Sub", "Tanh", "Transpose", "Unsqueeze"};
    return ops;
}

// --- kernels ---------------------------------------------------------------------------------

std::vector<std::int64_t> broadcast_shape(const std::vector<std::int64_t>& a, const std::vector<std::int64_t>& b) {
    const std::size_t rank = std::max(a.size(), b.size());
    std::vector<std::int64_t> out(rank);
    for (std::size_t k = 0; k < rank; ++k) {
        const std::int64_t da = k < rank - a.size() ? 1 : a[k - (rank - a.size())];
        const std::int64_t db = k < rank - b.size() ? 1 : b[k - (rank - b.size())];
        if (da != db && da != 1 && db != 1)
            throw GraphError("cannot broadcast " + shape_str(a) + " with " + shape_str(b));
        out[k] = std::max(da, db);
    }
    return out;
}

// Strides of `shape` aligned to a broadcast output of rank `rank` (0 on broadcast axes).
std::vector<std::int64_t> broadcast_strides(const std::vector<std::int64_t>& shape, std::size_t rank) {
    std::vector<std::int64_t> strides(rank, 0);
    std::int64_t s = 1;
    for (std::size_t k = shape.size(); k-- > 0;) {
        const std::size_t o = k + (rank - shape.size());
        strides[o] = shape[k] == 1 ? 0 : s;
        s *= shape[k];
    }
    return strides;
}

Tensor binary_op(const Tensor& a, const Tensor& b, const std::function<float(float, float)>& fn) {
    if (a.shape == b.shape) {
        Tensor out(a.shape);
        for (std::size_t k = 0; k < a.data.size(); ++k) out.data[k] = fn(a.data[k], b.data[k]);
        return out;
    }
    const auto shape = broadcast_shape(a.shape, b.shape);
    const std::size_t rank = shape.size();
    const auto sa = broadcast_strides(a.shape, rank);
    const auto sb = broadcast_strides(b.shape, rank);
    Tensor out(shape);
    std::vector<std::int64_t> idx(rank, 0);
    std::int64_t oa = 0, ob = 0;
    for (std::size_t k = 0; k < out.data.size(); ++k) {
        out.data[k] = fn(a.data[static_cast<std::size_t>(oa)], b.data[static_cast<std::size_t>(ob)]);
        for (std::size_t d = rank; d-- > 0;) {
            ++idx[d];
            oa += sa[d];
            ob += sb[d];
            if (idx[d] < shape[d]) break;
            oa -= sa[d] * shape[d];
            ob -= sb[d] * shape[d];
            idx[d] = 0;
        }
    }
    return out;
}

Tensor unary_op(const Tensor& x, const std::function<float(float)>& fn) {
    Tensor out(x.shape);
    std::transform(x.data.begin(), x.data.end(), out.data.begin(), fn);
    return out;
}

std::int64_t normalize_axis(std::int64_t axis, std::size_t rank) {
    const auto r = static_cast<std::int64_t>(rank);
    if (axis < 0) axis += r;
    if (axis < 0 || axis >= std::max<std::int64_t>(r, 1)) throw GraphError("axis out of range");
    return axis;
}

struct Window2d {
    std::int64_t in_h, in_w, k_h, k_w, stride_h, stride_w, dil_h, dil_w, pad_t, pad_l, pad_b, pad_r, out_h, out_w;
};

// Spatial geometry for Conv/pooling over 1D or 2D inputs (1D treated as H = 1).
Window2d window_geometry(const Node& node, const std::vector<std::int64_t>& x_shape,
                         std::vector<std::int64_t> kernel, bool ceil_mode) {
    const std::size_t spatial = x_shape.size() - 2;
    if (spatial != 1 && spatial != 2) throw GraphError(node.label() + ": only 1D and 2D spatial inputs supported");
    if (kernel.size() != spatial) throw GraphError(node.label() + ": kernel rank mismatch");
    auto strides = node.attr_ints("strides");
    auto dilations = node.attr_ints("dilations");
    auto pads = node.attr_ints("pads");
    if (strides.empty()) strides.assign(spatial, 1);
    if (dilations.empty()) dilations.assign(spatial, 1);
    if (pads.empty()) pads.assign(2 * spatial, 0);
    std::vector<std::int64_t> in(x_shape.begin() + 2, x_shape.end());

    const std::string auto_pad = node.attr_string("auto_pad", "NOTSET");
    std::vector<std::int64_t> out(spatial);
    for (std::size_t d = 0; d < spatial; ++d) {
        const std::int64_t eff = dilations[d] * (kernel[d] - 1) + 1;
        if (auto_pad == "SAME_UPPER" || auto_pad == "SAME_LOWER") {
            out[d] = (in[d] + strides[d] - 1) / strides[d];
            const std::int64_t total = std::max<std::int64_t>(0, (out[d] - 1) * strides[d] + eff - in[d]);
            const std::int64_t small = total / 2;
            pads[d] = auto_pad == "SAME_UPPER" ? small : total - small;
            pads[d + spatial] = total - pads[d];
        } else {
            if (auto_pad == "VALID") pads.assign(2 * spatial, 0);
            const std::int64_t span = in[d] + pads[d] + pads[d + spatial] - eff;
            out[d] = (ceil_mode ? (span + strides[d] - 1) / strides[d] : span / strides[d]) + 1;
        }
        if (out[d] < 1) throw GraphError(node.label() + ": empty output for input " + shape_str(x_shape));
    }

    if (spatial == 1)
        return {1, in[0], 1, kernel[0], 1, strides[0], 1, dilations[0], 0, pads[0], 0, pads[1], 1, out[0]};
    return {in[0],      in[1],      kernel[0], kernel[1], strides[0], strides[1], dilations[0],
            dilations[1], pads[0], pads[1],   pads[2],   pads[3],    out[0],     out[1]};
}

std::vector<std::int64_t> spatial_out_shape(const std::vector<std::int64_t>& x_shape, std::int64_t channels,
                                            const Window2d& g) {
    if (x_shape.size() == 3) return {x_shape[0], channels, g.out_w};
    return {x_shape[0], channels, g.out_h, g.out_w};
}

using RowMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Tensor conv(const Node& node, const Tensor& x, const Tensor& w, const Tensor* bias) {
    if (x.rank() < 3) throw GraphError(node.label() + ": input must be [N, C, ...]");
    if (w.rank() != x.rank()) throw GraphError(node.label() + ": weight rank mismatch");
    const std::int64_t group = node.attr_int("group", 1);
    const std::int64_t n = x.shape[0];
    const std::int64_t c_in = x.shape[1];
    const std::int64_t m = w.shape[0];
    const std::int64_t c_per_group = w.shape[1];
    if (c_in != c_per_group * group || m % group != 0)
        throw GraphError(node.label() + ": channel/group mismatch (input " + shape_str(x.shape) + ", weight " +
                         shape_str(w.shape) + ", group " + std::to_string(group) + ")");
    std::vector<std::int64_t> kernel(w.shape.begin() + 2, w.shape.end());
    const Window2d g = window_geometry(node, x.shape, kernel, false);
    const std::int64_t m_per_group = m / group;
    const std::int64_t out_plane = g.out_h * g.out_w;
    const std::int64_t in_plane = g.in_h * g.in_w;
    const std::int64_t patch = c_per_group * g.k_h * g.k_w;

    Tensor out(spatial_out_shape(x.shape, m, g));
    RowMatrix cols(patch, out_plane);
    for (std::int64_t b = 0; b < n; ++b) {
        for (std::int64_t grp = 0; grp < group; ++grp) {
            const float* xin = x.data.data() + (b * c_in + grp * c_per_group) * in_plane;
            // im2col
            for (std::int64_t c = 0; c < c_per_group; ++c)
                for (std::int64_t kh = 0; kh < g.k_h; ++kh)
                    for (std::int64_t kw = 0; kw < g.k_w; ++kw) {
                        const std::int64_t row = (c * g.k_h + kh) * g.k_w + kw;
                        float* dst = cols.data() + row * out_plane;
                        for (std::int64_t oh = 0; oh < g.out_h; ++oh) {
                            const std::int64_t ih = oh * g.stride_h - g.pad_t + kh * g.dil_h;
                            for (std::int64_t ow = 0; ow < g.out_w; ++ow) {
                                const std::int64_t iw = ow * g.stride_w - g.pad_l + kw * g.dil_w;
                                dst[oh * g.out_w + ow] = (ih >= 0 && ih < g.in_h && iw >= 0 && iw < g.in_w)
                                                             ? xin[(c * g.in_h + ih) * g.in_w + iw]
                                                             : 0.0f;
                            }
                        }
                    }
            Eigen::Map<const RowMatrix> weights(w.data.data() + grp * m_per_group * patch, m_per_group, patch);
            Eigen::Map<RowMatrix> result(out.data.data() + (b * m + grp * m_per_group) * out_plane, m_per_group,
                                         out_plane);
            result.noalias() = weights * cols;
        }
    }
    if (bias) {
        if (bias->numel() != m) throw GraphError(node.label() + ": bias size mismatch");
        for (std::int64_t b = 0; b < n; ++b)
            for (std::int64_t oc = 0; oc < m; ++oc) {
                float* p = out.data.data() + (b * m + oc) * out_plane;
                const float v = bias->data[static_cast<std::size_t>(oc)];
                for (std::int64_t s = 0; s < out_plane; ++s) p[s] += v;
            }
    }
    return out;
}

Tensor pool(const Node& node, const Tensor& x, bool is_max) {
    if (x.rank() < 3) throw GraphError(node.label() + ": input must be [N, C, ...]");
    const auto kernel = node.attr_ints("kernel_shape");
    const Window2d g = window_geometry(node, x.shape, kernel, node.attr_int("ceil_mode", 0) != 0);
    const bool include_pad = node.attr_int("count_include_pad", 0) != 0;
    const std::int64_t planes = x.shape[0] * x.shape[1];
    Tensor out(spatial_out_shape(x.shape, x.shape[1], g));
    for (std::int64_t p = 0; p < planes; ++p) {
        const float* xin = x.data.data() + p * g.in_h * g.in_w;
        float* dst = out.data.data() + p * g.out_h * g.out_w;
        for (std::int64_t oh = 0; oh < g.out_h; ++oh)
            for (std::int64_t ow = 0; ow < g.out_w; ++ow) {
                float best = -std::numeric_limits<float>::infinity();
                double sum = 0.0;
                std::int64_t count = 0;
                std::int64_t padded = 0;
                for (std::int64_t kh = 0; kh < g.k_h; ++kh)
                    for (std::int64_t kw = 0; kw < g.k_w; ++kw) {
                        const std::int64_t ih = oh * g.stride_h - g.pad_t + kh * g.dil_h;
                        const std::int64_t iw = ow * g.stride_w - g.pad_l + kw * g.dil_w;
                        if (ih < 0 || ih >= g.in_h || iw < 0 || iw >= g.in_w) {
                            if (ih < g.in_h + g.pad_b && iw < g.in_w + g.pad_r) ++padded;
                            continue;
                        }
                        const float v = xin[ih * g.in_w + iw];
                        best = std::max(best, v);
                        sum += v;
                        ++count;
                    }
                const std::int64_t denom = include_pad ? count + padded : count;
                dst[oh * g.out_w + ow] = is_max ? best : static_cast<float>(sum / static_cast<double>(std::max<std::int64_t>(denom, 1)));
            }
    }
    return out;
}

Tensor global_pool(const Tensor& x, bool is_max) {
    if (x.rank() < 3) throw GraphError("GlobalPool: input must be [N, C, ...]");
    std::vector<std::int64_t> shape(x.shape.begin(), x.shape.begin() + 2);
    std::int64_t plane = 1;
    for (std::size_t d = 2; d < x.rank(); ++d) {
        plane *= x.shape[d];
        shape.push_back(1);
    }
    Tensor out(shape);
    for (std::int64_t p = 0; p < x.shape[0] * x.shape[1]; ++p) {
        const float* src = x.data.data() + p * plane;
        if (is_max) {
            out.data[static_cast<std::size_t>(p)] = *std::max_element(src, src + plane);
        } else {
            double acc = 0.0;
            for (std::int64_t s = 0; s < plane; ++s) acc += src[s];
            out.data[static_cast<std::size_t>(p)] = static_cast<float>(acc / static_cast<double>(plane));
        }
    }
    return out;
}

Tensor reduce_mean(const Tensor& x, std::vector<std::int64_t> axes, bool keepdims, bool noop_empty) {
    if (axes.empty()) {
        if (noop_empty) return x;
        axes.resize(x.rank());
        std::iota(axes.begin(), axes.end(), 0);
    }
    std::vector<bool> reduce(x.rank(), false);
    for (auto a : axes) reduce[static_cast<std::size_t>(normalize_axis(a, x.rank()))] = true;
    std::vector<std::int64_t> kept_shape;
    std::vector<std::int64_t> out_shape;
    std::int64_t reduced = 1;
    for (std::size_t d = 0; d < x.rank(); ++d) {
        if (reduce[d]) {
            reduced *= x.shape[d];
            if (keepdims) out_shape.push_back(1);
            kept_shape.push_back(1);
        } else {
            out_shape.push_back(x.shape[d]);
            kept_shape.push_back(x.shape[d]);
        }
    }
    const auto strides = broadcast_strides(kept_shape, x.rank());
    std::vector<double> acc(static_cast<std::size_t>(shape_numel(kept_shape)), 0.0);
    std::vector<std::int64_t> idx(x.rank(), 0);
    std::int64_t off = 0;
    for (std::size_t k = 0; k < x.data.size(); ++k) {
        acc[static_cast<std::size_t>(off)] += x.data[k];
        for (std::size_t d = x.rank(); d-- > 0;) {
            ++idx[d];
            off += strides[d];
            if (idx[d] < x.shape[d]) break;
            off -= strides[d] * x.shape[d];
            idx[d] = 0;
        }
    }
    Tensor out(out_shape);
    for (std::size_t k = 0; k < acc.size(); ++k) out.data[k] = static_cast<float>(acc[k] / static_cast<double>(reduced));
    return out;
}

Tensor transpose(const Tensor& x, std::vector<std::int64_t> perm) {
    const std::size_t rank = x.rank();
    if (perm.empty()) {
        perm.resize(rank);
        for (std::size_t d = 0; d < rank; ++d) perm[d] = static_cast<std::int64_t>(rank - 1 - d);
    }
    std::vector<std::int64_t> in_strides(rank, 1);
    for (std::size_t d = rank; d-- > 1;) in_strides[d - 1] = in_strides[d] * x.shape[d];
    std::vector<std::int64_t> out_shape(rank);
    std::vector<std::int64_t> src_strides(rank);
    for (std::size_t d = 0; d < rank; ++d) {
        out_shape[d] = x.shape[static_cast<std::size_t>(perm[d])];
        src_strides[d] = in_strides[static_cast<std::size_t>(perm[d])];
    }
    Tensor out(out_shape);
    std::vector<std::int64_t> idx(rank, 0);
    std::int64_t off = 0;
    for (std::size_t k = 0; k < out.data.size(); ++k) {
        out.data[k] = x.data[static_cast<std::size_t>(off)];
        for (std::size_t d = rank; d-- > 0;) {
            ++idx[d];
            off += src_strides[d];
            if (idx[d] < out_shape[d]) break;
            off -= src_strides[d] * out_shape[d];
            idx[d] = 0;
        }
    }
    return out;
}

Tensor matmul2d(const Tensor& a, const Tensor& b, bool trans_a, bool trans_b) {
    if (a.rank() != 2 || b.rank() != 2) throw GraphError("Gemm expects 2D operands");
    Eigen::Map<const RowMatrix> ma(a.data.data(), a.shape[0], a.shape[1]);
    Eigen::Map<const RowMatrix> mb(b.data.data(), b.shape[0], b.shape[1]);
    RowMatrix r;
    if (trans_a && trans_b) r = ma.transpose() * mb.transpose();
    else if (trans_a) r = ma.transpose() * mb;
    else if (trans_b) r = ma * mb.transpose();
    else r = ma * mb;
    if (r.size() == 0) throw GraphError("Gemm: empty result");
    return Tensor({r.rows(), r.cols()}, std::vector<float>(r.data(), r.data() + r.size()));
}

std::vector<std::int64_t> as_ints(const Tensor& t) {
    std::vector<std::int64_t> v;
    v.reserve(t.data.size());
    for (float f : t.data) v.push_back(static_cast<std::int64_t>(std::llround(f)));
    return v;
}

}  // namespace

// --- OnnxModel ------------------------------------------------------------------------------------

struct OnnxModel::Impl {
    std::vector<Node> nodes;
    std::unordered_map<std::string, TensorPtr> initializers;
    std::vector<std::string> inputs;
    std::unordered_map<std::string, std::vector<std::int64_t>> input_shapes;
    std::vector<std::string> outputs;
    std::vector<std::string> values;
    std::unordered_map<std::string, std::size_t> producer;  // value -> node index
    std::string digest;
    std::int64_t opset = 13;

    std::vector<Tensor> eval(const Node& node, const std::vector<const Tensor*>& in) const;
};

OnnxModel::OnnxModel(std::unique_ptr<Impl> impl) : impl_(std::move(impl)) {}
OnnxModel::OnnxModel(OnnxModel&&) noexcept = default;
OnnxModel& OnnxModel::operator=(OnnxModel&&) noexcept = default;
OnnxModel::~OnnxModel() = default;

OnnxModel OnnxModel::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw GraphError("cannot open model file " + path);
    const std::string bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    return from_bytes(bytes);
}

OnnxModel OnnxModel::from_bytes(std::string_view bytes) {
    onnx::ModelProto proto;
    if (!proto.ParseFromArray(bytes.data(), static_cast<int>(bytes.size())) || !proto.has_graph())
        throw GraphError("not a valid ONNX model (protobuf parse failed)");

    auto impl = std::make_unique<Impl>();
    impl->digest = fnv1a_hex(bytes);
    for (const auto& op : proto.opset_import())
        if (op.domain().empty() || op.domain() == "ai.onnx") impl->opset = op.version();

    const auto& graph = proto.graph();
    for (const auto& init : graph.initializer())
        impl->initializers[init.name()] = std::make_shared<const Tensor>(tensor_from_proto(init));
    for (const auto& vi : graph.input()) {
        if (impl->initializers.count(vi.name())) continue;
        impl->inputs.push_back(vi.name());
        std::vector<std::int64_t> shape;
        if (vi.type().has_tensor_type() && vi.type().tensor_type().has_shape())
            for (const auto& d : vi.type().tensor_type().shape().dim())
                shape.push_back(d.has_dim_value() ? d.dim_value() : -1);
        impl->input_shapes[vi.name()] = std::move(shape);
    }
    for (const auto& vo : graph.output()) impl->outputs.push_back(vo.name());

    std::set<std::string> unsupported;
    for (const auto& np : graph.node()) {
        if (!np.domain().empty() && np.domain() != "ai.onnx") {
            unsupported.insert(np.domain() + "::" + np.op_type());
            continue;
        }
        if (!supported_ops().count(np.op_type())) unsupported.insert(np.op_type());
        Node node;
        node.op = np.op_type();
        node.name = np.name();
        node.inputs.assign(np.input().begin(), np.input().end());
        node.outputs.assign(np.output().begin(), np.output().end());
        for (const auto& a : np.attribute()) node.attrs[a.name()] = a;
        for (const auto& out : node.outputs) {
            if (out.empty()) continue;
            impl->producer[out] = impl->nodes.size();
            impl->values.push_back(out);
        }
        impl->nodes.push_back(std::move(node));
    }
    if (!unsupported.empty()) {
        std::string msg = "unsupported operators:";
        for (const auto& op : unsupported) msg += " " + op;
        throw GraphError(msg);
    }
    return OnnxModel(std::move(impl));
}

const std::vector<std::string>& OnnxModel::input_names() const { return impl_->inputs; }
const std::vector<std::string>& OnnxModel::output_names() const { return impl_->outputs; }
const std::vector<std::string>& OnnxModel::value_names() const { return impl_->values; }
const std::string& OnnxModel::content_digest() const { return impl_->digest; }

bool OnnxModel::has_value(const std::string& name) const { return impl_->producer.count(name) != 0; }

std::vector<std::int64_t> OnnxModel::input_shape(const std::string& name) const {
    auto it = impl_->input_shapes.find(name);
    if (it == impl_->input_shapes.end()) throw GraphError("model has no input named \"" + name + "\"");
    return it->second;
}

std::map<std::string, Tensor> OnnxModel::run(const std::string& input_name, const Tensor& input,
                                             std::span<const std::string> requested) const {
    const auto& shape = input_shape(input_name);
    if (!shape.empty()) {
        bool ok = shape.size() == input.shape.size();
        for (std::size_t d = 0; ok && d < shape.size(); ++d) ok = shape[d] < 0 || shape[d] == input.shape[d];
        if (!ok)
            throw GraphError("input \"" + input_name + "\" expects shape " + shape_str(shape) + ", got " +
                             shape_str(input.shape));
    }

    // only evaluate nodes the requested values depend on
    std::vector<bool> needed(impl_->nodes.size(), false);
    std::vector<std::string> stack;
    for (const auto& r : requested) {
        if (r == input_name || impl_->initializers.count(r)) continue;
        if (!impl_->producer.count(r)) throw GraphError("graph has no value named \"" + r + "\"");
        stack.push_back(r);
    }
    while (!stack.empty()) {
        const std::string v = stack.back();
        stack.pop_back();
        auto it = impl_->producer.find(v);
        if (it == impl_->producer.end() || needed[it->second]) continue;
        needed[it->second] = true;
        for (const auto& in : impl_->nodes[it->second].inputs)
            if (!in.empty()) stack.push_back(in);
    }

    std::unordered_map<std::string, TensorPtr> env;
    env[input_name] = std::make_shared<const Tensor>(input);
    for (std::size_t k = 0; k < impl_->nodes.size(); ++k) {
        if (!needed[k]) continue;
        const Node& node = impl_->nodes[k];
        std::vector<const Tensor*> args;
        args.reserve(node.inputs.size());
        for (const auto& name : node.inputs) {
            if (name.empty()) {
                args.push_back(nullptr);
                continue;
            }
            if (auto it = env.find(name); it != env.end()) {
                args.push_back(it->second.get());
            } else if (auto init = impl_->initializers.find(name); init != impl_->initializers.end()) {
                args.push_back(init->second.get());
            } else {
                throw GraphError(node.label() + ": input \"" + name + "\" is not available");
            }
        }
        auto results = impl_->eval(node, args);
        for (std::size_t o = 0; o < node.outputs.size() && o < results.size(); ++o)
            if (!node.outputs[o].empty()) env[node.outputs[o]] = std::make_shared<const Tensor>(std::move(results[o]));
    }

    std::map<std::string, Tensor> out;
    for (const auto& r : requested) {
        if (auto it = env.find(r); it != env.end()) out[r] = *it->second;
        else if (auto init = impl_->initializers.find(r); init != impl_->initializers.end()) out[r] = *init->second;
    }
    return out;
}

std::vector<Tensor> OnnxModel::Impl::eval(const Node& node, const std::vector<const Tensor*>& in) const {
    auto arg = [&](std::size_t k) -> const Tensor& {
        if (k >= in.size() || !in[k]) throw GraphError(node.label() + ": missing input " + std::to_string(k));
        return *in[k];
    };
    auto opt = [&](std::size_t k) -> const Tensor* { return k < in.size() ? in[k] : nullptr; };
    const std::string& op = node.op;

    if (op == "Identity" || op == "Dropout") return {arg(0)};
    if (op == "Relu") return {unary_op(arg(0), [](float v) { return v > 0.0f ? v : 0.0f; })};
    if (op == "Sigmoid") return {unary_op(arg(0), [](float v) { return 1.0f / (1.0f + std::exp(-v)); })};
    if (op == "Tanh") return {unary_op(arg(0), [](float v) { return std::tanh(v); })};
    if (op == "LeakyRelu") {
        const float alpha = node.attr_float("alpha", 0.01f);
        return {unary_op(arg(0), [alpha](float v) { return v >= 0.0f ? v : alpha * v; })};
    }
    if (op == "HardSigmoid") {
        const float alpha = node.attr_float("alpha", 0.2f);
        const float beta = node.attr_float("beta", 0.5f);
        return {unary_op(arg(0), [=](float v) { return std::clamp(alpha * v + beta, 0.0f, 1.0f); })};
    }
    if (op == "HardSwish")
        return {unary_op(arg(0), [](float v) { return v * std::clamp(v / 6.0f + 0.5f, 0.0f, 1.0f); })};
    if (op == "Clip") {
        float lo = node.attr_float("min", -std::numeric_limits<float>::infinity());
        float hi = node.attr_float("max", std::numeric_limits<float>::infinity());
        if (const Tensor* t = opt(1)) lo = t->data.at(0);
        if (const Tensor* t = opt(2)) hi = t->data.at(0);
        return {unary_op(arg(0), [=](float v) { return std::clamp(v, lo, hi); })};
    }
    if (op == "Add") return {binary_op(arg(0), arg(1), std::plus<float>())};
    if (op == "Sub") return {binary_op(arg(0), arg(1), std::minus<float>())};
    if (op == "Mul") return {binary_op(arg(0), arg(1), std::multiplies<float>())};
    if (op == "Div") return {binary_op(arg(0), arg(1), std::divides<float>())};

    if (op == "Conv") return {conv(node, arg(0), arg(1), opt(2))};
    if (op == "MaxPool") return {pool(node, arg(0), true)};
    if (op == "AveragePool") return {pool(node, arg(0), false)};
    if (op == "GlobalAveragePool") return {global_pool(arg(0), false)};
    if (op == "GlobalMaxPool") return {global_pool(arg(0), true)};

    if (op == "BatchNormalization") {
        const Tensor& x = arg(0);
        const Tensor& scale = arg(1);
        const Tensor& shift = arg(2);
        const Tensor& mean = arg(3);
        const Tensor& var = arg(4);
        const float eps = node.attr_float("epsilon", 1e-5f);
        if (x.rank() < 2) throw GraphError(node.label() + ": input rank < 2");
        const std::int64_t channels = x.shape[1];
        std::int64_t plane = 1;
        for (std::size_t d = 2; d < x.rank(); ++d) plane *= x.shape[d];
        Tensor out(x.shape);
        for (std::int64_t b = 0; b < x.shape[0]; ++b)
            for (std::int64_t c = 0; c < channels; ++c) {
                const auto ci = static_cast<std::size_t>(c);
                const float a = scale.data[ci] / std::sqrt(var.data[ci] + eps);
                const float s = shift.data[ci] - a * mean.data[ci];
                const std::int64_t base = (b * channels + c) * plane;
                for (std::int64_t p = 0; p < plane; ++p)
                    out.data[static_cast<std::size_t>(base + p)] = a * x.data[static_cast<std::size_t>(base + p)] + s;
            }
        return {out};
    }

    if (op == "ReduceMean") {
        std::vector<std::int64_t> axes = node.attr_ints("axes");
        if (const Tensor* t = opt(1)) axes = as_ints(*t);
        return {reduce_mean(arg(0), axes, node.attr_int("keepdims", 1) != 0,
                            node.attr_int("noop_with_empty_axes", 0) != 0)};
    }

    if (op == "Softmax") {
        const Tensor& x = arg(0);
        const std::int64_t axis = normalize_axis(node.attr_int("axis", opset >= 13 ? -1 : 1), x.rank());
        std::int64_t outer = 1, inner = 1;
        for (std::int64_t d = 0; d < axis; ++d) outer *= x.shape[static_cast<std::size_t>(d)];
        for (std::size_t d = static_cast<std::size_t>(axis) + 1; d < x.rank(); ++d) inner *= x.shape[d];
        const std::int64_t len = x.shape[static_cast<std::size_t>(axis)];
        Tensor out(x.shape);
        for (std::int64_t o = 0; o < outer; ++o)
            for (std::int64_t i = 0; i < inner; ++i) {
                const std::int64_t base = o * len * inner + i;
                float mx = -std::numeric_limits<float>::infinity();
                for (std::int64_t k = 0; k < len; ++k) mx = std::max(mx, x.data[static_cast<std::size_t>(base + k * inner)]);
                double sum = 0.0;
                for (std::int64_t k = 0; k < len; ++k) sum += std::exp(x.data[static_cast<std::size_t>(base + k * inner)] - mx);
                for (std::int64_t k = 0; k < len; ++k) {
                    const auto at = static_cast<std::size_t>(base + k * inner);
                    out.data[at] = static_cast<float>(std::exp(x.data[at] - mx) / sum);
                }
            }
        return {out};
    }

    if (op == "Flatten") {
        const Tensor& x = arg(0);
        std::int64_t axis = node.attr_int("axis", 1);
        if (axis < 0) axis += static_cast<std::int64_t>(x.rank());
        std::int64_t outer = 1;
        for (std::int64_t d = 0; d < axis; ++d) outer *= x.shape[static_cast<std::size_t>(d)];
        return {Tensor({outer, x.numel() / std::max<std::int64_t>(outer, 1)}, x.data)};
    }
    if (op == "Reshape") {
        const Tensor& x = arg(0);
        auto shape = as_ints(arg(1));
        std::int64_t known = 1;
        std::int64_t infer = -1;
        for (std::size_t d = 0; d < shape.size(); ++d) {
            if (shape[d] == 0 && node.attr_int("allowzero", 0) == 0) shape[d] = x.shape.at(d);
            if (shape[d] == -1) infer = static_cast<std::int64_t>(d);
            else known *= shape[d];
        }
        if (infer >= 0) shape[static_cast<std::size_t>(infer)] = x.numel() / std::max<std::int64_t>(known, 1);
        return {Tensor(shape, x.data)};
    }
    if (op == "Squeeze") {
        const Tensor& x = arg(0);
        std::vector<std::int64_t> axes = node.attr_ints("axes");
        if (const Tensor* t = opt(1)) axes = as_ints(*t);
        std::vector<bool> drop(x.rank(), false);
        if (axes.empty()) {
            for (std::size_t d = 0; d < x.rank(); ++d) drop[d] = x.shape[d] == 1;
        } else {
            for (auto a : axes) drop[static_cast<std::size_t>(normalize_axis(a, x.rank()))] = true;
        }
        std::vector<std::int64_t> shape;
        for (std::size_t d = 0; d < x.rank(); ++d)
            if (!drop[d]) shape.push_back(x.shape[d]);
        return {Tensor(shape, x.data)};
    }
    if (op == "Unsqueeze") {
        const Tensor& x = arg(0);
        std::vector<std::int64_t> axes = node.attr_ints("axes");
        if (const Tensor* t = opt(1)) axes = as_ints(*t);
        const std::size_t rank = x.rank() + axes.size();
        std::vector<bool> inserted(rank, false);
        for (auto a : axes) inserted[static_cast<std::size_t>(normalize_axis(a, rank))] = true;
        std::vector<std::int64_t> shape;
        std::size_t src = 0;
        for (std::size_t d = 0; d < rank; ++d) shape.push_back(inserted[d] ? 1 : x.shape.at(src++));
        return {Tensor(shape, x.data)};
    }
    if (op == "Concat") {
        const std::int64_t axis = normalize_axis(node.attr_int("axis", 0), arg(0).rank());
        std::vector<std::int64_t> shape = arg(0).shape;
        shape[static_cast<std::size_t>(axis)] = 0;
        for (const Tensor* t : in) shape[static_cast<std::size_t>(axis)] += t->shape[static_cast<std::size_t>(axis)];
        std::int64_t outer = 1;
        for (std::int64_t d = 0; d < axis; ++d) outer *= shape[static_cast<std::size_t>(d)];
        Tensor out(shape);
        std::size_t at = 0;
        for (std::int64_t o = 0; o < outer; ++o)
            for (const Tensor* t : in) {
                const std::int64_t chunk = t->numel() / std::max<std::int64_t>(outer, 1);
                std::copy_n(t->data.begin() + o * chunk, chunk, out.data.begin() + static_cast<std::ptrdiff_t>(at));
                at += static_cast<std::size_t>(chunk);
            }
        return {out};
    }
    if (op == "Transpose") return {transpose(arg(0), node.attr_ints("perm"))};
    if (op == "Shape") {
        const Tensor& x = arg(0);
        std::vector<float> dims;
        for (auto d : x.shape) dims.push_back(static_cast<float>(d));
        return {Tensor({static_cast<std::int64_t>(dims.size())}, dims)};
    }
    if (op == "Gather") {
        const Tensor& x = arg(0);
        const auto indices = as_ints(arg(1));
        const std::int64_t axis = normalize_axis(node.attr_int("axis", 0), x.rank());
        std::int64_t outer = 1, inner = 1;
        for (std::int64_t d = 0; d < axis; ++d) outer *= x.shape[static_cast<std::size_t>(d)];
        for (std::size_t d = static_cast<std::size_t>(axis) + 1; d < x.rank(); ++d) inner *= x.shape[d];
        const std::int64_t len = x.shape[static_cast<std::size_t>(axis)];
        std::vector<std::int64_t> shape(x.shape.begin(), x.shape.begin() + axis);
        for (auto d : arg(1).shape) shape.push_back(d);
        for (std::size_t d = static_cast<std::size_t>(axis) + 1; d < x.rank(); ++d) shape.push_back(x.shape[d]);
        Tensor out(shape);
        std::size_t at = 0;
        for (std::int64_t o = 0; o < outer; ++o)
            for (auto idx : indices) {
                if (idx < 0) idx += len;
                if (idx < 0 || idx >= len) throw GraphError(node.label() + ": index out of range");
                std::copy_n(x.data.begin() + (o * len + idx) * inner, inner, out.data.begin() + static_cast<std::ptrdiff_t>(at));
                at += static_cast<std::size_t>(inner);
            }
        return {out};
    }
    if (op == "Gemm") {
        Tensor y = matmul2d(arg(0), arg(1), node.attr_int("transA", 0) != 0, node.attr_int("transB", 0) != 0);
        const float alpha = node.attr_float("alpha", 1.0f);
        const float beta = node.attr_float("beta", 1.0f);
        for (float& v : y.data) v *= alpha;
        if (const Tensor* c = opt(2)) y = binary_op(y, *c, [beta](float a, float b) { return a + beta * b; });
        return {y};
    }
    if (op == "MatMul") {
        const Tensor& a = arg(0);
        const Tensor& b = arg(1);
        if (b.rank() != 2 || a.rank() < 2) throw GraphError(node.label() + ": only [..., M, K] x [K, N] supported");
        const std::int64_t k = a.shape.back();
        const Tensor flat({a.numel() / k, k}, a.data);
        Tensor y = matmul2d(flat, b, false, false);
        std::vector<std::int64_t> shape(a.shape.begin(), a.shape.end() - 1);
        shape.push_back(b.shape[1]);
        return {Tensor(shape, std::move(y.data))};
    }
    if (op == "Constant") {
        const auto* value = node.attr("value");
        if (!value || !value->has_t()) throw GraphError(node.label() + ": only tensor-valued constants supported");
        return {tensor_from_proto(value->t())};
    }
    throw GraphError("unsupported operator " + op);
}

}  // namespace octgate
