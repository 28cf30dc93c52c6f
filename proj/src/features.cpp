#include "octgate/features.hpp"

#include "octgate/errors.hpp"
#include "octgate/onnx_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <sstream>
#include <stdexcept>

namespace octgate {

// --- FeatureSet -------------------------------------------------------------------

std::vector<std::size_t> FeatureSet::dims() const {
    std::vector<std::size_t> d;
    d.reserve(vectors.size());
    for (const auto& v : vectors) d.push_back(static_cast<std::size_t>(v.size()));
    return d;
}

bool FeatureSet::all_finite() const {
    return std::all_of(vectors.begin(), vectors.end(), [](const Eigen::VectorXd& v) { return v.allFinite(); });
}

Eigen::VectorXd FeatureSet::concatenated() const {
    Eigen::Index total = 0;
    for (const auto& v : vectors) total += v.size();
    Eigen::VectorXd out(total);
    Eigen::Index at = 0;
    for (const auto& v : vectors) {
        out.segment(at, v.size()) = v;
        at += v.size();
    }
    return out;
}

std::string_view to_string(ExtractorKind kind) {
    switch (kind) {
        case ExtractorKind::builtin_pyramid: return "builtin_pyramid";
        case ExtractorKind::exported_network: return "exported_network";
    }
    return "unknown";
}

ExtractorKind extractor_kind_from_string(std::string_view name) {
    if (name == "builtin_pyramid") return ExtractorKind::builtin_pyramid;
    if (name == "exported_network") return ExtractorKind::exported_network;
    throw std::invalid_argument("unknown extractor kind \"" + std::string(name) + "\"");
}

std::string fnv1a_hex(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int k = 15; k >= 0; --k) {
        out[static_cast<std::size_t>(k)] = kHex[h & 0xF];
        h >>= 4;
    }
    return out;
}

// --- builtin pyramid ------------------------------------------------------------------

namespace {

inline Eigen::Index clampi(Eigen::Index v, Eigen::Index lo, Eigen::Index hi) { return std::clamp(v, lo, hi); }

}  // namespace

Grid smooth_and_decimate(const Grid& level) {
    const Eigen::Index rows = level.rows();
    const Eigen::Index cols = level.cols();
    Grid horizontal(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c)
            horizontal(r, c) = 0.25 * level(r, clampi(c - 1, 0, cols - 1)) + 0.5 * level(r, c) +
                               0.25 * level(r, clampi(c + 1, 0, cols - 1));

    const Eigen::Index out_rows = (rows + 1) / 2;
    const Eigen::Index out_cols = (cols + 1) / 2;
    Grid out(out_rows, out_cols);
    for (Eigen::Index r = 0; r < out_rows; ++r) {
        const Eigen::Index src = 2 * r;
        for (Eigen::Index c = 0; c < out_cols; ++c)
            out(r, c) = 0.25 * horizontal(clampi(src - 1, 0, rows - 1), 2 * c) + 0.5 * horizontal(src, 2 * c) +
                        0.25 * horizontal(clampi(src + 1, 0, rows - 1), 2 * c);
    }
    return out;
}

std::vector<Grid> builtin_pyramid_levels(const PreppedImage& image, int levels) {
    if (levels < 1) throw std::invalid_argument("builtin_pyramid_levels: K must be >= 1");
    Eigen::Index rows = image.height();
    Eigen::Index cols = image.width();
    for (int k = 1; k < levels; ++k) {
        rows = (rows + 1) / 2;
        cols = (cols + 1) / 2;
    }
    if (rows < 2 || cols < 2)
        throw std::invalid_argument("builtin_pyramid_levels: K=" + std::to_string(levels) + " too large for " +
                                    std::to_string(image.height()) + "x" + std::to_string(image.width()) +
                                    " input (coarsest level would be " + std::to_string(rows) + "x" +
                                    std::to_string(cols) + ")");

    std::vector<Grid> out;
    out.reserve(static_cast<std::size_t>(levels));
    out.push_back((image.channels[0] + image.channels[1] + image.channels[2]) / 3.0);
    for (int k = 1; k < levels; ++k) out.push_back(smooth_and_decimate(out.back()));
    return out;
}

Eigen::VectorXd builtin_level_features(const Grid& g) {
    const Eigen::Index rows = g.rows();
    const Eigen::Index cols = g.cols();
    if (rows < 2 || cols < 2) throw std::invalid_argument("builtin_level_features: grid must be at least 2x2");
    const double count = static_cast<double>(rows * cols);

    const double mean = g.mean();
    const double std_dev = std::sqrt((g.array() - mean).square().sum() / count);

    double dx = 0.0;
    double dy = 0.0;
    double lap = 0.0;
    double contrast = 0.0;
    for (Eigen::Index r = 0; r < rows; ++r) {
        const Eigen::Index up = clampi(r - 1, 0, rows - 1);
        const Eigen::Index down = clampi(r + 1, 0, rows - 1);
        for (Eigen::Index c = 0; c < cols; ++c) {
            const Eigen::Index left = clampi(c - 1, 0, cols - 1);
            const Eigen::Index right = clampi(c + 1, 0, cols - 1);
            const double v = g(r, c);
            if (c + 1 < cols) dx += std::abs(g(r, c + 1) - v);
            if (r + 1 < rows) dy += std::abs(g(r + 1, c) - v);
            lap += std::abs(g(up, c) + g(down, c) + g(r, left) + g(r, right) - 4.0 * v);
            const double box = (g(up, left) + g(up, c) + g(up, right) + g(r, left) + v + g(r, right) +
                                g(down, left) + g(down, c) + g(down, right)) /
                               9.0;
            contrast += std::abs(v - box);
        }
    }

    Eigen::VectorXd f(static_cast<Eigen::Index>(kLevelFeatureCount));
    f << mean, std_dev, dx / static_cast<double>(rows * (cols - 1)), dy / static_cast<double>((rows - 1) * cols),
        lap / count, contrast / count;
    return f;
}

BuiltinPyramidExtractor::BuiltinPyramidExtractor(int levels) {
    if (levels < 1) throw std::invalid_argument("BuiltinPyramidExtractor: K must be >= 1");
    descriptor_.kind = ExtractorKind::builtin_pyramid;
    descriptor_.scales = levels;
    descriptor_.dims.assign(static_cast<std::size_t>(levels), kLevelFeatureCount);
    descriptor_.config_digest = fnv1a_hex("builtin_pyramid;v1;binomial3;stats6;K=" + std::to_string(levels));
}

FeatureSet BuiltinPyramidExtractor::extract(const PreppedImage& image) const {
    const auto levels = builtin_pyramid_levels(image, descriptor_.scales);
    FeatureSet fs;
    fs.vectors.reserve(levels.size());
    for (const auto& level : levels) fs.vectors.push_back(builtin_level_features(level));
    return fs;
}

// --- exported network --------------------------------------------------------------------

namespace {

Eigen::VectorXd spatial_average(const Tensor& t, const std::string& tap) {
    // [C], [N, C] or [N, C, spatial...] with N == 1
    if (t.rank() == 1) {
        Eigen::VectorXd v(t.shape[0]);
        for (std::int64_t c = 0; c < t.shape[0]; ++c) v(c) = t.data[static_cast<std::size_t>(c)];
        return v;
    }
    if (t.rank() == 0 || t.shape[0] != 1)
        throw GraphError("tap \"" + tap + "\" has unsupported shape (expected batch size 1)");
    const std::int64_t channels = t.shape[1];
    std::int64_t spatial = 1;
    for (std::size_t d = 2; d < t.rank(); ++d) spatial *= t.shape[d];
    Eigen::VectorXd v = Eigen::VectorXd::Zero(channels);
    for (std::int64_t c = 0; c < channels; ++c) {
        double acc = 0.0;
        const float* p = t.data.data() + c * spatial;
        for (std::int64_t s = 0; s < spatial; ++s) acc += p[s];
        v(c) = acc / static_cast<double>(spatial);
    }
    return v;
}

std::string read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw GraphError("cannot open model file " + path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

ExportedNetworkExtractor::ExportedNetworkExtractor(std::string model_path, std::vector<std::string> tap_points,
                                                   std::string input_name) {
    if (tap_points.empty()) throw std::invalid_argument("ExportedNetworkExtractor: no tap points given");
    model_ = std::make_shared<const OnnxModel>(OnnxModel::from_bytes(read_file_bytes(model_path)));

    if (input_name.empty()) {
        if (model_->input_names().empty()) throw GraphError("model has no graph inputs");
        input_name = model_->input_names().front();
    } else if (std::find(model_->input_names().begin(), model_->input_names().end(), input_name) ==
               model_->input_names().end()) {
        throw GraphError("model has no input named \"" + input_name + "\"");
    }

    for (const auto& tap : tap_points) {
        if (!model_->has_value(tap)) {
            std::ostringstream msg;
            msg << "tap \"" << tap << "\" not found; available taps:";
            for (const auto& name : model_->value_names()) msg << ' ' << name;
            throw GraphError(msg.str());
        }
    }

    descriptor_.kind = ExtractorKind::exported_network;
    descriptor_.scales = static_cast<int>(tap_points.size());
    descriptor_.model_path = std::move(model_path);
    descriptor_.tap_points = std::move(tap_points);
    descriptor_.input_name = input_name;

    std::string config = "exported_network;v1;model=" + model_->content_digest() + ";input=" + input_name + ";taps=";
    for (const auto& tap : descriptor_.tap_points) config += tap + ",";
    descriptor_.config_digest = fnv1a_hex(config);

    const auto shape = model_->input_shape(input_name);
    const bool is_static =
        !shape.empty() && std::all_of(shape.begin(), shape.end(), [](std::int64_t d) { return d > 0; });
    if (is_static) {
        const auto outputs = model_->run(input_name, Tensor(shape), descriptor_.tap_points);
        for (const auto& tap : descriptor_.tap_points)
            descriptor_.dims.push_back(static_cast<std::size_t>(spatial_average(outputs.at(tap), tap).size()));
    }
}

ExportedNetworkExtractor::~ExportedNetworkExtractor() = default;

FeatureSet ExportedNetworkExtractor::extract(const PreppedImage& image) const {
    const auto shape = model_->input_shape(descriptor_.input_name);
    const std::int64_t h = image.height();
    const std::int64_t w = image.width();
    if (shape.size() != 4 || (shape[1] > 0 && shape[1] != 3) || (shape[2] > 0 && shape[2] != h) ||
        (shape[3] > 0 && shape[3] != w)) {
        std::ostringstream msg;
        msg << "input \"" << descriptor_.input_name << "\" expects shape [";
        for (std::size_t k = 0; k < shape.size(); ++k) msg << (k ? "," : "") << shape[k];
        msg << "], got [1,3," << h << "," << w << "]";
        throw GraphError(msg.str());
    }

    Tensor input({1, 3, h, w});
    for (int c = 0; c < 3; ++c)
        for (std::int64_t r = 0; r < h; ++r)
            for (std::int64_t col = 0; col < w; ++col)
                input.data[static_cast<std::size_t>((c * h + r) * w + col)] =
                    static_cast<float>(image.channels[c](r, col));

    const auto outputs = model_->run(descriptor_.input_name, input, descriptor_.tap_points);
    FeatureSet fs;
    for (const auto& tap : descriptor_.tap_points) fs.vectors.push_back(spatial_average(outputs.at(tap), tap));
    return fs;
}

FeatureSet exported_network_extract(const PreppedImage& image, const std::string& model_path,
                                    const std::vector<std::string>& tap_points) {
    return ExportedNetworkExtractor(model_path, tap_points).extract(image);
}

std::unique_ptr<FeatureExtractor> make_extractor(const ExtractorDescriptor& descriptor) {
    switch (descriptor.kind) {
        case ExtractorKind::builtin_pyramid:
            return std::make_unique<BuiltinPyramidExtractor>(descriptor.scales);
        case ExtractorKind::exported_network:
            return std::make_unique<ExportedNetworkExtractor>(descriptor.model_path, descriptor.tap_points,
                                                              descriptor.input_name);
    }
    throw std::invalid_argument("make_extractor: unknown kind");
}

}  // namespace octgate
