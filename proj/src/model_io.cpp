#include "octgate/model_io.hpp"

#include "envelope.hpp"

#include <fstream>
#include <iterator>

namespace octgate {

namespace {
constexpr std::string_view kDetectorFormat = "octgate.detector";
}

std::string serialize_model(const DetectorModel& model) {
    using nlohmann::json;
    json scales = json::array();
    for (const auto& g : model.scales) {
        scales.push_back({{"mean", detail::vector_to_json(g.mean)},
                          {"covariance", detail::lower_to_json(g.covariance)},
                          {"chol_lower", detail::lower_to_json(g.chol_lower)},
                          {"epsilon_used", g.epsilon_used},
                          {"loading", g.loading}});
    }
    json payload = {{"extractor", detail::descriptor_to_json(model.extractor)},
                    {"preproc", detail::preproc_to_json(model.preproc)},
                    {"tau", model.threshold_tau ? json(*model.threshold_tau) : json(nullptr)},
                    {"q", model.calibration_quantile},
                    {"N", model.training_sample_count},
                    {"epsilon", model.epsilon},
                    {"scales", std::move(scales)}};
    return detail::write_envelope(kDetectorFormat, payload);
}

DetectorModel parse_model(std::string_view text) {
    const auto payload = detail::read_envelope(text, kDetectorFormat);
    DetectorModel model;
    try {
        model.extractor = detail::descriptor_from_json(payload.at("extractor"));
        model.preproc = detail::preproc_from_json(payload.at("preproc"));
        if (!payload.at("tau").is_null()) model.threshold_tau = payload["tau"].get<double>();
        model.calibration_quantile = payload.at("q").get<double>();
        model.training_sample_count = payload.at("N").get<std::size_t>();
        model.epsilon = payload.at("epsilon").get<double>();
        for (const auto& s : payload.at("scales")) {
            ScaleGaussian g;
            g.mean = detail::vector_from_json(s.at("mean"));
            g.covariance = detail::lower_from_json(s.at("covariance"), true);
            g.chol_lower = detail::lower_from_json(s.at("chol_lower"), false);
            g.epsilon_used = s.at("epsilon_used").get<double>();
            g.loading = s.at("loading").get<double>();
            if (g.chol_lower.rows() != g.mean.size() || g.covariance.rows() != g.mean.size())
                throw ModelError("scale " + std::to_string(model.scales.size()) + " has inconsistent dimensions");
            model.scales.push_back(std::move(g));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ModelError(std::string("malformed detector model payload: ") + e.what());
    }
    if (model.scales.empty()) throw ModelError("detector model has no scales");
    if (static_cast<std::size_t>(model.extractor.scales) != model.scales.size())
        throw ModelError("detector model declares K=" + std::to_string(model.extractor.scales) + " but stores " +
                         std::to_string(model.scales.size()) + " scales");
    return model;
}

void save_model(const DetectorModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << serialize_model(model);
    if (!out) throw std::runtime_error("failed writing " + path);
}

DetectorModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ModelError("cannot open model file " + path);
    const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    return parse_model(text);
}

}  // namespace octgate
