#pragma once

// Versioned JSON envelope shared by every persisted model:
//   {"format": <kind>, "format_version": 1, "checksum": "fnv1a64:<hex>", "payload": {...}}
// The checksum covers the compact serialization of the payload.

#include "octgate/errors.hpp"
#include "octgate/features.hpp"

#include <json.hpp>

#include <Eigen/Core>

#include <string>
#include <string_view>

namespace octgate::detail {

inline constexpr int kEnvelopeVersion = 1;

inline std::string payload_checksum(const nlohmann::json& payload) {
    return "fnv1a64:" + fnv1a_hex(payload.dump());
}

inline std::string write_envelope(std::string_view kind, const nlohmann::json& payload) {
    nlohmann::json env;
    env["format"] = kind;
    env["format_version"] = kEnvelopeVersion;
    env["checksum"] = payload_checksum(payload);
    env["payload"] = payload;
    return env.dump(1) + "\n";
}

inline nlohmann::json read_envelope(std::string_view text, std::string_view kind) {
    nlohmann::json env;
    try {
        env = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ModelError(std::string("model file is not valid JSON: ") + e.what());
    }
    if (!env.is_object() || !env.contains("format") || !env.contains("payload"))
        throw ModelError("model file is missing the envelope fields");
    if (env["format"] != kind)
        throw ModelError("model file has format \"" + env["format"].get<std::string>() + "\", expected \"" +
                         std::string(kind) + "\"");
    const int version = env.value("format_version", -1);
    if (version != kEnvelopeVersion)
        throw ModelError("unsupported model format_version " + std::to_string(version) + " (this build reads " +
                         std::to_string(kEnvelopeVersion) + ")");
    const std::string expected = env.value("checksum", "");
    const std::string actual = payload_checksum(env["payload"]);
    if (expected != actual)
        throw ChecksumError("model payload checksum mismatch: stored " + expected + ", computed " + actual);
    return env["payload"];
}

inline nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
    nlohmann::json a = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

inline Eigen::VectorXd vector_from_json(const nlohmann::json& a) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i) v(static_cast<Eigen::Index>(i)) = a[i].get<double>();
    return v;
}

/// Lower triangle, row by row (row i has i + 1 entries).
inline nlohmann::json lower_to_json(const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index c = 0; c <= r; ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Eigen::MatrixXd lower_from_json(const nlohmann::json& rows, bool symmetric) {
    const auto n = static_cast<Eigen::Index>(rows.size());
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
        const auto& row = rows[static_cast<std::size_t>(r)];
        if (static_cast<Eigen::Index>(row.size()) != r + 1)
            throw ModelError("triangular matrix row " + std::to_string(r) + " has wrong length");
        for (Eigen::Index c = 0; c <= r; ++c) {
            m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
            if (symmetric) m(c, r) = m(r, c);
        }
    }
    return m;
}

inline nlohmann::json descriptor_to_json(const ExtractorDescriptor& d) {
    return {{"kind", std::string(to_string(d.kind))}, {"K", d.scales},
            {"dims", d.dims},                          {"config_digest", d.config_digest},
            {"model_path", d.model_path},              {"tap_points", d.tap_points},
            {"input_name", d.input_name}};
}

inline ExtractorDescriptor descriptor_from_json(const nlohmann::json& j) {
    ExtractorDescriptor d;
    d.kind = extractor_kind_from_string(j.at("kind").get<std::string>());
    d.scales = j.at("K").get<int>();
    d.dims = j.at("dims").get<std::vector<std::size_t>>();
    d.config_digest = j.value("config_digest", "");
    d.model_path = j.value("model_path", "");
    d.tap_points = j.value("tap_points", std::vector<std::string>{});
    d.input_name = j.value("input_name", "");
    return d;
}

inline nlohmann::json preproc_to_json(const PreprocConfig& p) {
    return {{"target_height", p.target_height}, {"target_width", p.target_width},
            {"channel_means", p.channel_means}, {"channel_stds", p.channel_stds},
            {"byte_range_max", p.byte_range_max}, {"rescale_input", p.rescale_input}};
}

inline PreprocConfig preproc_from_json(const nlohmann::json& j) {
    PreprocConfig p;
    p.target_height = j.at("target_height").get<int>();
    p.target_width = j.at("target_width").get<int>();
    p.channel_means = j.at("channel_means").get<std::array<double, 3>>();
    p.channel_stds = j.at("channel_stds").get<std::array<double, 3>>();
    p.byte_range_max = j.at("byte_range_max").get<double>();
    p.rescale_input = j.value("rescale_input", false);
    p.validate();
    return p;
}

}  // namespace octgate::detail
