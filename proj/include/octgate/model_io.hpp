#pragma once

#include "octgate/maha.hpp"

#include <string>
#include <string_view>

namespace octgate {

/// Detector model file: JSON envelope {format, format_version, checksum,
/// payload} where the payload holds the extractor descriptor, preprocessing
/// config, tau, q, N, epsilon and per-scale {mean, covariance, chol_lower,
/// epsilon_used, loading}. Doubles are written in shortest round-trip form,
/// so a reloaded model scores bit-identically.
std::string serialize_model(const DetectorModel& model);
DetectorModel parse_model(std::string_view text);

void save_model(const DetectorModel& model, const std::string& path);
DetectorModel load_model(const std::string& path);

}  // namespace octgate
