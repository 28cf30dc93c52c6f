#include "octgate/datagen.hpp"

#include "octgate/bicubic.hpp"
#include "octgate/signal.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace octgate {

namespace {

constexpr std::uint64_t kStreamSynth = 0x53594e54;      // "SYNT"
constexpr std::uint64_t kStreamSelect = 0x53454c45;     // "SELE"
constexpr std::uint64_t kStreamCorrupt = 0x434f5252;    // "CORR"

float clip(double v, double hi) {
    return static_cast<float>(std::clamp(v, 0.0, hi));
}

std::size_t draw_size(Rng& rng, std::size_t lo, std::size_t hi) {
    return static_cast<std::size_t>(rng.uniform_int(static_cast<std::int64_t>(lo), static_cast<std::int64_t>(hi)));
}

}  // namespace

std::string_view to_string(CorruptionKind kind) {
    switch (kind) {
        case CorruptionKind::noise: return "noise";
        case CorruptionKind::smoothing: return "smoothing";
        case CorruptionKind::contrast: return "contrast";
        case CorruptionKind::intensity: return "intensity";
        case CorruptionKind::stripes: return "stripes";
        case CorruptionKind::rectangle: return "rectangle";
        case CorruptionKind::shift: return "shift";
        case CorruptionKind::zoom: return "zoom";
    }
    return "unknown";
}

CorruptionKind corruption_from_string(std::string_view name) {
    for (auto k : kAllCorruptions)
        if (to_string(k) == name) return k;
    std::string valid;
    for (auto k : kAllCorruptions) valid += (valid.empty() ? "" : ", ") + std::string(to_string(k));
    throw std::invalid_argument("unknown corruption \"" + std::string(name) + "\" (valid: " + valid + ")");
}

CorruptionParams sample_corruption(CorruptionKind kind, std::size_t width, std::size_t depth, Rng& rng,
                                   const CorruptionRanges& r) {
    if (width == 0 || depth == 0) throw std::invalid_argument("sample_corruption: empty M-scan shape");
    CorruptionParams p;
    p.kind = kind;
    p.clip_max = r.clip_max;
    switch (kind) {
        case CorruptionKind::noise:
            p.noise_sigma = r.noise_sigma;
            p.noise_seed = rng.next();
            break;
        case CorruptionKind::smoothing:
            p.smoothing_sigma = r.smoothing_sigma;
            p.smoothing_truncate = r.smoothing_truncate;
            break;
        case CorruptionKind::contrast: {
            if (r.contrast_factors.empty()) throw std::invalid_argument("contrast: empty factor set");
            const auto i = draw_size(rng, 0, r.contrast_factors.size() - 1);
            p.contrast_factor = r.contrast_factors[i];
            p.contrast_pivot = r.contrast_pivot;
            break;
        }
        case CorruptionKind::intensity: {
            const bool positive = rng.coin();
            const double magnitude = rng.uniform(r.intensity_min, r.intensity_max);
            p.intensity_shift = positive ? magnitude : -magnitude;
            break;
        }
        case CorruptionKind::stripes: {
            const std::size_t count = std::min(draw_size(rng, r.stripes_min, r.stripes_max), width);
            std::vector<std::size_t> cols(width);
            std::iota(cols.begin(), cols.end(), std::size_t{0});
            for (std::size_t i = 0; i < count; ++i) {  // partial Fisher-Yates
                const auto j = draw_size(rng, i, width - 1);
                std::swap(cols[i], cols[j]);
            }
            cols.resize(count);
            std::sort(cols.begin(), cols.end());
            p.stripe_columns = cols;
            for (std::size_t i = 0; i < count; ++i) p.stripe_values.push_back(rng.uniform(r.fill_min, r.fill_max));
            break;
        }
        case CorruptionKind::rectangle: {
            p.rect_ascan_count = std::min(draw_size(rng, r.rect_ascans_min, r.rect_ascans_max), width);
            p.rect_depth_count = std::min(draw_size(rng, r.rect_depth_min, r.rect_depth_max), depth);
            p.rect_ascan_start = draw_size(rng, 0, width - p.rect_ascan_count);
            p.rect_depth_start = draw_size(rng, 0, depth - p.rect_depth_count);
            p.rect_value = rng.uniform(r.fill_min, r.fill_max);
            break;
        }
        case CorruptionKind::shift: {
            p.shift_pixels = static_cast<int>(rng.uniform_int(r.shift_min, r.shift_max));
            p.shift_positive.resize(width);
            if (width < 2) {
                p.shift_positive.assign(width, rng.coin());
                break;
            }
            for (;;) {
                std::size_t up = 0;
                for (std::size_t j = 0; j < width; ++j) up += (p.shift_positive[j] = rng.coin()) ? 1 : 0;
                if (up != 0 && up != width) break;
            }
            break;
        }
        case CorruptionKind::zoom:
            p.zoom_factor = rng.uniform(r.zoom_min, r.zoom_max);
            p.zoom_origin = r.zoom_origin;
            break;
    }
    return p;
}

MScan apply_corruption(const MScan& in, const CorruptionParams& p) {
    const std::size_t W = in.width();
    const std::size_t P = in.depth();
    MScan out = in;
    const double hi = p.clip_max;
    switch (p.kind) {
        case CorruptionKind::noise: {
            Rng rng(p.noise_seed);
            for (auto& v : out.data()) v = clip(static_cast<double>(v) + rng.normal(0.0, p.noise_sigma), hi);
            break;
        }
        case CorruptionKind::smoothing: {
            const auto kernel = gaussian_kernel(p.smoothing_sigma, p.smoothing_truncate);
            for (std::size_t j = 0; j < W; ++j) {
                const auto smoothed = convolve_clamped(in.ascan(j), kernel);
                auto dst = out.ascan(j);
                for (std::size_t i = 0; i < P; ++i) dst[i] = clip(smoothed[i], hi);
            }
            break;
        }
        case CorruptionKind::contrast:
            for (auto& v : out.data())
                v = clip((static_cast<double>(v) - p.contrast_pivot) * p.contrast_factor + p.contrast_pivot, hi);
            break;
        case CorruptionKind::intensity:
            for (auto& v : out.data()) v = clip(static_cast<double>(v) + p.intensity_shift, hi);
            break;
        case CorruptionKind::stripes:
            if (p.stripe_columns.size() != p.stripe_values.size())
                throw std::invalid_argument("stripes: column/value count mismatch");
            for (std::size_t s = 0; s < p.stripe_columns.size(); ++s) {
                if (p.stripe_columns[s] >= W) throw std::invalid_argument("stripes: column out of range");
                const float v = clip(p.stripe_values[s], hi);
                for (auto& x : out.ascan(p.stripe_columns[s])) x = v;
            }
            break;
        case CorruptionKind::rectangle: {
            if (p.rect_ascan_start + p.rect_ascan_count > W || p.rect_depth_start + p.rect_depth_count > P)
                throw std::invalid_argument("rectangle: box exceeds the M-scan");
            const float v = clip(p.rect_value, hi);
            for (std::size_t j = p.rect_ascan_start; j < p.rect_ascan_start + p.rect_ascan_count; ++j)
                for (std::size_t i = p.rect_depth_start; i < p.rect_depth_start + p.rect_depth_count; ++i) out(j, i) = v;
            break;
        }
        case CorruptionKind::shift: {
            if (p.shift_positive.size() != W) throw std::invalid_argument("shift: direction list length != W");
            const auto n = static_cast<std::ptrdiff_t>(P);
            for (std::size_t j = 0; j < W; ++j) {
                const std::ptrdiff_t s = p.shift_positive[j] ? p.shift_pixels : -p.shift_pixels;
                const auto src = in.ascan(j);
                auto dst = out.ascan(j);
                for (std::ptrdiff_t i = 0; i < n; ++i) dst[static_cast<std::size_t>(((i + s) % n + n) % n)] = src[i];
            }
            break;
        }
        case CorruptionKind::zoom: {
            if (!(p.zoom_factor > 0.0)) throw std::invalid_argument("zoom: factor must be positive");
            for (std::size_t j = 0; j < W; ++j) {
                const auto src = in.ascan(j);
                auto dst = out.ascan(j);
                for (std::size_t i = 0; i < P; ++i) {
                    const double x = p.zoom_origin + (static_cast<double>(i) - p.zoom_origin) / p.zoom_factor;
                    dst[i] = clip(cubic_sample(src, x), hi);
                }
            }
            break;
        }
    }
    return out;
}

CorruptionResult corrupt_detailed(const MScan& mscan, const CorruptionSpec& spec) {
    Rng rng(spec.seed);
    auto params = sample_corruption(spec.kind, mscan.width(), mscan.depth(), rng, spec.ranges);
    auto out = apply_corruption(mscan, params);
    return {std::move(out), std::move(params)};
}

MScan corrupt(const MScan& mscan, const CorruptionSpec& spec) { return corrupt_detailed(mscan, spec).mscan; }

std::vector<LabeledMScan> corrupt_fraction(std::span<const LabeledMScan> mscans, double p,
                                           std::span<const CorruptionKind> kinds, std::uint64_t seed,
                                           const CorruptionRanges& ranges) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("corrupt_fraction: p must lie in [0, 1]");
    const std::size_t n = mscans.size();
    const auto count = static_cast<std::size_t>(std::llround(p * static_cast<double>(n)));
    if (count > 0 && kinds.empty()) throw std::invalid_argument("corrupt_fraction: no corruption kinds given");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng select(derive_seed(seed, kStreamSelect, 0));
    for (std::size_t i = 0; i < count; ++i) {
        const auto j = draw_size(select, i, n - 1);
        std::swap(order[i], order[j]);
    }

    std::vector<LabeledMScan> out(mscans.begin(), mscans.end());
    for (std::size_t r = 0; r < count; ++r) {
        const std::size_t idx = order[r];
        Rng rng(derive_seed(seed, kStreamCorrupt, idx));
        const auto kind = kinds[draw_size(rng, 0, kinds.size() - 1)];
        const auto params = sample_corruption(kind, out[idx].mscan.width(), out[idx].mscan.depth(), rng, ranges);
        out[idx].mscan = apply_corruption(out[idx].mscan, params);
        out[idx].is_corrupted = true;
        out[idx].corruption_kind = kind;
    }
    return out;
}

// --- synthetic M-scans -----------------------------------------------------------------------

void SynthParams::validate() const {
    if (width == 0 || depth < 16) throw std::invalid_argument("SynthParams: need width >= 1 and depth >= 16");
    if (n_layers < 2 || n_layers > 4) throw std::invalid_argument("SynthParams: n_layers must lie in [2, 4]");
    if (layer_thickness.empty()) throw std::invalid_argument("SynthParams: layer_thickness is empty");
    for (double t : layer_thickness)
        if (!(t > 0.0)) throw std::invalid_argument("SynthParams: layer thickness must be positive");
    if (!(hyperreflective_thickness > 0.0) || !(nfl_thickness > 0.0))
        throw std::invalid_argument("SynthParams: layer thickness must be positive");
    if (!(ilm_depth_min >= 0.0 && ilm_depth_max >= ilm_depth_min && ilm_depth_max < static_cast<double>(depth) - 1.0))
        throw std::invalid_argument("SynthParams: ILM depth range must lie within [0, P - 1)");
    if (layer_brightness.empty()) throw std::invalid_argument("SynthParams: layer_brightness is empty");
    auto in_byte = [](double v) { return v >= 0.0 && v <= 255.0; };
    for (double b : layer_brightness)
        if (!in_byte(b)) throw std::invalid_argument("SynthParams: layer brightness outside [0, 255]");
    if (!in_byte(background_level) || !in_byte(ilm_brightness) || !in_byte(hyperreflective_brightness))
        throw std::invalid_argument("SynthParams: brightness outside [0, 255]");
    if (speckle_contrast < 0.0 || drift_rate < 0.0 || brightness_jitter < 0.0 || brightness_jitter >= 1.0 ||
        thickness_jitter < 0.0 || thickness_jitter >= 1.0)
        throw std::invalid_argument("SynthParams: negative noise parameter");
}

LabeledMScan synth_mscan(const SynthParams& sp, Rng& rng) {
    sp.validate();
    const std::size_t W = sp.width;
    const std::size_t P = sp.depth;

    // scan-level anatomy
    const double gain = 1.0 + rng.uniform(-sp.brightness_jitter, sp.brightness_jitter);
    auto jitter = [&](double nominal) {
        return nominal * (1.0 + rng.uniform(-sp.thickness_jitter, sp.thickness_jitter));
    };
    const double nfl_thickness = jitter(sp.nfl_thickness);
    std::vector<double> thickness;
    std::vector<double> brightness;
    for (std::size_t k = 0; k + 1 < sp.n_layers; ++k) {
        thickness.push_back(jitter(sp.layer_thickness[k % sp.layer_thickness.size()]));
        brightness.push_back(sp.layer_brightness[k % sp.layer_brightness.size()]);
    }
    thickness.push_back(jitter(sp.hyperreflective_thickness));
    brightness.push_back(sp.hyperreflective_brightness);
    const double choroid_level = 0.55 * sp.hyperreflective_brightness;
    const double choroid_decay = rng.uniform(25.0, 45.0);

    // per-A-scan ILM edge: random walk reflected into the allowed range
    const double lo = sp.ilm_depth_min;
    const double hi = sp.ilm_depth_max;
    std::vector<double> edge(W);
    double pos = rng.uniform(lo, hi);
    for (std::size_t j = 0; j < W; ++j) {
        if (j > 0 && sp.drift_rate > 0.0) pos += rng.normal(0.0, sp.drift_rate);
        if (pos < lo) pos = std::min(hi, 2.0 * lo - pos);
        if (pos > hi) pos = std::max(lo, 2.0 * hi - pos);
        edge[j] = std::clamp(std::round(pos), lo, hi);
    }

    LabeledMScan out;
    out.mscan = MScan::zeros(W, P);
    out.ilm_truth = edge;
    std::vector<double> profile(P);
    for (std::size_t j = 0; j < W; ++j) {
        const auto e = static_cast<std::size_t>(edge[j]);
        for (std::size_t i = 0; i < P; ++i) {
            double v = sp.background_level;
            if (i > e) {
                const double d = static_cast<double>(i - e - 1);  // depth below the first retina sample
                if (d < nfl_thickness) {
                    const double t = d / nfl_thickness;
                    v = gain * ((1.0 - t) * sp.ilm_brightness + t * brightness.front());
                } else {
                    double top = nfl_thickness;
                    bool placed = false;
                    for (std::size_t k = 0; k < thickness.size(); ++k) {
                        if (d < top + thickness[k]) {
                            v = gain * brightness[k];
                            placed = true;
                            break;
                        }
                        top += thickness[k];
                    }
                    if (!placed) {
                        const double below = d - top;
                        v = sp.background_level +
                            gain * (choroid_level - sp.background_level) * std::exp(-below / choroid_decay);
                    }
                }
            }
            profile[i] = v;
        }
        auto dst = out.mscan.ascan(j);
        for (std::size_t i = 0; i < P; ++i) {
            double v = profile[i];
            if (sp.speckle_contrast > 0.0) v *= std::max(0.0, 1.0 + sp.speckle_contrast * rng.normal());
            dst[i] = clip(v, 255.0);
        }
    }
    return out;
}

std::vector<LabeledMScan> synth_dataset(std::size_t n, const SynthParams& params, std::uint64_t seed) {
    if (n == 0) throw std::invalid_argument("synth_dataset: n must be >= 1");
    params.validate();
    std::vector<LabeledMScan> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        Rng rng(derive_seed(seed, kStreamSynth, i));
        out.push_back(synth_mscan(params, rng));
    }
    return out;
}

std::vector<MScan> mscans_of(std::span<const LabeledMScan> labeled) {
    std::vector<MScan> out;
    out.reserve(labeled.size());
    for (const auto& l : labeled) out.push_back(l.mscan);
    return out;
}

}  // namespace octgate
