#pragma once

#include "octgate/rng.hpp"
#include "octgate/scan.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace octgate {

// --- corruptions ------------------------------------------------------------------

enum class CorruptionKind { noise, smoothing, contrast, intensity, stripes, rectangle, shift, zoom };

inline constexpr std::array<CorruptionKind, 8> kAllCorruptions = {
    CorruptionKind::noise,   CorruptionKind::smoothing, CorruptionKind::contrast, CorruptionKind::intensity,
    CorruptionKind::stripes, CorruptionKind::rectangle, CorruptionKind::shift,    CorruptionKind::zoom};

/// Kinds the supervised baseline is trained on.
inline constexpr std::array<CorruptionKind, 4> kSupervisedCorruptions = {
    CorruptionKind::noise, CorruptionKind::smoothing, CorruptionKind::shift, CorruptionKind::intensity};

/// Kinds the supervised baseline never sees.
inline constexpr std::array<CorruptionKind, 4> kUnseenCorruptions = {
    CorruptionKind::stripes, CorruptionKind::rectangle, CorruptionKind::zoom, CorruptionKind::contrast};

std::string_view to_string(CorruptionKind kind);
CorruptionKind corruption_from_string(std::string_view name);

/// Sampling ranges. Defaults are the published corruption parameters.
struct CorruptionRanges {
    double noise_sigma = 50.0;
    double smoothing_sigma = 5.0;
    double smoothing_truncate = 4.0;                        // kernel radius in sigmas
    std::vector<double> contrast_factors{0.1, 0.2, 0.3, 2.0, 3.0, 4.0};
    double contrast_pivot = 127.5;
    double intensity_min = 25.0;                            // |shift| range
    double intensity_max = 50.0;
    double fill_min = 100.0;                                // stripe / rectangle intensity
    double fill_max = 200.0;
    std::size_t stripes_min = 1;
    std::size_t stripes_max = 2;
    std::size_t rect_ascans_min = 6;                        // M-scan stretch
    std::size_t rect_ascans_max = 10;
    std::size_t rect_depth_min = 15;
    std::size_t rect_depth_max = 30;
    int shift_min = 25;                                     // px
    int shift_max = 100;
    double zoom_min = 1.5;
    double zoom_max = 1.75;
    double zoom_origin = 0.0;                               // depth index held fixed
    double clip_max = 255.0;
};

/// Concrete parameters of one applied corruption. Only the fields of
/// `kind` are meaningful.
struct CorruptionParams {
    CorruptionKind kind = CorruptionKind::noise;
    // noise
    double noise_sigma = 50.0;
    std::uint64_t noise_seed = 0;
    // smoothing
    double smoothing_sigma = 5.0;
    double smoothing_truncate = 4.0;
    // contrast
    double contrast_factor = 1.0;
    double contrast_pivot = 127.5;
    // intensity
    double intensity_shift = 0.0;
    // stripes
    std::vector<std::size_t> stripe_columns;
    std::vector<double> stripe_values;
    // rectangle
    std::size_t rect_ascan_start = 0;
    std::size_t rect_ascan_count = 0;
    std::size_t rect_depth_start = 0;
    std::size_t rect_depth_count = 0;
    double rect_value = 0.0;
    // shift
    int shift_pixels = 0;
    std::vector<bool> shift_positive;                       // per A-scan: +shift or -shift
    // zoom
    double zoom_factor = 1.0;
    double zoom_origin = 0.0;
    // all kinds
    double clip_max = 255.0;
};

struct CorruptionSpec {
    CorruptionKind kind = CorruptionKind::noise;
    std::uint64_t seed = 0;
    CorruptionRanges ranges{};
};

/// Draw the parameters for one corruption of a W x P M-scan.
CorruptionParams sample_corruption(CorruptionKind kind, std::size_t width, std::size_t depth, Rng& rng,
                                   const CorruptionRanges& ranges = {});

/// Deterministically apply concrete parameters; output clipped to [0, clip_max].
MScan apply_corruption(const MScan& mscan, const CorruptionParams& params);

struct CorruptionResult {
    MScan mscan;
    CorruptionParams params;
};

CorruptionResult corrupt_detailed(const MScan& mscan, const CorruptionSpec& spec);
MScan corrupt(const MScan& mscan, const CorruptionSpec& spec);

// --- labeled data ----------------------------------------------------------------------

struct LabeledMScan {
    MScan mscan;
    std::vector<double> ilm_truth;                  // one index per A-scan, pre-corruption
    bool is_corrupted = false;
    std::optional<CorruptionKind> corruption_kind;  // set iff is_corrupted
};

/// Corrupt exactly round(p * n) scans chosen uniformly without replacement;
/// each gets a kind drawn uniformly from `kinds`. Labels and truths carry
/// over; corrupted entries keep their pre-corruption truth.
std::vector<LabeledMScan> corrupt_fraction(std::span<const LabeledMScan> mscans, double p,
                                           std::span<const CorruptionKind> kinds, std::uint64_t seed,
                                           const CorruptionRanges& ranges = {});

// --- synthetic M-scans --------------------------------------------------------------------

struct SynthParams {
    std::size_t width = kDefaultWindow;
    std::size_t depth = kDefaultDepth;
    std::size_t n_layers = 3;                       // deeper layers below the ILM (2 to 4),
                                                    // the last one hyperreflective
    std::vector<double> layer_thickness{30.0, 40.0, 25.0};  // px, cycled; hyperreflective band separate
    double hyperreflective_thickness = 13.0;        // px
    double nfl_thickness = 9.0;                     // px, bright ramp right below the ILM
    double thickness_jitter = 0.15;                 // per-scan relative spread of every thickness
    double ilm_depth_min = 150.0;                   // px
    double ilm_depth_max = 400.0;
    double background_level = 10.0;                 // vitreous
    double ilm_brightness = 215.0;
    std::vector<double> layer_brightness{110.0, 70.0, 125.0, 85.0};
    double hyperreflective_brightness = 170.0;
    double brightness_jitter = 0.12;                // per-scan relative gain spread
    double speckle_contrast = 0.25;                 // multiplicative noise std
    double drift_rate = 0.6;                        // random-walk step std, px per A-scan

    void validate() const;
};

/// One layered-retina M-scan with the exact ILM edge indices used. The ILM
/// edge index e is the last vitreous sample: depth e + 1 is the first bright
/// retina sample.
LabeledMScan synth_mscan(const SynthParams& params, Rng& rng);

/// Independent draws; item i uses the stream derive_seed(seed, synth, i).
std::vector<LabeledMScan> synth_dataset(std::size_t n, const SynthParams& params, std::uint64_t seed);

inline constexpr std::size_t kTrainPresetSize = 334;
inline constexpr std::size_t kTestPresetSize = 2000;
inline constexpr std::size_t kRealOodPresetSize = 258;  // per class

std::vector<MScan> mscans_of(std::span<const LabeledMScan> labeled);

}  // namespace octgate
