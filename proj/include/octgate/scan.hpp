#pragma once

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace octgate {

inline constexpr std::size_t kDefaultDepth = 674;      // pixels per A-scan
inline constexpr std::size_t kDefaultWindow = 10;      // A-scans per M-scan
inline constexpr double kAcquisitionHz = 700.0;
inline constexpr double kDepthResolutionUm = 3.7;      // µm per pixel

/// Real-valued grid, rows x cols. For M-scan derived grids rows run over
/// time (A-scan index) and cols over depth.
using Grid = Eigen::MatrixXd;

/// One depth profile.
struct AScan {
    std::vector<float> samples;
    double depth_resolution_um = kDepthResolutionUm;
};

/// A window of W consecutive A-scans sharing depth P, stored row-major
/// (A-scan index major, depth minor) exactly as in the container payload.
class MScan {
public:
    MScan() = default;
    MScan(std::size_t width, std::size_t depth, std::vector<float> data,
          double acquisition_hz = kAcquisitionHz,
          double depth_resolution_um = kDepthResolutionUm);

    static MScan zeros(std::size_t width, std::size_t depth);
    static MScan from_ascans(std::span<const AScan> ascans);

    std::size_t width() const noexcept { return width_; }
    std::size_t depth() const noexcept { return depth_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    std::span<const float> ascan(std::size_t j) const { return {data_.data() + j * depth_, depth_}; }
    std::span<float> ascan(std::size_t j) { return {data_.data() + j * depth_, depth_}; }
    AScan ascan_copy(std::size_t j) const;

    float operator()(std::size_t j, std::size_t i) const { return data_[j * depth_ + i]; }
    float& operator()(std::size_t j, std::size_t i) { return data_[j * depth_ + i]; }

    std::span<const float> data() const noexcept { return data_; }
    std::span<float> data() noexcept { return data_; }

    double acquisition_hz() const noexcept { return acquisition_hz_; }
    double depth_resolution_um() const noexcept { return depth_resolution_um_; }

    bool all_finite() const;
    /// Samples widened to a W x P grid.
    Grid to_grid() const;

    /// Bit-exact equality of shape and samples.
    friend bool operator==(const MScan& a, const MScan& b);

private:
    std::size_t width_ = 0;
    std::size_t depth_ = 0;
    std::vector<float> data_;
    double acquisition_hz_ = kAcquisitionHz;
    double depth_resolution_um_ = kDepthResolutionUm;
};

struct PreprocConfig {
    int target_height = 64;
    int target_width = 224;
    std::array<double, 3> channel_means{0.485, 0.456, 0.406};
    std::array<double, 3> channel_stds{0.229, 0.224, 0.225};
    double byte_range_max = 255.0;
    /// Apply per-M-scan min/max rescaling before resizing. Off by default:
    /// ingested and synthetic data are already in byte range.
    bool rescale_input = false;

    /// Throws std::invalid_argument when an invariant is violated.
    void validate() const;
    friend bool operator==(const PreprocConfig&, const PreprocConfig&) = default;
};

/// Three-channel image handed to feature extractors.
struct PreppedImage {
    std::array<Grid, 3> channels;

    Eigen::Index height() const { return channels[0].rows(); }
    Eigen::Index width() const { return channels[0].cols(); }
};

// --- `.mscn` container ------------------------------------------------------
//
// Layout (little-endian):
//   char[4] magic "MSCN" | u16 version (=1) | u32 n | u32 W | u32 P
//   n * W * P f32 samples, A-scan major, depth minor.

inline constexpr std::uint16_t kContainerVersion = 1;
inline constexpr std::size_t kContainerHeaderBytes = 18;

std::vector<MScan> read_mscan_container(const std::string& path);
std::vector<MScan> read_mscan_container(std::istream& in);
void write_mscan_container(const std::string& path, std::span<const MScan> mscans);
void write_mscan_container(std::ostream& out, std::span<const MScan> mscans);

/// One A-scan per row, comma separated.
std::vector<AScan> read_ascans_csv(const std::string& path);
std::vector<AScan> read_ascans_csv(std::istream& in);

// --- preprocessing ------------------------------------------------------------

/// Consecutive windows [i*stride, i*stride + window); a short trailing
/// remainder is dropped.
std::vector<MScan> window_stream(std::span<const AScan> ascans, std::size_t window = kDefaultWindow,
                                 std::size_t stride = kDefaultWindow);

/// Linear per-M-scan map of [min, max] onto [0, byte_range_max]. A constant
/// M-scan maps to all zeros.
MScan rescale_to_byte_range(const MScan& mscan, double byte_range_max = 255.0);

/// Separable Catmull-Rom (a = -0.5) resampling with clamped edges and
/// half-pixel centre alignment.
Grid resize_bicubic(const Grid& input, int target_rows, int target_cols);
Grid resize_bicubic(const MScan& mscan, int target_rows = 64, int target_cols = 224);

PreppedImage normalize_channels(const Grid& grid, const PreprocConfig& config = {});

/// Full chain: optional rescale, bicubic resize, channel normalization.
PreppedImage preprocess(const MScan& mscan, const PreprocConfig& config = {});

}  // namespace octgate
