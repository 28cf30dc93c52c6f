#include "octgate/scan.hpp"

#include "octgate/errors.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace octgate {

// --- MScan ---------------------------------------------------------------------

MScan::MScan(std::size_t width, std::size_t depth, std::vector<float> data, double acquisition_hz,
             double depth_resolution_um)
    : width_(width),
      depth_(depth),
      data_(std::move(data)),
      acquisition_hz_(acquisition_hz),
      depth_resolution_um_(depth_resolution_um) {
    if (width_ == 0 || depth_ == 0) throw std::invalid_argument("MScan: W and P must be positive");
    if (data_.size() != width_ * depth_)
        throw std::invalid_argument("MScan: data size " + std::to_string(data_.size()) +
                                    " does not match W*P = " + std::to_string(width_ * depth_));
}

MScan MScan::zeros(std::size_t width, std::size_t depth) {
    return MScan(width, depth, std::vector<float>(width * depth, 0.0f));
}

MScan MScan::from_ascans(std::span<const AScan> ascans) {
    if (ascans.empty()) throw std::invalid_argument("MScan::from_ascans: no A-scans");
    const std::size_t depth = ascans.front().samples.size();
    std::vector<float> data;
    data.reserve(ascans.size() * depth);
    for (const auto& a : ascans) {
        if (a.samples.size() != depth)
            throw std::invalid_argument("MScan::from_ascans: A-scans differ in depth");
        data.insert(data.end(), a.samples.begin(), a.samples.end());
    }
    return MScan(ascans.size(), depth, std::move(data), kAcquisitionHz,
                 ascans.front().depth_resolution_um);
}

AScan MScan::ascan_copy(std::size_t j) const {
    const auto s = ascan(j);
    return AScan{{s.begin(), s.end()}, depth_resolution_um_};
}

bool MScan::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](float v) { return std::isfinite(v); });
}

Grid MScan::to_grid() const {
    Grid g(static_cast<Eigen::Index>(width_), static_cast<Eigen::Index>(depth_));
    for (std::size_t j = 0; j < width_; ++j)
        for (std::size_t i = 0; i < depth_; ++i) g(j, i) = data_[j * depth_ + i];
    return g;
}

bool operator==(const MScan& a, const MScan& b) {
    return a.width_ == b.width_ && a.depth_ == b.depth_ &&
           (a.data_.empty() ||
            std::memcmp(a.data_.data(), b.data_.data(), a.data_.size() * sizeof(float)) == 0);
}

// --- PreprocConfig -----------------------------------------------------------------

void PreprocConfig::validate() const {
    if (target_height < 2 || target_width < 2)
        throw std::invalid_argument("PreprocConfig: target dims must be >= 2");
    for (double s : channel_stds)
        if (!(s > 0.0)) throw std::invalid_argument("PreprocConfig: channel stds must be > 0");
    if (!(byte_range_max > 0.0)) throw std::invalid_argument("PreprocConfig: byte_range_max must be > 0");
}

// --- container I/O -------------------------------------------------------------------

namespace {

static_assert(sizeof(float) == 4 && std::numeric_limits<float>::is_iec559);

void put_u16(std::ostream& out, std::uint16_t v) {
    const char b[2] = {static_cast<char>(v & 0xFF), static_cast<char>(v >> 8)};
    out.write(b, 2);
}

void put_u32(std::ostream& out, std::uint32_t v) {
    char b[4];
    for (int k = 0; k < 4; ++k) b[k] = static_cast<char>((v >> (8 * k)) & 0xFF);
    out.write(b, 4);
}

std::uint32_t get_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_f32_block(std::ostream& out, std::span<const float> values) {
    if constexpr (std::endian::native == std::endian::little) {
        out.write(reinterpret_cast<const char*>(values.data()),
                  static_cast<std::streamsize>(values.size() * sizeof(float)));
    } else {
        for (float v : values) put_u32(out, std::bit_cast<std::uint32_t>(v));
    }
}

void decode_f32_block(const unsigned char* bytes, std::span<float> values) {
    for (std::size_t k = 0; k < values.size(); ++k)
        values[k] = std::bit_cast<float>(get_u32(bytes + 4 * k));
}

}  // namespace

std::vector<MScan> read_mscan_container(std::istream& in) {
    unsigned char header[kContainerHeaderBytes];
    in.read(reinterpret_cast<char*>(header), kContainerHeaderBytes);
    const auto got = static_cast<std::size_t>(in.gcount());
    if (got < 4 || std::memcmp(header, "MSCN", 4) != 0) throw FormatError("bad magic, expected \"MSCN\"", 0);
    if (got < kContainerHeaderBytes) throw FormatError("truncated header", got);

    const std::uint16_t version = static_cast<std::uint16_t>(header[4] | (header[5] << 8));
    if (version != kContainerVersion)
        throw FormatError("unsupported container version " + std::to_string(version), 4);
    const std::uint32_t n = get_u32(header + 6);
    const std::uint32_t width = get_u32(header + 10);
    const std::uint32_t depth = get_u32(header + 14);
    if (width == 0 || depth == 0)
        throw FormatError("W*P mismatch: declared W=" + std::to_string(width) + " P=" + std::to_string(depth), 10);

    const std::size_t per_scan = static_cast<std::size_t>(width) * depth;
    const std::size_t scan_bytes = per_scan * sizeof(float);
    std::vector<unsigned char> buffer(scan_bytes);
    std::vector<MScan> result;
    result.reserve(n);
    for (std::uint32_t k = 0; k < n; ++k) {
        in.read(reinterpret_cast<char*>(buffer.data()), static_cast<std::streamsize>(scan_bytes));
        if (static_cast<std::size_t>(in.gcount()) != scan_bytes) {
            const std::uint64_t offset = kContainerHeaderBytes + static_cast<std::uint64_t>(k) * scan_bytes;
            throw FormatError("truncated payload: declared " + std::to_string(n) + " M-scans, data for " +
                                  std::to_string(k) + " complete",
                              offset);
        }
        std::vector<float> data(per_scan);
        decode_f32_block(buffer.data(), data);
        result.emplace_back(width, depth, std::move(data));
    }
    if (in.peek() != std::char_traits<char>::eof()) {
        const std::uint64_t offset = kContainerHeaderBytes + static_cast<std::uint64_t>(n) * scan_bytes;
        throw FormatError("W*P mismatch: trailing bytes after declared payload", offset);
    }
    return result;
}

std::vector<MScan> read_mscan_container(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    return read_mscan_container(in);
}

void write_mscan_container(std::ostream& out, std::span<const MScan> mscans) {
    if (mscans.empty()) throw std::invalid_argument("write_mscan_container: no M-scans");
    const std::size_t width = mscans.front().width();
    const std::size_t depth = mscans.front().depth();
    for (std::size_t k = 0; k < mscans.size(); ++k) {
        if (mscans[k].width() != width || mscans[k].depth() != depth)
            throw std::invalid_argument("write_mscan_container: M-scan " + std::to_string(k) + " has shape " +
                                        std::to_string(mscans[k].width()) + "x" +
                                        std::to_string(mscans[k].depth()) + ", expected " +
                                        std::to_string(width) + "x" + std::to_string(depth));
    }
    out.write("MSCN", 4);
    put_u16(out, kContainerVersion);
    put_u32(out, static_cast<std::uint32_t>(mscans.size()));
    put_u32(out, static_cast<std::uint32_t>(width));
    put_u32(out, static_cast<std::uint32_t>(depth));
    for (const auto& m : mscans) put_f32_block(out, m.data());
    if (!out) throw std::runtime_error("write_mscan_container: write failed");
}

void write_mscan_container(const std::string& path, std::span<const MScan> mscans) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    write_mscan_container(out, mscans);
}

std::vector<AScan> read_ascans_csv(std::istream& in) {
    std::vector<AScan> result;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        AScan a;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t used = 0;
                const float v = std::stof(cell, &used);
                if (cell.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(cell);
                a.samples.push_back(v);
            } catch (const std::exception&) {
                throw std::runtime_error("CSV row " + std::to_string(row) + ": cannot parse \"" + cell + "\"");
            }
        }
        if (!result.empty() && a.samples.size() != result.front().samples.size())
            throw std::runtime_error("CSV row " + std::to_string(row) + ": expected " +
                                     std::to_string(result.front().samples.size()) + " columns, got " +
                                     std::to_string(a.samples.size()));
        result.push_back(std::move(a));
    }
    return result;
}

std::vector<AScan> read_ascans_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return read_ascans_csv(in);
}

// --- preprocessing -----------------------------------------------------------------------

std::vector<MScan> window_stream(std::span<const AScan> ascans, std::size_t window, std::size_t stride) {
    if (window == 0 || stride == 0) throw std::invalid_argument("window_stream: window and stride must be >= 1");
    std::vector<MScan> result;
    for (std::size_t start = 0; start + window <= ascans.size(); start += stride)
        result.push_back(MScan::from_ascans(ascans.subspan(start, window)));
    return result;
}

MScan rescale_to_byte_range(const MScan& mscan, double byte_range_max) {
    if (!mscan.all_finite()) throw std::invalid_argument("rescale_to_byte_range: non-finite samples");
    const auto data = mscan.data();
    const auto [lo_it, hi_it] = std::minmax_element(data.begin(), data.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    std::vector<float> out(data.size(), 0.0f);
    if (hi > lo) {
        const double factor = byte_range_max / (hi - lo);
        for (std::size_t k = 0; k < data.size(); ++k)
            out[k] = static_cast<float>((static_cast<double>(data[k]) - lo) * factor);
    }
    return MScan(mscan.width(), mscan.depth(), std::move(out), mscan.acquisition_hz(),
                 mscan.depth_resolution_um());
}

Grid resize_bicubic(const MScan& mscan, int target_rows, int target_cols) {
    if (mscan.width() < 2 || mscan.depth() < 2)
        throw std::invalid_argument("resize_bicubic: input must be at least 2x2, got " +
                                    std::to_string(mscan.width()) + "x" + std::to_string(mscan.depth()));
    return resize_bicubic(mscan.to_grid(), target_rows, target_cols);
}

PreppedImage normalize_channels(const Grid& grid, const PreprocConfig& config) {
    PreppedImage image;
    const Grid unit = grid / config.byte_range_max;
    for (int c = 0; c < 3; ++c)
        image.channels[c] = ((unit.array() - config.channel_means[c]) / config.channel_stds[c]).matrix();
    return image;
}

PreppedImage preprocess(const MScan& mscan, const PreprocConfig& config) {
    config.validate();
    if (!mscan.all_finite()) throw std::invalid_argument("preprocess: non-finite samples");
    if (config.rescale_input) {
        const MScan scaled = rescale_to_byte_range(mscan, config.byte_range_max);
        return normalize_channels(resize_bicubic(scaled, config.target_height, config.target_width), config);
    }
    return normalize_channels(resize_bicubic(mscan, config.target_height, config.target_width), config);
}

}  // namespace octgate
