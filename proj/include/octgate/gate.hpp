#pragma once

#include "octgate/maha.hpp"
#include "octgate/scan.hpp"

#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace octgate {

// --- framing ------------------------------------------------------------------------------
//
// One A-scan per frame: u32 little-endian byte length, then that many bytes
// of f32 little-endian samples. The length must equal 4 * P.

std::string encode_frame(std::span<const float> samples);
void write_frame(std::ostream& out, std::span<const float> samples);

struct Frame {
    enum class Status { ok, malformed, end };
    Status status = Status::end;
    std::vector<float> samples;
    std::uint32_t declared_bytes = 0;
    std::string error;
};

/// Reads the next frame. A frame whose length is not 4 * `depth` has its
/// declared payload skipped so the reader stays aligned on the next frame
/// boundary. `depth` == 0 accepts any positive multiple of 4.
Frame read_frame(std::istream& in, std::size_t depth);

// --- records ------------------------------------------------------------------------------

struct GateRecord {
    std::size_t window_index = 0;
    std::size_t ascan_start = 0;        // [start, end) in A-scan arrival order
    std::size_t ascan_end = 0;
    double score = 0.0;
    double tau = 0.0;
    bool reject = false;
    std::int64_t latency_us = 0;
    // error records only
    std::optional<std::string> error;
    std::size_t frame_index = 0;
};

std::string to_ndjson(const GateRecord& record);

// --- pipeline -------------------------------------------------------------------------------

struct GateConfig {
    std::size_t window = kDefaultWindow;
    std::size_t stride = kDefaultWindow;
    std::size_t depth = kDefaultDepth;   // expected samples per A-scan
    std::size_t workers = 1;             // scoring threads
    std::size_t queue_capacity = 64;     // per hand-off queue
    bool flush_each_record = true;
};

struct GateStats {
    std::size_t frames = 0;
    std::size_t windows = 0;
    std::size_t errors = 0;
    std::size_t rejected = 0;
    double elapsed_s = 0.0;
    std::int64_t max_latency_us = 0;
    double mean_latency_us = 0.0;

    double windows_per_second() const { return elapsed_s > 0.0 ? static_cast<double>(windows) / elapsed_s : 0.0; }
};

/// Fixed-capacity blocking queue. push blocks while full; pop blocks while
/// empty and returns nullopt once the queue is closed and drained.
template <typename T>
class BoundedQueue {
public:
    explicit BoundedQueue(std::size_t capacity) : capacity_(capacity == 0 ? 1 : capacity) {}

    void push(T value) {
        std::unique_lock lock(mutex_);
        not_full_.wait(lock, [&] { return items_.size() < capacity_ || closed_; });
        if (closed_) return;
        items_.push_back(std::move(value));
        not_empty_.notify_one();
    }

    std::optional<T> pop() {
        std::unique_lock lock(mutex_);
        not_empty_.wait(lock, [&] { return !items_.empty() || closed_; });
        if (items_.empty()) return std::nullopt;
        T v = std::move(items_.front());
        items_.pop_front();
        not_full_.notify_one();
        return v;
    }

    void close() {
        std::lock_guard lock(mutex_);
        closed_ = true;
        not_empty_.notify_all();
        not_full_.notify_all();
    }

private:
    std::size_t capacity_;
    std::deque<T> items_;
    bool closed_ = false;
    std::mutex mutex_;
    std::condition_variable not_empty_;
    std::condition_variable not_full_;
};

/// Three-stage gate: ingest (framing + windowing), scoring workers, ordered
/// NDJSON emission. Every window yields exactly one record and every
/// malformed frame one error record, in arrival order.
class Gate {
public:
    /// The detector must be calibrated.
    Gate(std::shared_ptr<const Detector> detector, GateConfig config = {});

    GateStats run(std::istream& in, std::ostream& out) const;

    /// In-memory convenience: frames every A-scan, runs the pipeline and
    /// parses nothing back; records are returned directly.
    std::vector<GateRecord> run_ascans(std::span<const AScan> ascans, GateStats* stats = nullptr) const;

    const GateConfig& config() const { return config_; }

private:
    GateStats run_impl(std::istream& in, std::ostream* out, std::vector<GateRecord>* records) const;

    std::shared_ptr<const Detector> detector_;
    GateConfig config_;
    double tau_ = 0.0;
};

/// "-" for stdin, "tcp://host:port" to connect as a client, otherwise a
/// file path.
std::unique_ptr<std::istream> open_gate_input(const std::string& spec);

}  // namespace octgate
