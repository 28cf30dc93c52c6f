#include "octgate/gate.hpp"

#include <json.hpp>

#include <netdb.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <streambuf>
#include <thread>

namespace octgate {

namespace {

using Clock = std::chrono::steady_clock;

std::uint32_t load_u32_le(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

float load_f32_le(const unsigned char* p) { return std::bit_cast<float>(load_u32_le(p)); }

void store_u32_le(std::uint32_t v, char* p) {
    for (int k = 0; k < 4; ++k) p[k] = static_cast<char>((v >> (8 * k)) & 0xFFu);
}

/// Discards up to n bytes; returns the number actually skipped.
std::size_t skip_bytes(std::istream& in, std::size_t n) {
    std::array<char, 4096> sink{};
    std::size_t done = 0;
    while (done < n) {
        const auto want = static_cast<std::streamsize>(std::min(sink.size(), n - done));
        in.read(sink.data(), want);
        const auto got = static_cast<std::size_t>(in.gcount());
        done += got;
        if (got < static_cast<std::size_t>(want)) break;
    }
    return done;
}

class FdStreambuf final : public std::streambuf {
public:
    explicit FdStreambuf(int fd) : fd_(fd) {}
    ~FdStreambuf() override {
        if (fd_ >= 0) ::close(fd_);
    }
    FdStreambuf(const FdStreambuf&) = delete;
    FdStreambuf& operator=(const FdStreambuf&) = delete;

protected:
    int_type underflow() override {
        if (gptr() < egptr()) return traits_type::to_int_type(*gptr());
        ssize_t n = 0;
        do {
            n = ::read(fd_, buffer_.data(), buffer_.size());
        } while (n < 0 && errno == EINTR);
        if (n <= 0) return traits_type::eof();
        setg(buffer_.data(), buffer_.data(), buffer_.data() + n);
        return traits_type::to_int_type(*gptr());
    }

private:
    int fd_;
    std::array<char, 1 << 16> buffer_{};
};

class FdIstream final : public std::istream {
public:
    explicit FdIstream(int fd) : std::istream(nullptr), buf_(fd) { rdbuf(&buf_); }

private:
    FdStreambuf buf_;
};

int connect_tcp(const std::string& host, const std::string& port) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    if (const int rc = ::getaddrinfo(host.c_str(), port.c_str(), &hints, &res); rc != 0)
        throw std::runtime_error("cannot resolve " + host + ":" + port + ": " + gai_strerror(rc));
    int fd = -1;
    for (addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
        fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
        if (fd < 0) continue;
        if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
        ::close(fd);
        fd = -1;
    }
    ::freeaddrinfo(res);
    if (fd < 0) throw std::runtime_error("cannot connect to " + host + ":" + port);
    return fd;
}

struct Job {
    std::size_t seq = 0;
    GateRecord record;
    MScan mscan;
    Clock::time_point arrival;
};

}  // namespace

// --- framing --------------------------------------------------------------------------------------

std::string encode_frame(std::span<const float> samples) {
    std::string s(4 + 4 * samples.size(), '\0');
    store_u32_le(static_cast<std::uint32_t>(4 * samples.size()), s.data());
    for (std::size_t i = 0; i < samples.size(); ++i)
        store_u32_le(std::bit_cast<std::uint32_t>(samples[i]), s.data() + 4 + 4 * i);
    return s;
}

void write_frame(std::ostream& out, std::span<const float> samples) {
    const auto s = encode_frame(samples);
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

Frame read_frame(std::istream& in, std::size_t depth) {
    Frame f;
    std::array<unsigned char, 4> head{};
    in.read(reinterpret_cast<char*>(head.data()), 4);
    const auto got = in.gcount();
    if (got == 0) return f;  // clean end of stream
    if (got < 4) {
        f.status = Frame::Status::malformed;
        f.error = "truncated frame header";
        return f;
    }
    f.declared_bytes = load_u32_le(head.data());
    const bool size_ok = depth == 0 ? (f.declared_bytes > 0 && f.declared_bytes % 4 == 0)
                                    : f.declared_bytes == 4 * depth;
    if (!size_ok) {
        f.status = Frame::Status::malformed;
        const std::size_t skipped = skip_bytes(in, f.declared_bytes);
        f.error = "frame length " + std::to_string(f.declared_bytes) + " bytes, expected " +
                  (depth == 0 ? std::string("a positive multiple of 4") : std::to_string(4 * depth));
        if (skipped < f.declared_bytes) f.error += " (stream ended inside the frame)";
        return f;
    }
    std::vector<unsigned char> raw(f.declared_bytes);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) < raw.size()) {
        f.status = Frame::Status::malformed;
        f.error = "truncated frame payload: got " + std::to_string(in.gcount()) + " of " +
                  std::to_string(f.declared_bytes) + " bytes";
        return f;
    }
    f.samples.resize(raw.size() / 4);
    for (std::size_t i = 0; i < f.samples.size(); ++i) f.samples[i] = load_f32_le(raw.data() + 4 * i);
    f.status = Frame::Status::ok;
    return f;
}

std::string to_ndjson(const GateRecord& r) {
    nlohmann::ordered_json j;
    if (r.error) {
        j["error"] = *r.error;
        j["frame_index"] = r.frame_index;
        j["latency_us"] = r.latency_us;
        return j.dump();
    }
    j["window_index"] = r.window_index;
    j["ascan_range"] = {r.ascan_start, r.ascan_end};
    j["score"] = r.score;
    j["tau"] = r.tau;
    j["decision"] = r.reject ? "reject" : "accept";
    j["latency_us"] = r.latency_us;
    return j.dump();
}

// --- pipeline ---------------------------------------------------------------------------------------

Gate::Gate(std::shared_ptr<const Detector> detector, GateConfig config)
    : detector_(std::move(detector)), config_(config) {
    if (!detector_) throw std::invalid_argument("Gate: null detector");
    if (!detector_->model().calibrated())
        throw std::logic_error("gate requires a calibrated model (run calibrate first)");
    if (config_.window == 0 || config_.stride == 0) throw std::invalid_argument("Gate: window and stride must be >= 1");
    if (config_.workers == 0) config_.workers = 1;
    tau_ = *detector_->model().threshold_tau;
}

GateStats Gate::run(std::istream& in, std::ostream& out) const { return run_impl(in, &out, nullptr); }

std::vector<GateRecord> Gate::run_ascans(std::span<const AScan> ascans, GateStats* stats) const {
    std::stringstream buf;
    for (const auto& a : ascans) write_frame(buf, a.samples);
    std::vector<GateRecord> records;
    const auto s = run_impl(buf, nullptr, &records);
    if (stats) *stats = s;
    return records;
}

GateStats Gate::run_impl(std::istream& in, std::ostream* out, std::vector<GateRecord>* records) const {
    BoundedQueue<Job> jobs(config_.queue_capacity);
    BoundedQueue<Job> done(config_.queue_capacity);
    GateStats stats;
    const auto t0 = Clock::now();
    std::exception_ptr ingest_error;
    std::size_t frames_read = 0;

    std::thread ingest([&] {
        try {
            std::size_t seq = 0, frame_index = 0, window_index = 0, next_start = 0;
            std::size_t buf_start = 0;
            std::deque<std::vector<float>> buf;
            for (;;) {
                Frame f = read_frame(in, config_.depth);
                if (f.status == Frame::Status::end) break;
                const auto arrival = Clock::now();
                const std::size_t this_frame = frame_index++;
                if (f.status == Frame::Status::malformed) {
                    Job j;
                    j.seq = seq++;
                    j.record.error = f.error;
                    j.record.frame_index = this_frame;
                    j.arrival = arrival;
                    jobs.push(std::move(j));
                    if (!in) break;  // header or payload cut off by end of stream
                    continue;
                }
                buf.push_back(std::move(f.samples));
                while (!buf.empty() && buf_start < next_start) {
                    buf.pop_front();
                    ++buf_start;
                }
                while (buf_start == next_start && buf.size() >= config_.window) {
                    std::vector<float> data;
                    data.reserve(config_.window * config_.depth);
                    for (std::size_t k = 0; k < config_.window; ++k)
                        data.insert(data.end(), buf[k].begin(), buf[k].end());
                    Job j;
                    j.seq = seq++;
                    j.record.window_index = window_index++;
                    j.record.ascan_start = next_start;
                    j.record.ascan_end = next_start + config_.window;
                    j.mscan = MScan(config_.window, buf.front().size(), std::move(data));
                    j.arrival = arrival;
                    jobs.push(std::move(j));
                    next_start += config_.stride;
                    while (!buf.empty() && buf_start < next_start) {
                        buf.pop_front();
                        ++buf_start;
                    }
                }
            }
            frames_read = frame_index;
        } catch (...) {
            ingest_error = std::current_exception();
        }
        jobs.close();
    });

    std::vector<std::thread> workers;
    std::exception_ptr worker_error;
    std::mutex worker_error_mutex;
    for (std::size_t w = 0; w < config_.workers; ++w) {
        workers.emplace_back([&] {
            while (auto j = jobs.pop()) {
                if (!j->record.error) {
                    try {
                        j->record.score = detector_->score(j->mscan);
                        j->record.tau = tau_;
                        j->record.reject = j->record.score > tau_;
                    } catch (const std::exception& e) {
                        std::lock_guard lock(worker_error_mutex);
                        if (!worker_error) worker_error = std::current_exception();
                        j->record.error = std::string("scoring failed: ") + e.what();
                        j->record.frame_index = j->record.ascan_end;
                    }
                    j->mscan = MScan();
                }
                done.push(std::move(*j));
            }
        });
    }

    std::thread closer([&] {
        for (auto& w : workers) w.join();
        done.close();
    });

    // emitter runs on the calling thread
    std::map<std::size_t, Job> pending;
    std::size_t next_seq = 0;
    double latency_sum = 0.0;
    std::size_t latency_count = 0;
    while (auto j = done.pop()) {
        pending.emplace(j->seq, std::move(*j));
        for (auto it = pending.find(next_seq); it != pending.end(); it = pending.find(next_seq)) {
            GateRecord& r = it->second.record;
            r.latency_us = std::max<std::int64_t>(
                0, std::chrono::duration_cast<std::chrono::microseconds>(Clock::now() - it->second.arrival).count());
            if (out) {
                *out << to_ndjson(r) << '\n';
                if (config_.flush_each_record) out->flush();
            }
            if (r.error) {
                ++stats.errors;
            } else {
                ++stats.windows;
                if (r.reject) ++stats.rejected;
                stats.max_latency_us = std::max(stats.max_latency_us, r.latency_us);
                latency_sum += static_cast<double>(r.latency_us);
                ++latency_count;
            }
            if (records) records->push_back(std::move(r));
            pending.erase(it);
            ++next_seq;
        }
    }
    ingest.join();
    closer.join();
    stats.elapsed_s = std::chrono::duration<double>(Clock::now() - t0).count();
    stats.frames = frames_read;
    if (latency_count > 0) stats.mean_latency_us = latency_sum / static_cast<double>(latency_count);
    if (ingest_error) std::rethrow_exception(ingest_error);
    return stats;
}

std::unique_ptr<std::istream> open_gate_input(const std::string& spec) {
    if (spec == "-") return std::make_unique<std::istream>(std::cin.rdbuf());
    constexpr std::string_view tcp = "tcp://";
    if (spec.rfind(tcp, 0) == 0) {
        const std::string rest = spec.substr(tcp.size());
        const auto colon = rest.rfind(':');
        if (colon == std::string::npos || colon == 0 || colon + 1 == rest.size())
            throw std::invalid_argument("expected tcp://host:port, got " + spec);
        return std::make_unique<FdIstream>(connect_tcp(rest.substr(0, colon), rest.substr(colon + 1)));
    }
    auto f = std::make_unique<std::ifstream>(spec, std::ios::binary);
    if (!*f) throw std::runtime_error("cannot open gate input " + spec);
    return f;
}

}  // namespace octgate
