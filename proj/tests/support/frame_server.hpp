#pragma once

#include "octgate/scan.hpp"

#include <chrono>
#include <span>
#include <string>
#include <thread>
#include <vector>

namespace octgate::testing {

/// Loopback TCP server that hands `frames` to its first client, one frame
/// per `period` (zero period: as fast as the socket accepts them).
class FrameServer {
public:
    FrameServer(std::vector<std::string> frames, std::chrono::nanoseconds period);
    ~FrameServer();
    FrameServer(const FrameServer&) = delete;
    FrameServer& operator=(const FrameServer&) = delete;

    std::string url() const;

private:
    void serve();

    std::vector<std::string> frames_;
    std::chrono::nanoseconds period_;
    int listener_ = -1;
    int port_ = 0;
    std::thread thread_;
};

std::vector<std::string> frame_list(std::span<const AScan> ascans);
std::vector<AScan> ascans_of(std::span<const MScan> mscans);

}  // namespace octgate::testing
