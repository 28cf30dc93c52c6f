#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace octgate {

/// Malformed `.mscn` container or stream frame. `offset()` is the byte
/// position at which the problem was detected.
class FormatError : public std::runtime_error {
public:
    FormatError(const std::string& what, std::uint64_t offset)
        : std::runtime_error(what + " (at byte offset " + std::to_string(offset) + ")"),
          offset_(offset) {}

    std::uint64_t offset() const noexcept { return offset_; }

private:
    std::uint64_t offset_;
};

/// Gaussian fitting failed (too few samples, non-finite data, factorization).
class FitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Detector / classifier model file could not be loaded or is inconsistent.
class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ChecksumError : public ModelError {
public:
    using ModelError::ModelError;
};

/// Problems loading or running an exported network graph.
class GraphError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace octgate
