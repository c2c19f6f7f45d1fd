#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace dts {

// All library failures are thrown as Error with a stable kind string
// (e.g. "UnreadableFile", "DimensionMismatch"). The CLI maps any Error
// to exit code 2; everything else is a usage problem (exit 1).
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& message)
        : std::runtime_error(kind + ": " + message), kind_(std::move(kind)) {}

    const std::string& kind() const { return kind_; }

private:
    std::string kind_;
};

[[noreturn]] inline void fail(const std::string& kind, const std::string& message) {
    throw Error(kind, message);
}

inline void require(bool ok, const std::string& kind, const std::string& message) {
    if (!ok) fail(kind, message);
}

inline double clamp01(double v) {
    if (v < 0.0) return 0.0;
    if (v > 1.0) return 1.0;
    return v;
}

} // namespace dts
