#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "dts/common.hpp"

namespace dts {

// Grayscale frame, row-major, intensities in [0, 255].
struct Image {
    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> pixels;

    Image() = default;
    Image(int h, int w, std::uint8_t fill = 0)
        : height(h), width(w), pixels(static_cast<std::size_t>(h) * static_cast<std::size_t>(w), fill) {}

    std::uint8_t at(int y, int x) const {
        return pixels[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)];
    }
    std::uint8_t& at(int y, int x) {
        return pixels[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)];
    }
    int size() const { return height * width; }
};

// Space-time volume: T frames of identical H x W. Immutable after load;
// safe to share across concurrent readers.
struct FrameSequence {
    int height = 0;
    int width = 0;
    std::vector<Image> frames;
    std::string source_id;

    int length() const { return static_cast<int>(frames.size()); }
};

// BT.601 luma, round half up. Fixed rule for every color ingestion path.
inline std::uint8_t luma(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    const double v = 0.299 * r + 0.587 * g + 0.114 * b;
    return static_cast<std::uint8_t>(std::floor(v + 0.5));
}

inline void validate_sequence(const FrameSequence& seq) {
    require(!seq.frames.empty(), "EmptySequence", "sequence '" + seq.source_id + "' has no frames");
    require(seq.height >= 1 && seq.width >= 1, "EmptySequence",
            "sequence '" + seq.source_id + "' has degenerate frame size");
    for (std::size_t i = 0; i < seq.frames.size(); ++i) {
        const Image& f = seq.frames[i];
        require(f.height == seq.height && f.width == seq.width, "InconsistentFrameSize",
                "frame " + std::to_string(i) + " of '" + seq.source_id + "' is " + std::to_string(f.width) + "x" +
                    std::to_string(f.height) + ", expected " + std::to_string(seq.width) + "x" +
                    std::to_string(seq.height));
        require(f.pixels.size() == static_cast<std::size_t>(f.height) * static_cast<std::size_t>(f.width),
                "InconsistentFrameSize", "frame " + std::to_string(i) + " pixel buffer size mismatch");
    }
}

inline FrameSequence crop_sequence(const FrameSequence& seq, int x, int y, int w, int h) {
    require(x >= 0 && y >= 0 && w >= 1 && h >= 1 && x + w <= seq.width && y + h <= seq.height, "DimensionMismatch",
            "crop rectangle outside frame bounds");
    FrameSequence out;
    out.height = h;
    out.width = w;
    out.source_id = seq.source_id + "#crop";
    out.frames.reserve(seq.frames.size());
    for (const Image& f : seq.frames) {
        Image c(h, w);
        for (int yy = 0; yy < h; ++yy)
            for (int xx = 0; xx < w; ++xx) c.at(yy, xx) = f.at(y + yy, x + xx);
        out.frames.push_back(std::move(c));
    }
    return out;
}

} // namespace dts
