#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <png.h>

#include "dts/common.hpp"
#include "dts/image.hpp"

// Sequence ingestion. Byte layouts are documented in docs/FORMATS.md:
//   image-directory : lexicographically sorted 8-bit PGM/PNG frames
//   raw-planar      : header line "H W T\n", then H*W*T bytes, frame-major
//   y4m             : YUV4MPEG2 container, Y plane kept as grayscale

namespace dts {

enum class VideoFormat { ImageDirectory, RawPlanar, Y4m };

inline VideoFormat video_format_from_string(const std::string& s) {
    if (s == "image-directory" || s == "dir") return VideoFormat::ImageDirectory;
    if (s == "raw-planar" || s == "raw") return VideoFormat::RawPlanar;
    if (s == "y4m") return VideoFormat::Y4m;
    fail("UnreadableFile", "unknown video format tag '" + s + "'");
}

namespace detail {

inline std::string read_all_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), "UnreadableFile", "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// PGM token reader: skips whitespace and '#' comment lines in the header.
inline long pgm_token(const std::string& buf, std::size_t& pos) {
    while (pos < buf.size()) {
        if (std::isspace(static_cast<unsigned char>(buf[pos]))) {
            ++pos;
        } else if (buf[pos] == '#') {
            while (pos < buf.size() && buf[pos] != '\n') ++pos;
        } else {
            break;
        }
    }
    long v = 0;
    bool any = false;
    while (pos < buf.size() && std::isdigit(static_cast<unsigned char>(buf[pos]))) {
        v = v * 10 + (buf[pos] - '0');
        ++pos;
        any = true;
    }
    if (!any) fail("UnreadableFile", "malformed PGM header");
    return v;
}

} // namespace detail

inline Image load_pgm(const std::string& path) {
    const std::string buf = detail::read_all_bytes(path);
    require(buf.size() >= 2 && buf[0] == 'P' && (buf[1] == '5' || buf[1] == '2'), "UnreadableFile",
            "'" + path + "' is not a P5/P2 PGM");
    const bool binary = buf[1] == '5';
    std::size_t pos = 2;
    const long w = detail::pgm_token(buf, pos);
    const long h = detail::pgm_token(buf, pos);
    const long maxval = detail::pgm_token(buf, pos);
    require(w >= 1 && h >= 1, "UnreadableFile", "'" + path + "' has empty dimensions");
    require(maxval > 0 && maxval <= 255, "UnreadableFile", "'" + path + "' maxval " + std::to_string(maxval) +
                                                               " unsupported (8-bit only)");
    Image img(static_cast<int>(h), static_cast<int>(w));
    const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
    if (binary) {
        ++pos;  // single whitespace after maxval
        require(buf.size() - pos >= n, "UnreadableFile", "'" + path + "' truncated pixel data");
        std::copy_n(reinterpret_cast<const unsigned char*>(buf.data()) + pos, n, img.pixels.begin());
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            const long v = detail::pgm_token(buf, pos);
            require(v >= 0 && v <= maxval, "UnreadableFile", "'" + path + "' sample out of range");
            img.pixels[i] = static_cast<std::uint8_t>(v);
        }
    }
    return img;
}

inline void save_pgm(const Image& img, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    require(out.good(), "UnreadableFile", "cannot write '" + path + "'");
    out << "P5\n" << img.width << " " << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
    require(out.good(), "UnreadableFile", "short write to '" + path + "'");
}

// 8-bit PNG via libpng; palettes expanded, 16-bit stripped, alpha dropped,
// color converted by the luma rule.
inline Image load_png(const std::string& path) {
    std::FILE* fp = std::fopen(path.c_str(), "rb");
    require(fp != nullptr, "UnreadableFile", "cannot open '" + path + "'");
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        if (png) png_destroy_read_struct(&png, &info, nullptr);
        std::fclose(fp);
        fail("UnreadableFile", "libpng init failed for '" + path + "'");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        std::fclose(fp);
        fail("UnreadableFile", "libpng failed to decode '" + path + "'");
    }
    png_init_io(png, fp);
    png_read_info(png, info);

    const png_uint_32 w = png_get_image_width(png, info);
    const png_uint_32 h = png_get_image_height(png, info);
    const png_byte color = png_get_color_type(png, info);
    const png_byte depth = png_get_bit_depth(png, info);

    if (depth == 16) png_set_strip_16(png);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    png_read_update_info(png, info);

    const png_size_t rowbytes = png_get_rowbytes(png, info);
    const int channels = png_get_channels(png, info);
    std::vector<png_byte> row(rowbytes);
    Image img(static_cast<int>(h), static_cast<int>(w));
    for (png_uint_32 y = 0; y < h; ++y) {
        png_read_row(png, row.data(), nullptr);
        for (png_uint_32 x = 0; x < w; ++x) {
            if (channels >= 3) {
                img.at(static_cast<int>(y), static_cast<int>(x)) =
                    luma(row[x * channels], row[x * channels + 1], row[x * channels + 2]);
            } else {
                img.at(static_cast<int>(y), static_cast<int>(x)) = row[x * channels];
            }
        }
    }
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    return img;
}

inline FrameSequence load_image_directory(const std::string& dir) {
    namespace fs = std::filesystem;
    require(fs::is_directory(dir), "UnreadableFile", "'" + dir + "' is not a directory");
    std::vector<std::string> names;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        std::string ext = e.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        if (ext == ".pgm" || ext == ".png") names.push_back(e.path().filename().string());
    }
    std::sort(names.begin(), names.end());
    require(!names.empty(), "EmptySequence", "no PGM/PNG frames in '" + dir + "'");

    FrameSequence seq;
    seq.source_id = fs::path(dir).filename().string();
    for (const std::string& name : names) {
        const std::string p = (fs::path(dir) / name).string();
        Image f = name.size() >= 4 && (name.substr(name.size() - 4) == ".png" || name.substr(name.size() - 4) == ".PNG")
                      ? load_png(p)
                      : load_pgm(p);
        if (seq.frames.empty()) {
            seq.height = f.height;
            seq.width = f.width;
        }
        seq.frames.push_back(std::move(f));
    }
    validate_sequence(seq);
    return seq;
}

inline FrameSequence load_raw_planar(const std::string& path) {
    const std::string buf = detail::read_all_bytes(path);
    std::size_t pos = 0;
    long h = 0, w = 0, t = 0;
    {
        std::size_t nl = buf.find('\n');
        require(nl != std::string::npos, "UnreadableFile", "'" + path + "' missing raw-planar header line");
        std::istringstream hs(buf.substr(0, nl));
        if (!(hs >> h >> w >> t)) fail("UnreadableFile", "'" + path + "' malformed raw-planar header");
        pos = nl + 1;
    }
    require(h >= 1 && w >= 1, "EmptySequence", "'" + path + "' degenerate dimensions");
    require(t >= 1, "EmptySequence", "'" + path + "' has no frames");
    const std::size_t frame = static_cast<std::size_t>(h) * static_cast<std::size_t>(w);
    require(buf.size() - pos == frame * static_cast<std::size_t>(t), "UnreadableFile",
            "'" + path + "' payload is " + std::to_string(buf.size() - pos) + " bytes, expected " +
                std::to_string(frame * static_cast<std::size_t>(t)));
    FrameSequence seq;
    seq.height = static_cast<int>(h);
    seq.width = static_cast<int>(w);
    seq.source_id = std::filesystem::path(path).stem().string();
    for (long i = 0; i < t; ++i) {
        Image f(static_cast<int>(h), static_cast<int>(w));
        std::copy_n(reinterpret_cast<const unsigned char*>(buf.data()) + pos + frame * static_cast<std::size_t>(i),
                    frame, f.pixels.begin());
        seq.frames.push_back(std::move(f));
    }
    validate_sequence(seq);
    return seq;
}

inline void save_raw_planar(const FrameSequence& seq, const std::string& path) {
    validate_sequence(seq);
    std::ofstream out(path, std::ios::binary);
    require(out.good(), "UnreadableFile", "cannot write '" + path + "'");
    out << seq.height << " " << seq.width << " " << seq.length() << "\n";
    for (const Image& f : seq.frames)
        out.write(reinterpret_cast<const char*>(f.pixels.data()), static_cast<std::streamsize>(f.pixels.size()));
    require(out.good(), "UnreadableFile", "short write to '" + path + "'");
}

// YUV4MPEG2: the Y plane is already luma, chroma planes are skipped.
inline FrameSequence load_y4m(const std::string& path) {
    const std::string buf = detail::read_all_bytes(path);
    std::size_t nl = buf.find('\n');
    require(nl != std::string::npos && buf.compare(0, 9, "YUV4MPEG2") == 0, "UnreadableFile",
            "'" + path + "' is not a YUV4MPEG2 stream");
    long w = 0, h = 0;
    double chroma_factor = 1.5;  // default C420
    {
        std::istringstream hs(buf.substr(9, nl - 9));
        std::string tok;
        while (hs >> tok) {
            if (tok[0] == 'W') w = std::stol(tok.substr(1));
            else if (tok[0] == 'H') h = std::stol(tok.substr(1));
            else if (tok[0] == 'C') {
                const std::string cs = tok.substr(1);
                if (cs.rfind("420", 0) == 0) chroma_factor = 1.5;
                else if (cs.rfind("422", 0) == 0) chroma_factor = 2.0;
                else if (cs.rfind("444", 0) == 0) chroma_factor = 3.0;
                else if (cs == "mono") chroma_factor = 1.0;
                else fail("UnreadableFile", "'" + path + "' unsupported colourspace C" + cs);
            }
        }
    }
    require(w >= 1 && h >= 1, "UnreadableFile", "'" + path + "' missing W/H header fields");
    const std::size_t ysize = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
    const std::size_t frame_bytes = static_cast<std::size_t>(static_cast<double>(ysize) * chroma_factor);

    FrameSequence seq;
    seq.height = static_cast<int>(h);
    seq.width = static_cast<int>(w);
    seq.source_id = std::filesystem::path(path).stem().string();
    std::size_t pos = nl + 1;
    while (pos < buf.size()) {
        std::size_t fnl = buf.find('\n', pos);
        require(fnl != std::string::npos && buf.compare(pos, 5, "FRAME") == 0, "UnreadableFile",
                "'" + path + "' malformed FRAME marker");
        pos = fnl + 1;
        require(buf.size() - pos >= frame_bytes, "UnreadableFile", "'" + path + "' truncated frame payload");
        Image f(static_cast<int>(h), static_cast<int>(w));
        std::copy_n(reinterpret_cast<const unsigned char*>(buf.data()) + pos, ysize, f.pixels.begin());
        seq.frames.push_back(std::move(f));
        pos += frame_bytes;
    }
    require(!seq.frames.empty(), "EmptySequence", "'" + path + "' contains no frames");
    validate_sequence(seq);
    return seq;
}

inline FrameSequence load_sequence(const std::string& path, VideoFormat format) {
    switch (format) {
        case VideoFormat::ImageDirectory: return load_image_directory(path);
        case VideoFormat::RawPlanar: return load_raw_planar(path);
        case VideoFormat::Y4m: return load_y4m(path);
    }
    fail("UnreadableFile", "unhandled format");
}

// Sniffs the format from the path: directories load as frame stacks,
// *.y4m as containers, everything else as raw-planar.
inline FrameSequence load_sequence_auto(const std::string& path) {
    if (std::filesystem::is_directory(path)) return load_image_directory(path);
    std::string ext = std::filesystem::path(path).extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (ext == ".y4m") return load_y4m(path);
    return load_raw_planar(path);
}

} // namespace dts
