#pragma once

#include <array>
#include <vector>

#include "dts/common.hpp"
#include "dts/descriptor.hpp"
#include "dts/image.hpp"

// LBP on three orthogonal planes (XY, XT, YT): radius-1 8-neighbour codes at
// every interior voxel, binned by the 59-entry uniform-pattern table, one
// L1-normalized histogram per plane, concatenated to a 177-dim descriptor.

namespace dts {

inline constexpr int kLbpBins = 59;
inline constexpr int kLbpTopDim = 3 * kLbpBins;

// uniform codes (<= 2 circular transitions) map to bins 0..57 in increasing
// code order, everything else to bin 58
inline const std::array<int, 256>& lbp_uniform_bins() {
    static const std::array<int, 256> table = [] {
        std::array<int, 256> t{};
        int next = 0;
        for (int code = 0; code < 256; ++code) {
            int transitions = 0;
            for (int b = 0; b < 8; ++b) {
                const int cur = (code >> b) & 1;
                const int nxt = (code >> ((b + 1) & 7)) & 1;
                transitions += cur != nxt;
            }
            t[static_cast<std::size_t>(code)] = transitions <= 2 ? next++ : -1;
        }
        for (int code = 0; code < 256; ++code)
            if (t[static_cast<std::size_t>(code)] < 0) t[static_cast<std::size_t>(code)] = 58;
        return t;
    }();
    return table;
}

namespace detail {
// circular ring, radius 1, starting east and going counter-clockwise
inline constexpr int kRing[8][2] = {{1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}, {0, -1}, {1, -1}};
} // namespace detail

inline Descriptor lbptop(const FrameSequence& seq) {
    validate_sequence(seq);
    const int H = seq.height, W = seq.width, T = seq.length();
    require(H >= 3 && W >= 3 && T >= 3, "VolumeTooSmall",
            "LBP-TOP needs at least a 3x3x3 volume, got " + std::to_string(W) + "x" + std::to_string(H) + "x" +
                std::to_string(T));

    const auto& bins = lbp_uniform_bins();
    std::array<std::vector<double>, 3> hist;
    for (auto& hh : hist) hh.assign(kLbpBins, 0.0);

    auto vox = [&](int x, int y, int t) { return seq.frames[static_cast<std::size_t>(t)].at(y, x); };

    for (int t = 1; t < T - 1; ++t)
        for (int y = 1; y < H - 1; ++y)
            for (int x = 1; x < W - 1; ++x) {
                const int c = vox(x, y, t);
                int code_xy = 0, code_xt = 0, code_yt = 0;
                for (int k = 0; k < 8; ++k) {
                    const int da = detail::kRing[k][0], db = detail::kRing[k][1];
                    if (vox(x + da, y + db, t) >= c) code_xy |= 1 << k;  // ties compare as >=
                    if (vox(x + da, y, t + db) >= c) code_xt |= 1 << k;
                    if (vox(x, y + da, t + db) >= c) code_yt |= 1 << k;
                }
                hist[0][static_cast<std::size_t>(bins[static_cast<std::size_t>(code_xy)])] += 1.0;
                hist[1][static_cast<std::size_t>(bins[static_cast<std::size_t>(code_xt)])] += 1.0;
                hist[2][static_cast<std::size_t>(bins[static_cast<std::size_t>(code_yt)])] += 1.0;
            }

    const double total = static_cast<double>(T - 2) * (H - 2) * (W - 2);
    Descriptor d;
    d.kind = FeatureKind::LbpTop;
    d.values.reserve(kLbpTopDim);
    for (const auto& hh : hist)
        for (double v : hh) d.values.push_back(v / total);
    return d;
}

} // namespace dts
