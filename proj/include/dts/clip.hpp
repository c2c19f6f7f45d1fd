#pragma once

#include <string>
#include <vector>

#include "dts/common.hpp"

namespace dts {

// Sliding-window plan over the time axis: clips [s, s+length-1] at starts
// {0, stride, 2*stride, ...}, every clip fully inside [0, T-1].
struct ClipPlan {
    int clip_length = 0;
    int stride = 0;
    std::vector<int> starts;

    int count() const { return static_cast<int>(starts.size()); }
};

inline ClipPlan plan_clips(int total_frames, int clip_length, int stride) {
    require(clip_length >= 1, "SequenceTooShort", "clip length must be >= 1");
    require(stride >= 1, "SequenceTooShort", "stride must be >= 1");
    require(total_frames >= clip_length, "SequenceTooShort",
            "sequence of " + std::to_string(total_frames) + " frames is shorter than clip length " +
                std::to_string(clip_length));
    ClipPlan plan;
    plan.clip_length = clip_length;
    plan.stride = stride;
    for (int start = 0; start + clip_length - 1 <= total_frames - 1; start += stride) plan.starts.push_back(start);
    return plan;
}

// 50% overlap when the stride is left unspecified.
inline int effective_stride(int clip_length, int configured_stride) {
    if (configured_stride >= 1) return configured_stride;
    return clip_length / 2 >= 1 ? clip_length / 2 : 1;
}

} // namespace dts
