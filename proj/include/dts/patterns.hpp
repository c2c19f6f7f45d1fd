#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "dts/clip.hpp"
#include "dts/common.hpp"
#include "dts/descriptor.hpp"
#include "dts/image.hpp"
#include "dts/kmeans.hpp"
#include "dts/rng.hpp"
#include "dts/serialize.hpp"
#include "dts/tree_of_shapes.hpp"

// Shape co-occurrence patterns: attribute chains along parent paths in the
// tree of shapes, clustered into per-order codeword dictionaries, then
// encoded per clip as L1-normalized hard-assignment histograms and averaged
// over the clips of a video.

namespace dts {

struct Pattern {
    int order = 1;
    std::vector<double> values;  // 6*order reals, child -> ancestor
};

// One pattern per shape that has at least order-1 ancestors.
inline std::vector<Pattern> extract_patterns(const TreeOfShapes& tree, int order) {
    require(order >= 1, "DimensionMismatch", "pattern order must be >= 1");
    std::vector<Pattern> out;
    for (std::size_t s = 0; s < tree.shapes.size(); ++s) {
        int node = static_cast<int>(s);
        Pattern p;
        p.order = order;
        p.values.reserve(static_cast<std::size_t>(AttributeVector::kDim) * static_cast<std::size_t>(order));
        bool ok = true;
        for (int step = 0; step < order; ++step) {
            if (node < 0) {
                ok = false;
                break;
            }
            const auto a = tree.shapes[static_cast<std::size_t>(node)].attributes.as_array();
            p.values.insert(p.values.end(), a.begin(), a.end());
            node = tree.shapes[static_cast<std::size_t>(node)].parent;
        }
        if (ok) out.push_back(std::move(p));
    }
    return out;
}

struct PatternDictionary {
    std::vector<int> orders;  // sorted ascending
    int codewords = 0;        // K per order
    int frames_per_video = 0; // provenance: m used at learning time
    std::uint64_t learn_seed = 0;
    std::array<double, AttributeVector::kDim> attr_mean{};
    std::array<double, AttributeVector::kDim> attr_sd{};  // never zero
    std::map<int, std::vector<std::vector<double>>> centroids;  // order -> K x (6*order)

    int encoded_dim() const { return codewords * static_cast<int>(orders.size()); }

    void standardize(Pattern& p) const {
        for (std::size_t i = 0; i < p.values.size(); ++i) {
            const std::size_t a = i % AttributeVector::kDim;
            p.values[i] = (p.values[i] - attr_mean[a]) / attr_sd[a];
        }
    }
};

using VideoLoader = std::function<FrameSequence(int)>;

// Pools patterns from m seeded-random frames of every training video and
// clusters each order with k-means. Deterministic given the seed.
inline PatternDictionary learn_dictionary(const VideoLoader& load_video, int n_videos, int m, int k,
                                          std::vector<int> orders, std::uint64_t seed, int kmeans_max_iters = 100,
                                          double kmeans_tol = 1e-6) {
    require(n_videos >= 1, "InsufficientPatterns", "empty training set");
    require(m >= 1, "InsufficientPatterns", "m must be >= 1");
    require(k >= 1, "InsufficientPatterns", "K must be >= 1");
    require(!orders.empty(), "InsufficientPatterns", "no chain orders requested");
    std::sort(orders.begin(), orders.end());

    PatternDictionary dict;
    dict.orders = orders;
    dict.codewords = k;
    dict.frames_per_video = m;
    dict.learn_seed = seed;

    std::map<int, std::vector<std::vector<double>>> pools;
    for (int o : orders) pools[o] = {};

    for (int v = 0; v < n_videos; ++v) {
        const FrameSequence seq = load_video(v);
        validate_sequence(seq);
        Rng rng(derive_seed(seed, "dict.frames", static_cast<std::uint64_t>(v)));
        const std::vector<int> picks = rng.sample_without_replacement(seq.length(), m);
        for (int f : picks) {
            const TreeOfShapes tree = flst(seq.frames[static_cast<std::size_t>(f)]);
            for (int o : orders)
                for (Pattern& p : extract_patterns(tree, o)) pools[o].push_back(std::move(p.values));
        }
    }

    // z-score statistics over every shape attribute dimension of the pool
    {
        const auto& base = pools.begin()->second;  // order-1 rows when present; any order tiles the same 6 stats
        std::array<double, AttributeVector::kDim> mean{}, sq{};
        long count = 0;
        for (const auto& row : base) {
            for (std::size_t i = 0; i < row.size(); ++i) {
                mean[i % AttributeVector::kDim] += row[i];
                sq[i % AttributeVector::kDim] += row[i] * row[i];
            }
            count += static_cast<long>(row.size()) / AttributeVector::kDim;
        }
        require(count > 0, "InsufficientPatterns", "training pool produced no shapes");
        for (std::size_t a = 0; a < mean.size(); ++a) {
            mean[a] /= static_cast<double>(count);
            double var = sq[a] / static_cast<double>(count) - mean[a] * mean[a];
            if (var < 0) var = 0;
            const double sd = std::sqrt(var);
            dict.attr_mean[a] = mean[a];
            dict.attr_sd[a] = sd > 0 ? sd : 1.0;
        }
    }

    for (int o : orders) {
        auto& pool = pools[o];
        require(static_cast<int>(pool.size()) >= k, "InsufficientPatterns",
                "order " + std::to_string(o) + " pooled only " + std::to_string(pool.size()) +
                    " patterns for K=" + std::to_string(k));
        for (auto& row : pool)
            for (std::size_t i = 0; i < row.size(); ++i)
                row[i] = (row[i] - dict.attr_mean[i % AttributeVector::kDim]) / dict.attr_sd[i % AttributeVector::kDim];
        KMeansResult km = kmeans(pool, k, derive_seed(seed, "dict.kmeans", static_cast<std::uint64_t>(o)),
                                 kmeans_max_iters, kmeans_tol);
        dict.centroids[o] = std::move(km.centroids);
    }
    return dict;
}

namespace detail {

inline int nearest_centroid(const std::vector<double>& p, const std::vector<std::vector<double>>& centroids) {
    double best = std::numeric_limits<double>::max();
    int arg = 0;
    for (std::size_t c = 0; c < centroids.size(); ++c) {
        const double d2 = sqdist(p, centroids[c]);
        if (d2 < best) {  // ties keep the lowest index
            best = d2;
            arg = static_cast<int>(c);
        }
    }
    return arg;
}

// raw assignment counts per order for one tree
inline std::map<int, std::vector<double>> tree_counts(const TreeOfShapes& tree, const PatternDictionary& dict) {
    std::map<int, std::vector<double>> counts;
    for (int o : dict.orders) {
        auto& bin = counts[o];
        bin.assign(static_cast<std::size_t>(dict.codewords), 0.0);
        const auto& ctr = dict.centroids.at(o);
        for (Pattern& p : extract_patterns(tree, o)) {
            require(p.values.size() == ctr[0].size(), "DimensionMismatch",
                    "pattern dim " + std::to_string(p.values.size()) + " vs dictionary dim " +
                        std::to_string(ctr[0].size()) + " at order " + std::to_string(o));
            dict.standardize(p);
            bin[static_cast<std::size_t>(nearest_centroid(p.values, ctr))] += 1.0;
        }
    }
    return counts;
}

inline std::vector<double> normalize_counts(const std::map<int, std::vector<double>>& counts,
                                            const PatternDictionary& dict) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(dict.encoded_dim()));
    for (int o : dict.orders) {
        const auto& bin = counts.at(o);
        double total = 0.0;
        for (double v : bin) total += v;
        for (double v : bin) out.push_back(total > 0 ? v / total : 0.0);  // all-zero block when no patterns
    }
    return out;
}

} // namespace detail

// Joint encoding of the L trees of one clip: per order, hard-assign every
// pattern to its nearest codeword, histogram, L1-normalize, concatenate.
inline std::vector<double> encode_clip(const std::vector<const TreeOfShapes*>& trees, const PatternDictionary& dict) {
    require(!dict.orders.empty() && dict.codewords >= 1, "DimensionMismatch", "dictionary has no codewords");
    std::map<int, std::vector<double>> counts;
    for (int o : dict.orders) counts[o].assign(static_cast<std::size_t>(dict.codewords), 0.0);
    for (const TreeOfShapes* t : trees) {
        auto tc = detail::tree_counts(*t, dict);
        for (int o : dict.orders) {
            auto& acc = counts[o];
            const auto& add = tc[o];
            for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += add[i];
        }
    }
    return detail::normalize_counts(counts, dict);
}

// Mean over all planned clips of the per-clip encodings.
inline Descriptor scopdt(const FrameSequence& seq, const PatternDictionary& dict, const ClipPlan& plan) {
    validate_sequence(seq);
    require(!plan.starts.empty(), "SequenceTooShort", "empty clip plan");
    const int last_needed = plan.starts.back() + plan.clip_length - 1;
    require(last_needed < seq.length(), "SequenceTooShort", "clip plan exceeds sequence length");

    // per-frame counts are clip-independent, so compute each tree once
    std::vector<std::map<int, std::vector<double>>> frame_counts(static_cast<std::size_t>(last_needed) + 1);
    for (int f = 0; f <= last_needed; ++f)
        frame_counts[static_cast<std::size_t>(f)] = detail::tree_counts(flst(seq.frames[static_cast<std::size_t>(f)]), dict);

    std::vector<double> mean(static_cast<std::size_t>(dict.encoded_dim()), 0.0);
    for (int start : plan.starts) {
        std::map<int, std::vector<double>> counts;
        for (int o : dict.orders) counts[o].assign(static_cast<std::size_t>(dict.codewords), 0.0);
        for (int f = start; f < start + plan.clip_length; ++f)
            for (int o : dict.orders) {
                auto& acc = counts[o];
                const auto& add = frame_counts[static_cast<std::size_t>(f)][o];
                for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += add[i];
            }
        const std::vector<double> enc = detail::normalize_counts(counts, dict);
        for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += enc[i];
    }
    for (double& v : mean) v /= static_cast<double>(plan.count());

    Descriptor d;
    d.kind = FeatureKind::ScopDt;
    d.values = std::move(mean);
    return d;
}

inline void write_dictionary(TextWriter& w, const PatternDictionary& dict) {
    w.line("DTDICT 1");
    w.kv("codewords", dict.codewords);
    w.kv("frames_per_video", dict.frames_per_video);
    w.kv("learn_seed", dict.learn_seed);
    {
        std::string os;
        for (std::size_t i = 0; i < dict.orders.size(); ++i) os += (i ? "," : "") + std::to_string(dict.orders[i]);
        w.kv("orders", os);
    }
    w.vec("attr_mean", std::vector<double>(dict.attr_mean.begin(), dict.attr_mean.end()));
    w.vec("attr_sd", std::vector<double>(dict.attr_sd.begin(), dict.attr_sd.end()));
    for (int o : dict.orders) {
        const auto& ctr = dict.centroids.at(o);
        w.line("centroids " + std::to_string(o) + " " + std::to_string(ctr.size()) + " " +
               std::to_string(ctr[0].size()));
        for (const auto& row : ctr) {
            std::string line;
            for (double v : row) line += (line.empty() ? "" : " ") + hexfloat(v);
            w.line(line);
        }
    }
    w.line("end_dict");
}

inline PatternDictionary read_dictionary(TextReader& r) {
    r.expect_key("DTDICT");
    require(r.token() == "1", "CorruptModel", "unsupported dictionary version");
    PatternDictionary dict;
    dict.codewords = r.kv_int("codewords");
    dict.frames_per_video = r.kv_int("frames_per_video");
    dict.learn_seed = r.kv_u64("learn_seed");
    {
        const std::string os = r.kv_str("orders");
        std::size_t pos = 0;
        while (pos < os.size()) {
            std::size_t comma = os.find(',', pos);
            if (comma == std::string::npos) comma = os.size();
            dict.orders.push_back(std::stoi(os.substr(pos, comma - pos)));
            pos = comma + 1;
        }
    }
    {
        const auto mean = r.kv_vec("attr_mean", AttributeVector::kDim);
        const auto sd = r.kv_vec("attr_sd", AttributeVector::kDim);
        std::copy(mean.begin(), mean.end(), dict.attr_mean.begin());
        std::copy(sd.begin(), sd.end(), dict.attr_sd.begin());
    }
    while (r.peek_is("centroids")) {
        r.expect_key("centroids");
        const int o = std::stoi(r.token());
        const int rows = std::stoi(r.token());
        const int cols = std::stoi(r.token());
        auto& ctr = dict.centroids[o];
        ctr.assign(static_cast<std::size_t>(rows), std::vector<double>(static_cast<std::size_t>(cols)));
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j) ctr[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                parse_double(r.token());
    }
    r.expect_key("end_dict");
    require(dict.centroids.size() == dict.orders.size(), "CorruptModel", "dictionary orders/centroid blocks mismatch");
    return dict;
}

inline void save_dictionary(const PatternDictionary& dict, const std::string& path) {
    TextWriter w;
    write_dictionary(w, dict);
    w.save(path);
}

inline PatternDictionary load_dictionary(const std::string& path) {
    TextReader r = TextReader::from_file(path);
    return read_dictionary(r);
}

} // namespace dts
