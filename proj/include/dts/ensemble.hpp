#pragma once

#include <map>
#include <string>
#include <vector>

#include "dts/common.hpp"
#include "dts/descriptor.hpp"
#include "dts/rng.hpp"
#include "dts/serialize.hpp"
#include "dts/svm.hpp"

namespace dts {

// Decision-level fusion weights, one per feature kind, normalized to sum 1.
struct FusionWeights {
    std::map<FeatureKind, double> alpha;

    static FusionWeights from_raw(const std::map<FeatureKind, double>& raw) {
        double total = 0.0;
        for (const auto& [k, w] : raw) {
            require(w >= 0.0, "WeightMismatch", "fusion weights must be non-negative");
            total += w;
        }
        require(total > 0.0, "WeightMismatch", "fusion weights must not all be zero");
        FusionWeights fw;
        for (const auto& [k, w] : raw) fw.alpha[k] = w / total;
        return fw;
    }
};

// Weighted average of per-kind scores, clamped to [0, 1]. Written as
// c + sum alpha_k (s_k - c) so that fusing identical scores returns them
// unchanged, at any weights.
inline double fuse_scores(const std::map<FeatureKind, double>& scores, const FusionWeights& weights) {
    require(!scores.empty(), "WeightMismatch", "no scores to fuse");
    require(scores.size() == weights.alpha.size(), "WeightMismatch", "score kinds do not match weight kinds");
    for (const auto& [k, s] : scores)
        require(weights.alpha.count(k) > 0, "WeightMismatch",
                "no fusion weight for kind " + feature_kind_tag(k));
    const double c = scores.begin()->second;
    double dev = 0.0;
    for (const auto& [k, s] : scores) dev += weights.alpha.at(k) * (s - c);
    return clamp01(c + dev);
}

// Per-feature-kind calibrated max-margin members combined by score
// averaging: binary tasks use one member per kind, multi-class tasks one
// one-vs-rest member per class per kind.
class EnsembleClassifier {
public:
    static EnsembleClassifier train(const std::map<FeatureKind, std::vector<std::vector<double>>>& x_by_kind,
                                    const std::vector<std::string>& labels, Kernel kernel, double c,
                                    std::uint64_t seed) {
        require(!x_by_kind.empty(), "MissingFeatureKind", "ensemble needs at least one feature kind");
        require(!labels.empty(), "DegenerateLabels", "ensemble needs training labels");
        for (const auto& [k, rows] : x_by_kind)
            require(rows.size() == labels.size(), "DimensionMismatch",
                    "kind " + feature_kind_tag(k) + " row count does not match labels");

        EnsembleClassifier e;
        e.classes_ = labels;
        std::sort(e.classes_.begin(), e.classes_.end());
        e.classes_.erase(std::unique(e.classes_.begin(), e.classes_.end()), e.classes_.end());

        if (e.classes_.size() == 1) {
            for (const auto& [kind, rows] : x_by_kind) e.members_[kind] = {};
            return e;  // constant classifier
        }

        std::uint64_t unit = 0;
        for (const auto& [kind, rows] : x_by_kind) {
            auto& ms = e.members_[kind];
            if (e.classes_.size() == 2) {
                std::vector<int> y(labels.size());
                for (std::size_t i = 0; i < labels.size(); ++i) y[i] = labels[i] == e.classes_[1] ? 1 : 0;
                ms.push_back(BinaryClassifier::train(rows, y, kernel, c, derive_seed(seed, "ensemble", unit++)));
            } else {
                for (const std::string& cls : e.classes_) {
                    std::vector<int> y(labels.size());
                    for (std::size_t i = 0; i < labels.size(); ++i) y[i] = labels[i] == cls ? 1 : 0;
                    ms.push_back(BinaryClassifier::train(rows, y, kernel, c, derive_seed(seed, "ensemble", unit++)));
                }
            }
        }
        return e;
    }

    const std::vector<std::string>& classes() const { return classes_; }
    bool trained() const { return !classes_.empty(); }

    std::map<std::string, double> class_scores(const std::map<FeatureKind, const Descriptor*>& feats) const {
        require(trained(), "UntrainedClassifier", "classifier not trained");
        std::map<std::string, double> scores;
        for (const auto& cls : classes_) scores[cls] = 0.0;
        if (classes_.size() == 1) {
            scores[classes_[0]] = 1.0;
            return scores;
        }
        for (const auto& [kind, members] : members_) {
            const auto it = feats.find(kind);
            require(it != feats.end() && it->second != nullptr, "MissingFeatureKind",
                    "descriptor of kind " + feature_kind_tag(kind) + " required by the ensemble");
            const std::vector<double>& x = it->second->values;
            if (classes_.size() == 2) {
                const double p = members[0].calibrated(x);
                scores[classes_[1]] += p;
                scores[classes_[0]] += 1.0 - p;
            } else {
                for (std::size_t ci = 0; ci < classes_.size(); ++ci) scores[classes_[ci]] += members[ci].calibrated(x);
            }
        }
        for (auto& [cls, s] : scores) s /= static_cast<double>(members_.size());
        return scores;
    }

    // argmax of the mean calibrated scores; exact ties resolve to the
    // lexicographically smallest class label
    std::string classify(const std::map<FeatureKind, const Descriptor*>& feats) const {
        const auto scores = class_scores(feats);
        std::string best;
        double best_score = -1.0;
        for (const auto& [cls, s] : scores) {  // std::map iterates labels in lexicographic order
            if (s > best_score) {
                best_score = s;
                best = cls;
            }
        }
        return best;
    }

    void write(TextWriter& w) const {
        w.kv("model_kind", std::string("ensemble"));
        w.kv("n_classes", static_cast<int>(classes_.size()));
        for (const auto& c : classes_) w.kv("class", c);
        w.kv("n_kinds", static_cast<int>(members_.size()));
        for (const auto& [kind, members] : members_) {
            w.kv("kind", feature_kind_tag(kind));
            w.kv("n_members", static_cast<int>(members.size()));
            for (const auto& m : members) m.write(w);
        }
    }

    static EnsembleClassifier read(TextReader& r) {
        EnsembleClassifier e;
        const int ncls = r.kv_int("n_classes");
        for (int i = 0; i < ncls; ++i) e.classes_.push_back(r.kv_str("class"));
        const int nkinds = r.kv_int("n_kinds");
        for (int k = 0; k < nkinds; ++k) {
            const FeatureKind kind = feature_kind_from_string(r.kv_str("kind"));
            const int nm = r.kv_int("n_members");
            auto& ms = e.members_[kind];
            for (int i = 0; i < nm; ++i) {
                r.expect_key("model_kind");
                require(r.token() == "svm_binary", "CorruptModel", "ensemble member must be svm_binary");
                ms.push_back(BinaryClassifier::read(r));
            }
        }
        return e;
    }

private:
    std::vector<std::string> classes_;  // sorted
    std::map<FeatureKind, std::vector<BinaryClassifier>> members_;
};

} // namespace dts
