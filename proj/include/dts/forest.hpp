#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "dts/common.hpp"
#include "dts/rng.hpp"
#include "dts/serialize.hpp"

// Random forest of CART trees on bootstrap samples: squared-error splits for
// regression, Gini splits for classification, per-split feature subsampling.
// Fully deterministic given (data, params, seed).

namespace dts {

enum class ForestMode { Regression, Classification };

struct ForestParams {
    int n_trees = 100;
    int max_depth = 0;              // 0 = unlimited
    int min_leaf = 2;
    double feature_subsample = 0.0; // fraction of features per split; <= 0 = sqrt(dim) rule
};

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;         // leaf mean (regression)
    std::vector<double> votes;  // leaf class fractions (classification)
};

class Forest {
public:
    static Forest train_regressor(const std::vector<std::vector<double>>& x, const std::vector<double>& y,
                                  const ForestParams& params, std::uint64_t seed) {
        require(!x.empty() && x.size() == y.size(), "DimensionMismatch", "forest needs |X| = |y| >= 1");
        Forest f;
        f.mode_ = ForestMode::Regression;
        f.init(x, params, seed);
        f.targets_ = y;
        f.grow_all(x);
        return f;
    }

    static Forest train_classifier(const std::vector<std::vector<double>>& x, const std::vector<std::string>& labels,
                                   const ForestParams& params, std::uint64_t seed) {
        require(!x.empty() && x.size() == labels.size(), "DimensionMismatch", "forest needs |X| = |labels| >= 1");
        Forest f;
        f.mode_ = ForestMode::Classification;
        f.init(x, params, seed);
        f.classes_ = labels;
        std::sort(f.classes_.begin(), f.classes_.end());
        f.classes_.erase(std::unique(f.classes_.begin(), f.classes_.end()), f.classes_.end());
        f.targets_.resize(labels.size());
        for (std::size_t i = 0; i < labels.size(); ++i) {
            const auto it = std::lower_bound(f.classes_.begin(), f.classes_.end(), labels[i]);
            f.targets_[i] = static_cast<double>(it - f.classes_.begin());
        }
        f.grow_all(x);
        return f;
    }

    ForestMode mode() const { return mode_; }
    const std::vector<std::string>& classes() const { return classes_; }
    int input_dim() const { return dim_; }

    double predict_value(const std::vector<double>& x) const {
        check_input(x);
        double acc = 0.0;
        for (const auto& t : trees_) acc += leaf_of(t, x).value;
        return acc / static_cast<double>(trees_.size());
    }

    std::vector<double> predict_votes(const std::vector<double>& x) const {
        check_input(x);
        std::vector<double> acc(classes_.size(), 0.0);
        for (const auto& t : trees_) {
            const auto& v = leaf_of(t, x).votes;
            for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += v[i];
        }
        for (double& v : acc) v /= static_cast<double>(trees_.size());
        return acc;
    }

    std::string predict_class(const std::vector<double>& x) const {
        const auto votes = predict_votes(x);
        std::size_t arg = 0;
        for (std::size_t i = 1; i < votes.size(); ++i)
            if (votes[i] > votes[arg]) arg = i;  // ties keep the smallest label (classes_ sorted)
        return classes_[arg];
    }

    void write(TextWriter& w) const {
        w.kv("model_kind",
             std::string(mode_ == ForestMode::Regression ? "forest_regressor" : "forest_classifier"));
        w.kv("n_trees", params_.n_trees);
        w.kv("max_depth", params_.max_depth);
        w.kv("min_leaf", params_.min_leaf);
        w.kv("feature_subsample", params_.feature_subsample);
        w.kv("seed", seed_);
        w.kv("dim", dim_);
        w.kv("n_classes", static_cast<int>(classes_.size()));
        for (const auto& c : classes_) w.kv("class", c);
        for (const auto& t : trees_) {
            w.kv("tree", static_cast<int>(t.size()));
            for (const auto& node : t) {
                std::string line = std::to_string(node.feature) + " " + hexfloat(node.threshold) + " " +
                                   std::to_string(node.left) + " " + std::to_string(node.right) + " " +
                                   hexfloat(node.value);
                for (double v : node.votes) line += " " + hexfloat(v);
                w.line(line);
            }
        }
    }

    static Forest read(TextReader& r, ForestMode mode) {
        Forest f;
        f.mode_ = mode;
        f.params_.n_trees = r.kv_int("n_trees");
        f.params_.max_depth = r.kv_int("max_depth");
        f.params_.min_leaf = r.kv_int("min_leaf");
        f.params_.feature_subsample = r.kv_double("feature_subsample");
        f.seed_ = r.kv_u64("seed");
        f.dim_ = r.kv_int("dim");
        const int ncls = r.kv_int("n_classes");
        for (int i = 0; i < ncls; ++i) f.classes_.push_back(r.kv_str("class"));
        for (int t = 0; t < f.params_.n_trees; ++t) {
            const int nodes = r.kv_int("tree");
            std::vector<TreeNode> tree(static_cast<std::size_t>(nodes));
            for (int i = 0; i < nodes; ++i) {
                TreeNode& node = tree[static_cast<std::size_t>(i)];
                node.feature = std::stoi(r.token());
                node.threshold = parse_double(r.token());
                node.left = std::stoi(r.token());
                node.right = std::stoi(r.token());
                node.value = parse_double(r.token());
                node.votes.resize(static_cast<std::size_t>(ncls));
                for (int c = 0; c < ncls; ++c) node.votes[static_cast<std::size_t>(c)] = parse_double(r.token());
            }
            f.trees_.push_back(std::move(tree));
        }
        return f;
    }

private:
    void init(const std::vector<std::vector<double>>& x, const ForestParams& params, std::uint64_t seed) {
        params_ = params;
        seed_ = seed;
        dim_ = static_cast<int>(x[0].size());
        for (const auto& row : x)
            require(static_cast<int>(row.size()) == dim_, "DimensionMismatch", "ragged training matrix");
    }

    void check_input(const std::vector<double>& x) const {
        require(!trees_.empty(), "UntrainedBank", "forest not trained");
        require(static_cast<int>(x.size()) == dim_, "DimensionMismatch",
                "input dim " + std::to_string(x.size()) + " vs training dim " + std::to_string(dim_));
    }

    static const TreeNode& leaf_of(const std::vector<TreeNode>& tree, const std::vector<double>& x) {
        int at = 0;
        while (tree[static_cast<std::size_t>(at)].feature >= 0) {
            const TreeNode& n = tree[static_cast<std::size_t>(at)];
            at = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
        }
        return tree[static_cast<std::size_t>(at)];
    }

    int mtry() const {
        if (params_.feature_subsample > 0.0) {
            const int m = static_cast<int>(std::lround(params_.feature_subsample * dim_));
            return std::clamp(m, 1, dim_);
        }
        return std::clamp(static_cast<int>(std::lround(std::sqrt(static_cast<double>(dim_)))), 1, dim_);
    }

    void grow_all(const std::vector<std::vector<double>>& x) {
        const int n = static_cast<int>(x.size());
        trees_.reserve(static_cast<std::size_t>(params_.n_trees));
        for (int t = 0; t < params_.n_trees; ++t) {
            Rng rng(derive_seed(seed_, "forest.tree", static_cast<std::uint64_t>(t)));
            std::vector<int> sample(static_cast<std::size_t>(n));
            for (int& s : sample) s = static_cast<int>(rng.uniform_int(0, n - 1));
            std::vector<TreeNode> tree;
            grow_node(x, tree, sample, 0, rng);
            trees_.push_back(std::move(tree));
        }
    }

    void make_leaf(TreeNode& node, const std::vector<int>& samples) const {
        node.feature = -1;
        if (mode_ == ForestMode::Regression) {
            double acc = 0.0;
            for (int i : samples) acc += targets_[static_cast<std::size_t>(i)];
            node.value = acc / static_cast<double>(samples.size());
            node.votes.clear();
        } else {
            node.votes.assign(classes_.size(), 0.0);
            for (int i : samples) node.votes[static_cast<std::size_t>(targets_[static_cast<std::size_t>(i)])] += 1.0;
            for (double& v : node.votes) v /= static_cast<double>(samples.size());
            node.value = 0.0;
        }
    }

    int grow_node(const std::vector<std::vector<double>>& x, std::vector<TreeNode>& tree, std::vector<int>& samples,
                  int depth, Rng& rng) {
        const int self = static_cast<int>(tree.size());
        tree.emplace_back();

        bool pure = true;
        for (std::size_t i = 1; i < samples.size(); ++i)
            if (targets_[static_cast<std::size_t>(samples[i])] != targets_[static_cast<std::size_t>(samples[0])]) {
                pure = false;
                break;
            }
        const bool depth_done = params_.max_depth > 0 && depth >= params_.max_depth;
        if (pure || depth_done || static_cast<int>(samples.size()) < 2 * params_.min_leaf) {
            make_leaf(tree[static_cast<std::size_t>(self)], samples);
            return self;
        }

        int best_feature = -1;
        double best_threshold = 0.0, best_cost = std::numeric_limits<double>::max();
        const std::vector<int> feats = rng.sample_without_replacement(dim_, mtry());

        std::vector<std::pair<double, int>> vals;
        vals.reserve(samples.size());
        for (int f : feats) {
            vals.clear();
            for (int i : samples) vals.emplace_back(x[static_cast<std::size_t>(i)][static_cast<std::size_t>(f)], i);
            std::sort(vals.begin(), vals.end());
            if (mode_ == ForestMode::Regression) {
                best_split_sse(vals, f, best_feature, best_threshold, best_cost);
            } else {
                best_split_gini(vals, f, best_feature, best_threshold, best_cost);
            }
        }
        if (best_feature < 0) {
            make_leaf(tree[static_cast<std::size_t>(self)], samples);
            return self;
        }

        std::vector<int> left, right;
        for (int i : samples) {
            if (x[static_cast<std::size_t>(i)][static_cast<std::size_t>(best_feature)] <= best_threshold)
                left.push_back(i);
            else
                right.push_back(i);
        }
        if (static_cast<int>(left.size()) < params_.min_leaf || static_cast<int>(right.size()) < params_.min_leaf) {
            make_leaf(tree[static_cast<std::size_t>(self)], samples);
            return self;
        }
        samples.clear();
        samples.shrink_to_fit();

        tree[static_cast<std::size_t>(self)].feature = best_feature;
        tree[static_cast<std::size_t>(self)].threshold = best_threshold;
        const int l = grow_node(x, tree, left, depth + 1, rng);
        const int r = grow_node(x, tree, right, depth + 1, rng);
        tree[static_cast<std::size_t>(self)].left = l;
        tree[static_cast<std::size_t>(self)].right = r;
        return self;
    }

    void best_split_sse(const std::vector<std::pair<double, int>>& vals, int feature, int& best_feature,
                        double& best_threshold, double& best_cost) const {
        const std::size_t n = vals.size();
        double total = 0.0, total_sq = 0.0;
        for (const auto& [v, i] : vals) {
            const double y = targets_[static_cast<std::size_t>(i)];
            total += y;
            total_sq += y * y;
        }
        double left = 0.0, left_sq = 0.0;
        for (std::size_t pos = 0; pos + 1 < n; ++pos) {
            const double y = targets_[static_cast<std::size_t>(vals[pos].second)];
            left += y;
            left_sq += y * y;
            if (vals[pos].first == vals[pos + 1].first) continue;
            const std::size_t nl = pos + 1, nr = n - nl;
            if (static_cast<int>(nl) < params_.min_leaf || static_cast<int>(nr) < params_.min_leaf) continue;
            const double right = total - left, right_sq = total_sq - left_sq;
            const double cost = (left_sq - left * left / static_cast<double>(nl)) +
                                (right_sq - right * right / static_cast<double>(nr));
            if (cost < best_cost) {
                best_cost = cost;
                best_feature = feature;
                best_threshold = 0.5 * (vals[pos].first + vals[pos + 1].first);
            }
        }
    }

    void best_split_gini(const std::vector<std::pair<double, int>>& vals, int feature, int& best_feature,
                         double& best_threshold, double& best_cost) const {
        const std::size_t n = vals.size();
        const std::size_t ncls = classes_.size();
        std::vector<double> total(ncls, 0.0), left(ncls, 0.0);
        for (const auto& [v, i] : vals) total[static_cast<std::size_t>(targets_[static_cast<std::size_t>(i)])] += 1.0;
        for (std::size_t pos = 0; pos + 1 < n; ++pos) {
            left[static_cast<std::size_t>(targets_[static_cast<std::size_t>(vals[pos].second)])] += 1.0;
            if (vals[pos].first == vals[pos + 1].first) continue;
            const double nl = static_cast<double>(pos + 1), nr = static_cast<double>(n) - nl;
            if (nl < params_.min_leaf || nr < params_.min_leaf) continue;
            double gl = 1.0, gr = 1.0;
            for (std::size_t c = 0; c < ncls; ++c) {
                const double pl = left[c] / nl, pr = (total[c] - left[c]) / nr;
                gl -= pl * pl;
                gr -= pr * pr;
            }
            const double cost = nl * gl + nr * gr;
            if (cost < best_cost) {
                best_cost = cost;
                best_feature = feature;
                best_threshold = 0.5 * (vals[pos].first + vals[pos + 1].first);
            }
        }
    }

    ForestMode mode_ = ForestMode::Regression;
    ForestParams params_;
    std::uint64_t seed_ = 0;
    int dim_ = 0;
    std::vector<std::string> classes_;
    std::vector<double> targets_;  // class indices in classification mode
    std::vector<std::vector<TreeNode>> trees_;
};

} // namespace dts
