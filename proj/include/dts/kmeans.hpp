#pragma once

#include <limits>
#include <vector>

#include "dts/common.hpp"
#include "dts/rng.hpp"

namespace dts {

struct KMeansResult {
    std::vector<std::vector<double>> centroids;
    std::vector<int> assignment;
    std::vector<double> objective_trace;  // sum of squared distances after each assignment pass
};

namespace detail {
inline double sqdist(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}
} // namespace detail

// Lloyd iterations with k-means++ seeding. Deterministic given the seed:
// nearest-centroid ties break to the lowest centroid index, empty clusters
// are reseeded from the point farthest from its centroid.
inline KMeansResult kmeans(const std::vector<std::vector<double>>& points, int k, std::uint64_t seed,
                           int max_iters = 100, double tol = 1e-6) {
    const int n = static_cast<int>(points.size());
    require(k >= 1, "InsufficientPatterns", "k must be >= 1");
    require(n >= k, "InsufficientPatterns",
            "only " + std::to_string(n) + " points for k=" + std::to_string(k));
    const std::size_t dim = points[0].size();
    for (const auto& p : points)
        require(p.size() == dim, "DimensionMismatch", "inconsistent point dimensions in k-means pool");

    Rng rng(seed);
    KMeansResult res;
    res.centroids.reserve(static_cast<std::size_t>(k));

    // k-means++ seeding
    std::vector<double> best_d2(static_cast<std::size_t>(n), std::numeric_limits<double>::max());
    std::vector<char> chosen(static_cast<std::size_t>(n), 0);
    {
        const int first = static_cast<int>(rng.uniform_int(0, n - 1));
        res.centroids.push_back(points[static_cast<std::size_t>(first)]);
        chosen[static_cast<std::size_t>(first)] = 1;
    }
    while (static_cast<int>(res.centroids.size()) < k) {
        double total = 0.0;
        for (int i = 0; i < n; ++i) {
            const double d2 = detail::sqdist(points[static_cast<std::size_t>(i)], res.centroids.back());
            if (d2 < best_d2[static_cast<std::size_t>(i)]) best_d2[static_cast<std::size_t>(i)] = d2;
            total += best_d2[static_cast<std::size_t>(i)];
        }
        int pick = -1;
        if (total > 0.0) {
            const double target = rng.uniform() * total;
            double acc = 0.0;
            for (int i = 0; i < n; ++i) {
                acc += best_d2[static_cast<std::size_t>(i)];
                if (acc >= target) {
                    pick = i;
                    break;
                }
            }
            if (pick < 0) pick = n - 1;
        } else {
            for (int i = 0; i < n; ++i)
                if (!chosen[static_cast<std::size_t>(i)]) {
                    pick = i;
                    break;
                }
            if (pick < 0) pick = 0;
        }
        chosen[static_cast<std::size_t>(pick)] = 1;
        res.centroids.push_back(points[static_cast<std::size_t>(pick)]);
    }

    res.assignment.assign(static_cast<std::size_t>(n), 0);
    std::vector<double> dist_to_own(static_cast<std::size_t>(n), 0.0);
    double prev_obj = std::numeric_limits<double>::max();

    for (int iter = 0; iter < max_iters; ++iter) {
        double obj = 0.0;
        for (int i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::max();
            int arg = 0;
            for (int c = 0; c < k; ++c) {
                const double d2 = detail::sqdist(points[static_cast<std::size_t>(i)],
                                                 res.centroids[static_cast<std::size_t>(c)]);
                if (d2 < best) {
                    best = d2;
                    arg = c;
                }
            }
            res.assignment[static_cast<std::size_t>(i)] = arg;
            dist_to_own[static_cast<std::size_t>(i)] = best;
            obj += best;
        }
        res.objective_trace.push_back(obj);
        if (prev_obj - obj <= tol && prev_obj >= obj) break;
        prev_obj = obj;

        std::vector<std::vector<double>> sums(static_cast<std::size_t>(k), std::vector<double>(dim, 0.0));
        std::vector<int> counts(static_cast<std::size_t>(k), 0);
        for (int i = 0; i < n; ++i) {
            const int c = res.assignment[static_cast<std::size_t>(i)];
            ++counts[static_cast<std::size_t>(c)];
            const auto& p = points[static_cast<std::size_t>(i)];
            auto& s = sums[static_cast<std::size_t>(c)];
            for (std::size_t d = 0; d < dim; ++d) s[d] += p[d];
        }
        for (int c = 0; c < k; ++c) {
            if (counts[static_cast<std::size_t>(c)] > 0) {
                auto& ctr = res.centroids[static_cast<std::size_t>(c)];
                const auto& s = sums[static_cast<std::size_t>(c)];
                for (std::size_t d = 0; d < dim; ++d) ctr[d] = s[d] / counts[static_cast<std::size_t>(c)];
            } else {
                int far = 0;
                double fd = -1.0;
                for (int i = 0; i < n; ++i)
                    if (dist_to_own[static_cast<std::size_t>(i)] > fd) {
                        fd = dist_to_own[static_cast<std::size_t>(i)];
                        far = i;
                    }
                res.centroids[static_cast<std::size_t>(c)] = points[static_cast<std::size_t>(far)];
                dist_to_own[static_cast<std::size_t>(far)] = 0.0;
            }
        }
    }
    return res;
}

} // namespace dts
