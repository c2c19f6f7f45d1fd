#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "dts/common.hpp"
#include "dts/image.hpp"

// Tree of shapes of a grayscale frame, built as the deduplicated union of
// hole-filled connected components of upper level sets {p : I(p) >= l}
// (4-connectivity) and lower level sets {p : I(p) <= l} (8-connectivity),
// ordered by inclusion. Equivalent shape family to the interpolation-based
// transform on integer-valued images, and directly checkable against a
// brute-force oracle.

namespace dts {

enum class Polarity { Upper, Lower };

struct AttributeVector {
    static constexpr int kDim = 6;

    double log_area_fraction = 0.0;  // ln(area / (H*W)), root = 0
    double compactness = 1.0;        // 4*pi*area / perimeter^2, single pixel = 1
    double elongation = 1.0;         // minor/major moment-axis ratio in (0, 1]
    double contrast = 0.0;           // |level - level(parent)| / 255, root = 0
    double polarity_sign = 1.0;      // +1 upper, -1 lower
    double depth_fraction = 0.0;     // depth / max tree depth, root = 0

    std::array<double, kDim> as_array() const {
        return {log_area_fraction, compactness, elongation, contrast, polarity_sign, depth_fraction};
    }
};

struct Shape {
    Polarity polarity = Polarity::Upper;
    int level = 0;
    int area = 0;
    int parent = -1;  // -1 for the root
    std::vector<int> children;
    AttributeVector attributes;
};

struct TreeOfShapes {
    int height = 0;
    int width = 0;
    int root = 0;
    std::vector<Shape> shapes;
};

namespace detail {

struct RawShape {
    std::vector<std::uint64_t> bits;
    int area = 0;
    int anchor = 0;  // smallest pixel index in the set
    bool has_upper = false;
    bool has_lower = false;
    int upper_level = 0;  // tightest (largest) upper threshold producing this set
    int lower_level = 0;  // tightest (smallest) lower threshold
};

inline std::uint64_t hash_bits(const std::vector<std::uint64_t>& bits) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (std::uint64_t w : bits) {
        h ^= w;
        h *= 0x100000001B3ULL;
    }
    return h;
}

struct FlstBuilder {
    const Image& img;
    int h, w, n, words;
    std::vector<int> comp;        // component id per pixel, -1 outside the level set
    std::vector<std::uint8_t> inset;
    std::vector<std::uint8_t> exterior;
    std::vector<int> queue;
    std::vector<RawShape> shapes;
    std::unordered_map<std::uint64_t, std::vector<int>> dedup;

    explicit FlstBuilder(const Image& image)
        : img(image), h(image.height), w(image.width), n(h * w), words((n + 63) / 64), comp(n), inset(n),
          exterior(n) {}

    void neighbors4(int p, int out[8], int& cnt) const {
        cnt = 0;
        const int y = p / w, x = p % w;
        if (x > 0) out[cnt++] = p - 1;
        if (x + 1 < w) out[cnt++] = p + 1;
        if (y > 0) out[cnt++] = p - w;
        if (y + 1 < h) out[cnt++] = p + w;
    }

    void neighbors8(int p, int out[8], int& cnt) const {
        cnt = 0;
        const int y = p / w, x = p % w;
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
                if (dx == 0 && dy == 0) continue;
                const int yy = y + dy, xx = x + dx;
                if (yy >= 0 && yy < h && xx >= 0 && xx < w) out[cnt++] = yy * w + xx;
            }
    }

    void process_level(int level, Polarity pol) {
        for (int p = 0; p < n; ++p)
            inset[p] = pol == Polarity::Upper ? (img.pixels[p] >= level) : (img.pixels[p] <= level);

        // label connected components of the level set
        std::fill(comp.begin(), comp.end(), -1);
        int ncomp = 0;
        int nb[8], nbc;
        for (int p = 0; p < n; ++p) {
            if (!inset[p] || comp[p] >= 0) continue;
            const int id = ncomp++;
            comp[p] = id;
            queue.clear();
            queue.push_back(p);
            for (std::size_t qi = 0; qi < queue.size(); ++qi) {
                const int q = queue[qi];
                if (pol == Polarity::Upper) neighbors4(q, nb, nbc);
                else neighbors8(q, nb, nbc);
                for (int k = 0; k < nbc; ++k) {
                    const int r = nb[k];
                    if (inset[r] && comp[r] < 0) {
                        comp[r] = id;
                        queue.push_back(r);
                    }
                }
            }
        }

        for (int c = 0; c < ncomp; ++c) saturate(c, level, pol);
    }

    // Fill the holes of component c: flood the complement of c from the
    // border with the dual connectivity; everything not reached is the shape.
    void saturate(int c, int level, Polarity pol) {
        std::fill(exterior.begin(), exterior.end(), std::uint8_t{0});
        queue.clear();
        auto push_border = [&](int p) {
            if (comp[p] != c && !exterior[p]) {
                exterior[p] = 1;
                queue.push_back(p);
            }
        };
        for (int x = 0; x < w; ++x) {
            push_border(x);
            push_border((h - 1) * w + x);
        }
        for (int y = 0; y < h; ++y) {
            push_border(y * w);
            push_border(y * w + (w - 1));
        }
        int nb[8], nbc;
        for (std::size_t qi = 0; qi < queue.size(); ++qi) {
            const int q = queue[qi];
            if (pol == Polarity::Upper) neighbors8(q, nb, nbc);  // dual of 4
            else neighbors4(q, nb, nbc);                          // dual of 8
            for (int k = 0; k < nbc; ++k) {
                const int r = nb[k];
                if (comp[r] != c && !exterior[r]) {
                    exterior[r] = 1;
                    queue.push_back(r);
                }
            }
        }

        std::vector<std::uint64_t> bits(words, 0);
        int area = 0, anchor = -1;
        for (int p = 0; p < n; ++p) {
            if (!exterior[p]) {
                bits[p >> 6] |= std::uint64_t{1} << (p & 63);
                ++area;
                if (anchor < 0) anchor = p;
            }
        }
        record(std::move(bits), area, anchor, level, pol);
    }

    void record(std::vector<std::uint64_t>&& bits, int area, int anchor, int level, Polarity pol) {
        const std::uint64_t hsh = hash_bits(bits);
        auto& bucket = dedup[hsh];
        for (int idx : bucket) {
            if (shapes[idx].bits == bits) {
                merge_occurrence(shapes[idx], level, pol);
                return;
            }
        }
        RawShape s;
        s.bits = std::move(bits);
        s.area = area;
        s.anchor = anchor;
        merge_occurrence(s, level, pol);
        bucket.push_back(static_cast<int>(shapes.size()));
        shapes.push_back(std::move(s));
    }

    static void merge_occurrence(RawShape& s, int level, Polarity pol) {
        if (pol == Polarity::Upper) {
            s.upper_level = s.has_upper ? std::max(s.upper_level, level) : level;
            s.has_upper = true;
        } else {
            s.lower_level = s.has_lower ? std::min(s.lower_level, level) : level;
            s.has_lower = true;
        }
    }
};

inline void compute_attributes(TreeOfShapes& tree, const std::vector<std::vector<int>>& pixels) {
    const int n = tree.height * tree.width;
    const int w = tree.width;

    // depths
    std::vector<int> depth(tree.shapes.size(), 0);
    int max_depth = 0;
    {
        std::vector<int> order{tree.root};
        for (std::size_t i = 0; i < order.size(); ++i) {
            const int s = order[i];
            for (int c : tree.shapes[s].children) {
                depth[c] = depth[s] + 1;
                max_depth = std::max(max_depth, depth[c]);
                order.push_back(c);
            }
        }
    }

    std::vector<std::uint8_t> member(n, 0);
    for (std::size_t si = 0; si < tree.shapes.size(); ++si) {
        Shape& s = tree.shapes[si];
        const std::vector<int>& px = pixels[si];
        AttributeVector a;

        a.log_area_fraction = std::log(static_cast<double>(s.area) / static_cast<double>(n));
        a.polarity_sign = s.polarity == Polarity::Upper ? 1.0 : -1.0;
        a.depth_fraction = max_depth > 0 ? static_cast<double>(depth[si]) / max_depth : 0.0;
        a.contrast = s.parent < 0 ? 0.0 : std::abs(s.level - tree.shapes[s.parent].level) / 255.0;

        for (int p : px) member[p] = 1;
        long perim = 0;
        double sx = 0, sy = 0;
        for (int p : px) {
            const int y = p / w, x = p % w;
            if (x == 0 || !member[p - 1]) ++perim;
            if (x + 1 == w || !member[p + 1]) ++perim;
            if (y == 0 || !member[p - w]) ++perim;
            if (y + 1 == tree.height || !member[p + w]) ++perim;
            sx += x;
            sy += y;
        }
        const double cx = sx / s.area, cy = sy / s.area;
        // second-order central moments, pixels treated as unit squares
        double mxx = s.area / 12.0, myy = s.area / 12.0, mxy = 0.0;
        for (int p : px) {
            const double dx = p % w - cx, dy = p / w - cy;
            mxx += dx * dx;
            myy += dy * dy;
            mxy += dx * dy;
        }
        for (int p : px) member[p] = 0;

        if (s.area == 1) {
            a.compactness = 1.0;
            a.elongation = 1.0;
        } else {
            a.compactness = std::min(1.0, 4.0 * std::numbers::pi * s.area / (static_cast<double>(perim) * perim));
            const double tr = mxx + myy;
            const double disc = std::sqrt((mxx - myy) * (mxx - myy) + 4.0 * mxy * mxy);
            const double lmax = 0.5 * (tr + disc), lmin = 0.5 * (tr - disc);
            a.elongation = lmax > 0 ? std::sqrt(std::max(lmin, 0.0) / lmax) : 1.0;
            if (a.elongation > 1.0) a.elongation = 1.0;
            if (a.elongation <= 0.0) a.elongation = 1e-12;
        }
        s.attributes = a;
    }
}

} // namespace detail

struct FlstResult {
    TreeOfShapes tree;
    std::vector<std::vector<int>> pixels;  // ascending pixel indices per shape, canonical order
};

inline FlstResult flst_with_pixels(const Image& img) {
    require(img.height >= 1 && img.width >= 1 && img.size() >= 1, "EmptySequence", "flst on empty frame");
    detail::FlstBuilder b(img);

    std::array<std::uint8_t, 256> present{};
    for (std::uint8_t v : img.pixels) present[v] = 1;
    for (int v = 0; v < 256; ++v) {
        if (!present[v]) continue;
        b.process_level(v, Polarity::Upper);
        b.process_level(v, Polarity::Lower);
    }

    // canonical order: area desc, level asc, min pixel asc (bitmap compare as
    // a final deterministic tiebreak)
    struct Key {
        int area, level, anchor, idx;
        Polarity pol;
    };
    std::vector<Key> keys;
    keys.reserve(b.shapes.size());
    for (std::size_t i = 0; i < b.shapes.size(); ++i) {
        const detail::RawShape& s = b.shapes[i];
        const Polarity pol = s.has_upper ? Polarity::Upper : Polarity::Lower;
        const int level = s.has_upper ? s.upper_level : s.lower_level;
        keys.push_back({s.area, level, s.anchor, static_cast<int>(i), pol});
    }
    std::sort(keys.begin(), keys.end(), [&](const Key& a, const Key& c) {
        if (a.area != c.area) return a.area > c.area;
        if (a.level != c.level) return a.level < c.level;
        if (a.anchor != c.anchor) return a.anchor < c.anchor;
        return b.shapes[a.idx].bits < b.shapes[c.idx].bits;
    });

    FlstResult out;
    out.tree.height = img.height;
    out.tree.width = img.width;
    out.tree.root = 0;
    out.tree.shapes.resize(keys.size());
    out.pixels.resize(keys.size());

    // parent = smallest strictly containing shape; shapes are processed in
    // decreasing area so the current owner of any pixel of s is its parent
    std::vector<int> owner(static_cast<std::size_t>(img.size()), -1);
    for (std::size_t i = 0; i < keys.size(); ++i) {
        const detail::RawShape& rs = b.shapes[keys[i].idx];
        Shape& s = out.tree.shapes[i];
        s.polarity = keys[i].pol;
        s.level = keys[i].level;
        s.area = rs.area;

        std::vector<int>& px = out.pixels[i];
        px.reserve(static_cast<std::size_t>(rs.area));
        for (int word = 0; word < b.words; ++word) {
            std::uint64_t bits = rs.bits[word];
            while (bits) {
                const int bit = std::countr_zero(bits);
                px.push_back(word * 64 + bit);
                bits &= bits - 1;
            }
        }
        s.parent = owner[px.front()];
        if (s.parent >= 0) out.tree.shapes[s.parent].children.push_back(static_cast<int>(i));
        for (int p : px) owner[p] = static_cast<int>(i);
    }

    detail::compute_attributes(out.tree, out.pixels);
    return out;
}

inline TreeOfShapes flst(const Image& img) { return flst_with_pixels(img).tree; }

inline const AttributeVector& shape_attributes(const TreeOfShapes& tree, int shape_index) {
    require(shape_index >= 0 && shape_index < static_cast<int>(tree.shapes.size()), "DimensionMismatch",
            "shape index out of range");
    return tree.shapes[static_cast<std::size_t>(shape_index)].attributes;
}

// Indented text dump for golden-file tests and debugging.
inline std::string dump_tree(const TreeOfShapes& tree) {
    std::ostringstream out;
    struct Item {
        int shape, depth;
    };
    std::vector<Item> stack{{tree.root, 0}};
    while (!stack.empty()) {
        const Item it = stack.back();
        stack.pop_back();
        const Shape& s = tree.shapes[static_cast<std::size_t>(it.shape)];
        for (int i = 0; i < it.depth; ++i) out << "  ";
        char buf[160];
        std::snprintf(buf, sizeof(buf), "shape %d: area=%d level=%d pol=%c contrast=%.6g compact=%.6g elong=%.6g",
                      it.shape, s.area, s.level, s.polarity == Polarity::Upper ? '+' : '-', s.attributes.contrast,
                      s.attributes.compactness, s.attributes.elongation);
        out << buf << "\n";
        for (auto c = s.children.rbegin(); c != s.children.rend(); ++c) stack.push_back({*c, it.depth + 1});
    }
    return out.str();
}

} // namespace dts
