#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "dts/common.hpp"

namespace dts {

enum class KernelType { Linear, Rbf };

// Linear is the affine kernel x.z + 1, so a rank-1 bias direction is part of
// the span and two distinct 1-D points already give a regular Gram matrix.
struct Kernel {
    KernelType type = KernelType::Rbf;
    double gamma = 0.0;  // <= 0 resolves to 1/dim at training time

    double operator()(const std::vector<double>& a, const std::vector<double>& b) const {
        if (type == KernelType::Linear) {
            double dot = 0.0;
            for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
            return dot + 1.0;
        }
        double d2 = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            const double d = a[i] - b[i];
            d2 += d * d;
        }
        return std::exp(-gamma * d2);
    }

    Kernel resolved(int dim) const {
        Kernel k = *this;
        if (k.type == KernelType::Rbf && k.gamma <= 0.0) k.gamma = 1.0 / static_cast<double>(dim > 0 ? dim : 1);
        return k;
    }
};

inline std::string kernel_type_tag(KernelType t) { return t == KernelType::Linear ? "linear" : "rbf"; }

inline KernelType kernel_type_from_string(const std::string& s) {
    if (s == "linear") return KernelType::Linear;
    if (s == "rbf") return KernelType::Rbf;
    fail("CorruptModel", "unknown kernel type '" + s + "'");
}

} // namespace dts
