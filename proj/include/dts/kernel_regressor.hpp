#pragma once

#include <string>
#include <vector>

#include "dts/common.hpp"
#include "dts/kernel.hpp"
#include "dts/linalg.hpp"
#include "dts/serialize.hpp"

namespace dts {

// Squared-loss kernel regression with ridge term: coefficients solve
// (G + lambda*I) alpha = y - mean(y), the bias being absorbed by target
// centering. lambda = 0 interpolates when the Gram system is regular and
// raises SingularSystem otherwise.
class KernelRegressor {
public:
    static KernelRegressor train(const std::vector<std::vector<double>>& x, const std::vector<double>& y,
                                 Kernel kernel, double lambda) {
        require(!x.empty() && x.size() == y.size(), "DimensionMismatch", "regressor needs |X| = |y| >= 1");
        require(lambda >= 0.0, "SingularSystem", "ridge lambda must be non-negative");
        const int n = static_cast<int>(x.size());

        KernelRegressor m;
        m.kernel_ = kernel.resolved(static_cast<int>(x[0].size()));
        m.lambda_ = lambda;
        m.support_ = x;
        m.bias_ = 0.0;
        for (double v : y) m.bias_ += v;
        m.bias_ /= n;

        std::vector<double> gram(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                gram[static_cast<std::size_t>(i) * n + j] =
                    m.kernel_(x[static_cast<std::size_t>(i)], x[static_cast<std::size_t>(j)]) + (i == j ? lambda : 0.0);
        std::vector<double> rhs(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) rhs[static_cast<std::size_t>(i)] = y[static_cast<std::size_t>(i)] - m.bias_;

        require(solve_linear(gram, rhs, n), "SingularSystem",
                "Gram system is rank-deficient; use lambda > 0");
        m.coef_ = std::move(rhs);
        return m;
    }

    double raw(const std::vector<double>& x) const {
        require(!support_.empty(), "UntrainedBank", "kernel regressor not trained");
        require(x.size() == support_[0].size(), "DimensionMismatch",
                "input dim " + std::to_string(x.size()) + " vs training dim " + std::to_string(support_[0].size()));
        double acc = bias_;
        for (std::size_t i = 0; i < support_.size(); ++i) acc += coef_[i] * kernel_(support_[i], x);
        return acc;
    }

    // synthesizability scores live in [0, 1]
    double predict(const std::vector<double>& x) const { return clamp01(raw(x)); }

    const Kernel& kernel() const { return kernel_; }
    double lambda() const { return lambda_; }

    void write(TextWriter& w) const {
        w.kv("model_kind", std::string("kernel_regressor"));
        w.kv("kernel", kernel_type_tag(kernel_.type));
        w.kv("gamma", kernel_.gamma);
        w.kv("lambda", lambda_);
        w.kv("bias", bias_);
        w.kv("n", static_cast<int>(support_.size()));
        w.kv("dim", static_cast<int>(support_.empty() ? 0 : support_[0].size()));
        for (std::size_t i = 0; i < support_.size(); ++i) {
            std::string line = hexfloat(coef_[i]);
            for (double v : support_[i]) line += " " + hexfloat(v);
            w.line(line);
        }
    }

    static KernelRegressor read(TextReader& r) {
        KernelRegressor m;
        m.kernel_.type = kernel_type_from_string(r.kv_str("kernel"));
        m.kernel_.gamma = r.kv_double("gamma");
        m.lambda_ = r.kv_double("lambda");
        m.bias_ = r.kv_double("bias");
        const int n = r.kv_int("n");
        const int dim = r.kv_int("dim");
        m.coef_.resize(static_cast<std::size_t>(n));
        m.support_.assign(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(dim)));
        for (int i = 0; i < n; ++i) {
            m.coef_[static_cast<std::size_t>(i)] = parse_double(r.token());
            for (int j = 0; j < dim; ++j)
                m.support_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = parse_double(r.token());
        }
        return m;
    }

private:
    Kernel kernel_;
    double lambda_ = 0.0;
    double bias_ = 0.0;
    std::vector<std::vector<double>> support_;
    std::vector<double> coef_;
};

} // namespace dts
