#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "dts/common.hpp"
#include "dts/kernel.hpp"
#include "dts/serialize.hpp"

// Maximum-margin binary classifier: hinge loss with box constraint C, solved
// in the dual by maximal-violating-pair SMO, decision values calibrated to
// [0, 1] posteriors by a two-parameter logistic map fitted with Newton steps.

namespace dts {

class BinaryClassifier {
public:
    // labels in {0, 1}; calibrated() estimates P(label == 1)
    static BinaryClassifier train(const std::vector<std::vector<double>>& x, const std::vector<int>& labels,
                                  Kernel kernel, double c, std::uint64_t /*seed: solver is deterministic*/ = 0) {
        const int n = static_cast<int>(x.size());
        require(n >= 1 && x.size() == labels.size(), "DimensionMismatch", "classifier needs |X| = |labels| >= 1");
        int pos = 0;
        for (int l : labels) pos += l != 0;
        require(pos > 0 && pos < n, "DegenerateLabels", "both classes must be present");
        require(c > 0.0, "DegenerateLabels", "C must be positive");

        BinaryClassifier m;
        m.kernel_ = kernel.resolved(static_cast<int>(x[0].size()));
        m.c_ = c;

        std::vector<double> y(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) y[static_cast<std::size_t>(i)] = labels[static_cast<std::size_t>(i)] ? 1.0 : -1.0;

        std::vector<double> k(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) {
                const double v = m.kernel_(x[static_cast<std::size_t>(i)], x[static_cast<std::size_t>(j)]);
                k[static_cast<std::size_t>(i) * n + j] = v;
                k[static_cast<std::size_t>(j) * n + i] = v;
            }

        std::vector<double> alpha(static_cast<std::size_t>(n), 0.0);
        std::vector<double> grad(static_cast<std::size_t>(n), -1.0);
        const double eps = 1e-6;
        const long max_iter = std::max<long>(20000, 200L * n);

        auto q = [&](int i, int j) {
            return y[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(j)] * k[static_cast<std::size_t>(i) * n + j];
        };

        double m_up = 0.0, m_low = 0.0;
        for (long iter = 0; iter < max_iter; ++iter) {
            int i = -1, j = -1;
            m_up = -std::numeric_limits<double>::max();
            m_low = std::numeric_limits<double>::max();
            for (int t = 0; t < n; ++t) {
                const double yg = -y[static_cast<std::size_t>(t)] * grad[static_cast<std::size_t>(t)];
                const bool in_up = (y[static_cast<std::size_t>(t)] > 0 && alpha[static_cast<std::size_t>(t)] < c) ||
                                   (y[static_cast<std::size_t>(t)] < 0 && alpha[static_cast<std::size_t>(t)] > 0);
                const bool in_low = (y[static_cast<std::size_t>(t)] < 0 && alpha[static_cast<std::size_t>(t)] < c) ||
                                    (y[static_cast<std::size_t>(t)] > 0 && alpha[static_cast<std::size_t>(t)] > 0);
                if (in_up && yg > m_up) {
                    m_up = yg;
                    i = t;
                }
                if (in_low && yg < m_low) {
                    m_low = yg;
                    j = t;
                }
            }
            if (i < 0 || j < 0 || m_up - m_low < eps) break;

            const double yi = y[static_cast<std::size_t>(i)], yj = y[static_cast<std::size_t>(j)];
            const double old_i = alpha[static_cast<std::size_t>(i)], old_j = alpha[static_cast<std::size_t>(j)];
            if (yi != yj) {
                double quad = q(i, i) + q(j, j) + 2.0 * k[static_cast<std::size_t>(i) * n + j];
                if (quad <= 0) quad = 1e-12;
                const double delta = (-grad[static_cast<std::size_t>(i)] - grad[static_cast<std::size_t>(j)]) / quad;
                const double diff = old_i - old_j;
                alpha[static_cast<std::size_t>(i)] += delta;
                alpha[static_cast<std::size_t>(j)] += delta;
                if (diff > 0 && alpha[static_cast<std::size_t>(j)] < 0) {
                    alpha[static_cast<std::size_t>(j)] = 0;
                    alpha[static_cast<std::size_t>(i)] = diff;
                } else if (diff <= 0 && alpha[static_cast<std::size_t>(i)] < 0) {
                    alpha[static_cast<std::size_t>(i)] = 0;
                    alpha[static_cast<std::size_t>(j)] = -diff;
                }
                if (diff > 0 && alpha[static_cast<std::size_t>(i)] > c) {
                    alpha[static_cast<std::size_t>(i)] = c;
                    alpha[static_cast<std::size_t>(j)] = c - diff;
                } else if (diff <= 0 && alpha[static_cast<std::size_t>(j)] > c) {
                    alpha[static_cast<std::size_t>(j)] = c;
                    alpha[static_cast<std::size_t>(i)] = c + diff;
                }
            } else {
                double quad = q(i, i) + q(j, j) - 2.0 * k[static_cast<std::size_t>(i) * n + j];
                if (quad <= 0) quad = 1e-12;
                const double delta = (grad[static_cast<std::size_t>(i)] - grad[static_cast<std::size_t>(j)]) / quad;
                const double sum = old_i + old_j;
                alpha[static_cast<std::size_t>(i)] -= delta;
                alpha[static_cast<std::size_t>(j)] += delta;
                if (sum > c && alpha[static_cast<std::size_t>(i)] > c) {
                    alpha[static_cast<std::size_t>(i)] = c;
                    alpha[static_cast<std::size_t>(j)] = sum - c;
                } else if (sum <= c && alpha[static_cast<std::size_t>(j)] < 0) {
                    alpha[static_cast<std::size_t>(j)] = 0;
                    alpha[static_cast<std::size_t>(i)] = sum;
                }
                if (sum > c && alpha[static_cast<std::size_t>(j)] > c) {
                    alpha[static_cast<std::size_t>(j)] = c;
                    alpha[static_cast<std::size_t>(i)] = sum - c;
                } else if (sum <= c && alpha[static_cast<std::size_t>(i)] < 0) {
                    alpha[static_cast<std::size_t>(i)] = 0;
                    alpha[static_cast<std::size_t>(j)] = sum;
                }
            }
            const double di = alpha[static_cast<std::size_t>(i)] - old_i;
            const double dj = alpha[static_cast<std::size_t>(j)] - old_j;
            if (di == 0.0 && dj == 0.0) break;
            for (int t = 0; t < n; ++t)
                grad[static_cast<std::size_t>(t)] += q(t, i) * di + q(t, j) * dj;
        }

        // rho from the KKT conditions (mean over free support vectors)
        {
            double ub = std::numeric_limits<double>::max(), lb = -std::numeric_limits<double>::max();
            double sum_free = 0.0;
            int n_free = 0;
            for (int t = 0; t < n; ++t) {
                const double yg = y[static_cast<std::size_t>(t)] * grad[static_cast<std::size_t>(t)];
                if (alpha[static_cast<std::size_t>(t)] >= c) {
                    if (y[static_cast<std::size_t>(t)] < 0) ub = std::min(ub, yg);
                    else lb = std::max(lb, yg);
                } else if (alpha[static_cast<std::size_t>(t)] <= 0) {
                    if (y[static_cast<std::size_t>(t)] > 0) ub = std::min(ub, yg);
                    else lb = std::max(lb, yg);
                } else {
                    ++n_free;
                    sum_free += yg;
                }
            }
            m.rho_ = n_free > 0 ? sum_free / n_free : (ub + lb) / 2.0;
        }

        std::vector<double> decisions(static_cast<std::size_t>(n));
        for (int t = 0; t < n; ++t)
            decisions[static_cast<std::size_t>(t)] =
                y[static_cast<std::size_t>(t)] * (grad[static_cast<std::size_t>(t)] + 1.0) - m.rho_;

        for (int t = 0; t < n; ++t) {
            if (alpha[static_cast<std::size_t>(t)] > 0.0) {
                m.sv_.push_back(x[static_cast<std::size_t>(t)]);
                m.coef_.push_back(alpha[static_cast<std::size_t>(t)] * y[static_cast<std::size_t>(t)]);
            }
        }
        m.fit_platt(decisions, labels);
        return m;
    }

    double decision(const std::vector<double>& x) const {
        require(!sv_.empty(), "UntrainedClassifier", "classifier not trained");
        require(x.size() == sv_[0].size(), "DimensionMismatch",
                "input dim " + std::to_string(x.size()) + " vs training dim " + std::to_string(sv_[0].size()));
        double acc = -rho_;
        for (std::size_t i = 0; i < sv_.size(); ++i) acc += coef_[i] * kernel_(sv_[i], x);
        return acc;
    }

    // P(label == 1 | f) = 1 / (1 + exp(A*f + B)); A < 0 for any sane fit
    double calibrated(const std::vector<double>& x) const { return sigmoid(-(platt_a_ * decision(x) + platt_b_)); }

    double calibrate_decision(double f) const { return sigmoid(-(platt_a_ * f + platt_b_)); }

    int predict_label(const std::vector<double>& x) const { return decision(x) >= 0.0 ? 1 : 0; }

    double platt_a() const { return platt_a_; }
    double platt_b() const { return platt_b_; }

    void write(TextWriter& w) const {
        w.kv("model_kind", std::string("svm_binary"));
        w.kv("kernel", kernel_type_tag(kernel_.type));
        w.kv("gamma", kernel_.gamma);
        w.kv("c", c_);
        w.kv("rho", rho_);
        w.kv("platt_a", platt_a_);
        w.kv("platt_b", platt_b_);
        w.kv("n_sv", static_cast<int>(sv_.size()));
        w.kv("dim", static_cast<int>(sv_.empty() ? 0 : sv_[0].size()));
        for (std::size_t i = 0; i < sv_.size(); ++i) {
            std::string line = hexfloat(coef_[i]);
            for (double v : sv_[i]) line += " " + hexfloat(v);
            w.line(line);
        }
    }

    static BinaryClassifier read(TextReader& r) {
        BinaryClassifier m;
        m.kernel_.type = kernel_type_from_string(r.kv_str("kernel"));
        m.kernel_.gamma = r.kv_double("gamma");
        m.c_ = r.kv_double("c");
        m.rho_ = r.kv_double("rho");
        m.platt_a_ = r.kv_double("platt_a");
        m.platt_b_ = r.kv_double("platt_b");
        const int nsv = r.kv_int("n_sv");
        const int dim = r.kv_int("dim");
        m.coef_.resize(static_cast<std::size_t>(nsv));
        m.sv_.assign(static_cast<std::size_t>(nsv), std::vector<double>(static_cast<std::size_t>(dim)));
        for (int i = 0; i < nsv; ++i) {
            m.coef_[static_cast<std::size_t>(i)] = parse_double(r.token());
            for (int j = 0; j < dim; ++j)
                m.sv_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = parse_double(r.token());
        }
        return m;
    }

private:
    static double sigmoid(double z) {
        if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
        const double e = std::exp(z);
        return e / (1.0 + e);
    }

    // Platt's sigmoid fit on training decision values, Newton with
    // backtracking, at most 100 iterations.
    void fit_platt(const std::vector<double>& decisions, const std::vector<int>& labels) {
        const int n = static_cast<int>(decisions.size());
        double prior1 = 0, prior0 = 0;
        for (int l : labels) (l != 0 ? prior1 : prior0) += 1.0;
        const double hi = (prior1 + 1.0) / (prior1 + 2.0);
        const double lo = 1.0 / (prior0 + 2.0);

        std::vector<double> t(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) t[static_cast<std::size_t>(i)] = labels[static_cast<std::size_t>(i)] ? hi : lo;

        double a = 0.0, b = std::log((prior0 + 1.0) / (prior1 + 1.0));
        auto objective = [&](double aa, double bb) {
            double f = 0.0;
            for (int i = 0; i < n; ++i) {
                const double z = decisions[static_cast<std::size_t>(i)] * aa + bb;
                const double ti = t[static_cast<std::size_t>(i)];
                if (z >= 0) f += ti * z + std::log1p(std::exp(-z));
                else f += (ti - 1.0) * z + std::log1p(std::exp(z));
            }
            return f;
        };
        double fval = objective(a, b);
        for (int iter = 0; iter < 100; ++iter) {
            double h11 = 1e-12, h22 = 1e-12, h21 = 0, g1 = 0, g2 = 0;
            for (int i = 0; i < n; ++i) {
                const double z = decisions[static_cast<std::size_t>(i)] * a + b;
                const double p = sigmoid(-z);  // 1/(1+e^z)
                const double q = 1.0 - p;
                const double d2 = p * q;
                h11 += decisions[static_cast<std::size_t>(i)] * decisions[static_cast<std::size_t>(i)] * d2;
                h22 += d2;
                h21 += decisions[static_cast<std::size_t>(i)] * d2;
                const double d1 = t[static_cast<std::size_t>(i)] - p;
                g1 += decisions[static_cast<std::size_t>(i)] * d1;
                g2 += d1;
            }
            if (std::abs(g1) < 1e-5 && std::abs(g2) < 1e-5) break;
            const double det = h11 * h22 - h21 * h21;
            const double da = -(h22 * g1 - h21 * g2) / det;
            const double db = -(-h21 * g1 + h11 * g2) / det;
            const double gd = g1 * da + g2 * db;
            double step = 1.0;
            bool moved = false;
            while (step >= 1e-10) {
                const double na = a + step * da, nb = b + step * db;
                const double nf = objective(na, nb);
                if (nf < fval + 1e-4 * step * gd) {
                    a = na;
                    b = nb;
                    fval = nf;
                    moved = true;
                    break;
                }
                step /= 2.0;
            }
            if (!moved) break;
        }
        platt_a_ = a;
        platt_b_ = b;
    }

    Kernel kernel_;
    double c_ = 1.0;
    double rho_ = 0.0;
    double platt_a_ = -1.0;
    double platt_b_ = 0.0;
    std::vector<std::vector<double>> sv_;
    std::vector<double> coef_;  // alpha_i * y_i for retained support vectors
};

} // namespace dts
