#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace ambigen {

// Adaptive-moment gradient descent with bias correction. State is plain data
// so checkpoints can serialize it.
struct Adam {
    double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    std::vector<double> m, v;
    int64_t t = 0;

    void init(size_t n) {
        m.assign(n, 0);
        v.assign(n, 0);
        t = 0;
    }

    void step(std::vector<double>& params, const std::vector<double>& grad, double lr) {
        ++t;
        double c1 = 1 - std::pow(beta1, double(t));
        double c2 = 1 - std::pow(beta2, double(t));
        for (size_t i = 0; i < params.size(); ++i) {
            m[i] = beta1 * m[i] + (1 - beta1) * grad[i];
            v[i] = beta2 * v[i] + (1 - beta2) * grad[i] * grad[i];
            params[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
        }
    }
};

} // namespace ambigen
