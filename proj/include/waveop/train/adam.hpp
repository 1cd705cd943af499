#pragma once

#include <cmath>
#include <vector>

#include "waveop/core/error.hpp"

namespace waveop::train {

/// Adaptive moment optimizer with decoupled weight decay.
class AdamW {
public:
    double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

    void step(std::vector<double>& theta, const std::vector<double>& grad, double lr,
              double weight_decay) {
        if (m_.empty()) {
            m_.assign(theta.size(), 0.0);
            v_.assign(theta.size(), 0.0);
        }
        if (grad.size() != theta.size() || m_.size() != theta.size())
            throw ShapeError("AdamW: gradient size mismatch");
        ++t_;
        const double bc1 = 1.0 - std::pow(beta1, double(t_));
        const double bc2 = 1.0 - std::pow(beta2, double(t_));
        for (std::size_t i = 0; i < theta.size(); ++i) {
            m_[i] = beta1 * m_[i] + (1.0 - beta1) * grad[i];
            v_[i] = beta2 * v_[i] + (1.0 - beta2) * grad[i] * grad[i];
            const double mhat = m_[i] / bc1;
            const double vhat = v_[i] / bc2;
            theta[i] -= lr * (mhat / (std::sqrt(vhat) + eps) + weight_decay * theta[i]);
        }
    }

    std::size_t steps() const { return t_; }

private:
    std::vector<double> m_, v_;
    std::size_t t_ = 0;
};

} // namespace waveop::train
