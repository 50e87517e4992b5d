#pragma once

#include <cmath>
#include <vector>

#include "cae/nets.hpp"

namespace cae {

// lr = min + (base - min)/2 * (1 + cos(pi * t / T))
struct ScheduleState {
    double base_lr = 0.0;
    double min_lr = 0.0;
    int64_t step = 0;
    int64_t horizon = 1;
};

inline double cosine_lr(const ScheduleState& s) {
    if (s.step < 0 || s.step > s.horizon || s.min_lr > s.base_lr || s.horizon <= 0)
        throw ConfigError("cosine_lr: invalid schedule state");
    return s.min_lr +
           0.5 * (s.base_lr - s.min_lr) * (1.0 + std::cos(M_PI * double(s.step) / double(s.horizon)));
}

// SGD with classical momentum. One instance must always step the same
// parameter list (velocity buffers align by segment order).
class Sgd {
public:
    explicit Sgd(float lr = 0.1f, float momentum = 0.9f) : lr_(lr), momentum_(momentum) {}

    void set_lr(float lr) { lr_ = lr; }
    float lr() const { return lr_; }

    void step(std::vector<ParamSegment<float>> segs) {
        if (momentum_ > 0.0f && velocity_.empty()) {
            for (auto& seg : segs) velocity_.emplace_back(seg.value->shape);
        }
        for (size_t s = 0; s < segs.size(); ++s) {
            float* p = segs[s].value->ptr();
            const float* g = segs[s].grad->ptr();
            const int64_t n = segs[s].value->numel();
            if (momentum_ > 0.0f) {
                float* v = velocity_[s].ptr();
                for (int64_t i = 0; i < n; ++i) {
                    v[i] = momentum_ * v[i] + g[i];
                    p[i] -= lr_ * v[i];
                }
            } else {
                for (int64_t i = 0; i < n; ++i) p[i] -= lr_ * g[i];
            }
        }
    }

private:
    float lr_, momentum_;
    std::vector<Tensor<float>> velocity_;
};

class Adam {
public:
    explicit Adam(float lr = 1e-3f, float beta1 = 0.9f, float beta2 = 0.999f, float eps = 1e-8f)
        : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

    void set_lr(float lr) { lr_ = lr; }
    float lr() const { return lr_; }
    int64_t t() const { return t_; }

    void step(std::vector<ParamSegment<float>> segs) {
        if (m_.empty()) {
            for (auto& seg : segs) {
                m_.emplace_back(seg.value->shape);
                v_.emplace_back(seg.value->shape);
            }
        }
        ++t_;
        const float bc1 = 1.0f - std::pow(beta1_, float(t_));
        const float bc2 = 1.0f - std::pow(beta2_, float(t_));
        for (size_t s = 0; s < segs.size(); ++s) {
            float* p = segs[s].value->ptr();
            const float* g = segs[s].grad->ptr();
            float* m = m_[s].ptr();
            float* v = v_[s].ptr();
            const int64_t n = segs[s].value->numel();
            for (int64_t i = 0; i < n; ++i) {
                m[i] = beta1_ * m[i] + (1.0f - beta1_) * g[i];
                v[i] = beta2_ * v[i] + (1.0f - beta2_) * g[i] * g[i];
                const float mh = m[i] / bc1;
                const float vh = v[i] / bc2;
                p[i] -= lr_ * mh / (std::sqrt(vh) + eps_);
            }
        }
    }

    // Exposed for checkpointing.
    std::vector<Tensor<float>>& moment1() { return m_; }
    std::vector<Tensor<float>>& moment2() { return v_; }
    void set_t(int64_t t) { t_ = t; }

private:
    float lr_, beta1_, beta2_, eps_;
    int64_t t_ = 0;
    std::vector<Tensor<float>> m_, v_;
};

}  // namespace cae
