#pragma once

#include <algorithm>
#include <limits>
#include <string>
#include <vector>

#include "cae/nets.hpp"
#include "cae/tensor.hpp"

namespace cae {

template <typename T>
void softmax_rows(const Tensor<T>& logits, Tensor<T>& probs) {
    const int B = logits.dim(0), K = logits.dim(1);
    for (int b = 0; b < B; ++b) {
        const T* z = logits.ptr() + int64_t(b) * K;
        T* p = probs.ptr() + int64_t(b) * K;
        T zmax = z[0];
        for (int i = 1; i < K; ++i) zmax = std::max(zmax, z[i]);
        T sum = T(0);
        for (int i = 0; i < K; ++i) {
            p[i] = std::exp(z[i] - zmax);
            sum += p[i];
        }
        for (int i = 0; i < K; ++i) p[i] /= sum;
    }
}

// Mean cross-entropy of logits against hard labels.
template <typename T>
T ce_loss(const Tensor<T>& logits, const std::vector<int>& labels, Tensor<T>* dlogits = nullptr) {
    const int B = logits.dim(0), K = logits.dim(1);
    if (static_cast<int>(labels.size()) != B)
        throw ConfigError("ce_loss: label count does not match batch size");
    for (int y : labels)
        if (y < 0 || y >= K) throw ConfigError("ce_loss: label " + std::to_string(y) + " out of range");
    Tensor<T> probs(logits.shape);
    softmax_rows(logits, probs);
    T loss = T(0);
    for (int b = 0; b < B; ++b) {
        loss -= std::log(std::max(probs.at2(b, labels[size_t(b)]), T(1e-30)));
    }
    loss /= T(B);
    if (dlogits) {
        *dlogits = probs;
        for (int b = 0; b < B; ++b) {
            dlogits->at2(b, labels[size_t(b)]) -= T(1);
        }
        for (auto& v : dlogits->data) v /= T(B);
    }
    return loss;
}

// Mean over layers of ||mu_b - mu_r||^2 + ||var_b - var_r||^2. Gradients are
// with respect to the batch statistics.
template <typename T>
T bn_loss(const BnStatRecord<T>& batch, const BnStatRecord<T>& running,
          std::vector<std::vector<T>>* dmean = nullptr,
          std::vector<std::vector<T>>* dvar = nullptr) {
    if (batch.size() != running.size()) throw ConfigError("bn_loss: layer count mismatch");
    const size_t L = batch.size();
    if (L == 0) throw ConfigError("bn_loss: no batch-normalization layers");
    if (dmean) dmean->assign(L, {});
    if (dvar) dvar->assign(L, {});
    T total = T(0);
    for (size_t l = 0; l < L; ++l) {
        if (batch[l].layer != running[l].layer || batch[l].mean.size() != running[l].mean.size())
            throw ConfigError("bn_loss: layer mismatch at " + batch[l].layer);
        const size_t C = batch[l].mean.size();
        if (dmean) (*dmean)[l].assign(C, T(0));
        if (dvar) (*dvar)[l].assign(C, T(0));
        for (size_t c = 0; c < C; ++c) {
            const T dm = batch[l].mean[c] - running[l].mean[c];
            const T dv = batch[l].var[c] - running[l].var[c];
            total += dm * dm + dv * dv;
            if (dmean) (*dmean)[l][c] = T(2) * dm / T(L);
            if (dvar) (*dvar)[l][c] = T(2) * dv / T(L);
        }
    }
    return total / T(L);
}

// Negated mean KL(teacher || student): minimizing this drives the synthetic
// batch toward teacher/student disagreement. Always <= 0.
template <typename T>
T adv_loss(const Tensor<T>& student_logits, const Tensor<T>& teacher_logits,
           Tensor<T>* dstudent = nullptr, Tensor<T>* dteacher = nullptr) {
    if (!student_logits.same_shape(teacher_logits))
        throw ConfigError("adv_loss: logit shape mismatch");
    const int B = student_logits.dim(0), K = student_logits.dim(1);
    Tensor<T> p(teacher_logits.shape), q(student_logits.shape);
    softmax_rows(teacher_logits, p);
    softmax_rows(student_logits, q);
    if (dstudent) *dstudent = Tensor<T>(student_logits.shape);
    if (dteacher) *dteacher = Tensor<T>(teacher_logits.shape);
    T total = T(0);
    for (int b = 0; b < B; ++b) {
        T kl = T(0);
        for (int i = 0; i < K; ++i) {
            const T pi = p.at2(b, i);
            if (pi > T(0)) kl += pi * (std::log(pi) - std::log(std::max(q.at2(b, i), T(1e-30))));
        }
        total += kl;
        if (dstudent) {
            for (int i = 0; i < K; ++i)
                dstudent->at2(b, i) = (p.at2(b, i) - q.at2(b, i)) / T(B);
        }
        if (dteacher) {
            for (int i = 0; i < K; ++i) {
                const T pi = p.at2(b, i);
                const T ri = std::log(std::max(pi, T(1e-30))) -
                             std::log(std::max(q.at2(b, i), T(1e-30)));
                dteacher->at2(b, i) = -pi * (ri - kl) / T(B);
            }
        }
    }
    return -total / T(B);
}

// Temperature-scaled distillation KL, mean over batch, scaled by T^2.
template <typename T>
T kl_distill_loss(const Tensor<T>& student_logits, const Tensor<T>& teacher_logits, T temperature,
                  Tensor<T>* dstudent = nullptr, Tensor<T>* dteacher = nullptr) {
    if (!student_logits.same_shape(teacher_logits))
        throw ConfigError("kl_distill_loss: logit shape mismatch");
    if (!(temperature > T(0))) throw ConfigError("kl_distill_loss: temperature must be > 0");
    const int B = student_logits.dim(0), K = student_logits.dim(1);
    Tensor<T> ts(teacher_logits.shape), ss(student_logits.shape);
    for (int64_t i = 0; i < ts.numel(); ++i) ts[i] = teacher_logits[i] / temperature;
    for (int64_t i = 0; i < ss.numel(); ++i) ss[i] = student_logits[i] / temperature;
    Tensor<T> p(ts.shape), q(ss.shape);
    softmax_rows(ts, p);
    softmax_rows(ss, q);
    if (dstudent) *dstudent = Tensor<T>(student_logits.shape);
    if (dteacher) *dteacher = Tensor<T>(teacher_logits.shape);
    T total = T(0);
    for (int b = 0; b < B; ++b) {
        T kl = T(0);
        for (int i = 0; i < K; ++i) {
            const T pi = p.at2(b, i);
            if (pi > T(0)) kl += pi * (std::log(pi) - std::log(std::max(q.at2(b, i), T(1e-30))));
        }
        total += kl;
        if (dstudent) {
            for (int i = 0; i < K; ++i)
                dstudent->at2(b, i) = temperature * (q.at2(b, i) - p.at2(b, i)) / T(B);
        }
        if (dteacher) {
            for (int i = 0; i < K; ++i) {
                const T pi = p.at2(b, i);
                const T ri = std::log(std::max(pi, T(1e-30))) -
                             std::log(std::max(q.at2(b, i), T(1e-30)));
                dteacher->at2(b, i) = temperature * pi * (ri - kl) / T(B);
            }
        }
    }
    return temperature * temperature * total / T(B);
}

// Contrastive pair set over rows of a shared feature matrix. Entries index
// into `features`; row_category / row_source record provenance (source -1
// marks an anchor row).
template <typename T>
struct ContrastivePairSet {
    Tensor<T> features;  // R x F
    std::vector<int> row_category;
    std::vector<int> row_source;
    struct Entry {
        int category;
        int anchor_row;
        std::vector<int> positive_rows;
        std::vector<int> negative_rows;
    };
    std::vector<Entry> entries;

    void validate() const {
        const int R = features.dim(0);
        for (const auto& e : entries) {
            if (e.anchor_row < 0 || e.anchor_row >= R)
                throw ConfigError("contrastive pair set: anchor row out of range");
            if (e.positive_rows.empty()) throw ConfigError("contrastive pair set: no positives");
            for (int r : e.positive_rows)
                if (row_category[size_t(r)] != e.category)
                    throw ConfigError("contrastive pair set: positive from a different category");
            for (int r : e.negative_rows)
                if (row_category[size_t(r)] == e.category)
                    throw ConfigError("contrastive pair set: negative traces to its own category");
        }
    }
};

// InfoNCE-style loss over cosine similarities:
//   -(1/K) sum_k sum_{p in P_k} log( exp(sim(a_k, p)/tau)
//                                    / sum_{c in P_k u N_k} exp(sim(a_k, c)/tau) )
template <typename T>
T cncl_loss(const ContrastivePairSet<T>& pairs, T tau, Tensor<T>* dfeatures = nullptr) {
    if (!(tau > T(0))) throw ConfigError("cncl_loss: tau must be > 0");
    const int R = pairs.features.dim(0), F = pairs.features.dim(1);
    const size_t K = pairs.entries.size();
    if (K == 0) throw ConfigError("cncl_loss: empty pair set");

    std::vector<T> norms(static_cast<size_t>(R), T(0));
    for (int r = 0; r < R; ++r) {
        T s = T(0);
        const T* f = pairs.features.ptr() + int64_t(r) * F;
        for (int i = 0; i < F; ++i) s += f[i] * f[i];
        norms[size_t(r)] = std::sqrt(s);
        if (!(norms[size_t(r)] > T(0)))
            throw NumericError("cncl_loss: zero-norm feature vector at row " + std::to_string(r));
    }
    if (dfeatures) {
        *dfeatures = Tensor<T>(pairs.features.shape);
    }

    auto sim = [&](int a, int c) {
        const T* fa = pairs.features.ptr() + int64_t(a) * F;
        const T* fc = pairs.features.ptr() + int64_t(c) * F;
        T dot = T(0);
        for (int i = 0; i < F; ++i) dot += fa[i] * fc[i];
        return dot / (norms[size_t(a)] * norms[size_t(c)]);
    };
    // d sim(a,c) / d f_a and / d f_c
    auto add_sim_grad = [&](int a, int c, T coeff) {
        const T* fa = pairs.features.ptr() + int64_t(a) * F;
        const T* fc = pairs.features.ptr() + int64_t(c) * F;
        const T na = norms[size_t(a)], nc = norms[size_t(c)];
        const T s = sim(a, c);
        T* ga = dfeatures->ptr() + int64_t(a) * F;
        T* gc = dfeatures->ptr() + int64_t(c) * F;
        for (int i = 0; i < F; ++i) {
            ga[i] += coeff * (fc[i] / (na * nc) - s * fa[i] / (na * na));
            gc[i] += coeff * (fa[i] / (na * nc) - s * fc[i] / (nc * nc));
        }
    };

    T total = T(0);
    for (const auto& e : pairs.entries) {
        std::vector<int> cands = e.positive_rows;
        cands.insert(cands.end(), e.negative_rows.begin(), e.negative_rows.end());
        std::vector<T> scaled(cands.size());
        T smax = -std::numeric_limits<T>::infinity();
        for (size_t i = 0; i < cands.size(); ++i) {
            scaled[i] = sim(e.anchor_row, cands[i]) / tau;
            smax = std::max(smax, scaled[i]);
        }
        T sum = T(0);
        for (size_t i = 0; i < cands.size(); ++i) sum += std::exp(scaled[i] - smax);
        const T lse = smax + std::log(sum);
        T pos_sum = T(0);
        for (size_t i = 0; i < e.positive_rows.size(); ++i) pos_sum += scaled[i];
        const T npos = T(e.positive_rows.size());
        total += npos * lse - pos_sum;
        if (dfeatures) {
            // dL_k/d scaled_i = |P|*w_i - 1{i in P}; chain through /tau then sim.
            const T coeff_base = T(1) / (tau * T(K));
            for (size_t i = 0; i < cands.size(); ++i) {
                const T w = std::exp(scaled[i] - smax) / sum;
                T d = npos * w;
                if (i < e.positive_rows.size()) d -= T(1);
                add_sim_grad(e.anchor_row, cands[i], d * coeff_base);
            }
        }
    }
    return total / T(K);
}

}  // namespace cae
