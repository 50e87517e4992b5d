#pragma once

// Brute-force enumeration oracle for the contrastive loss: plain double loops
// over positives and candidates with direct cosines, kept independent of the
// production log-sum-exp implementation.

#include <cmath>

#include "cae/losses.hpp"

namespace cae::testoracle {

inline double cncl_enumeration(const ContrastivePairSet<double>& pairs, double tau) {
    const int F = pairs.features.dim(1);
    auto cosine = [&](int a, int b) {
        double dot = 0, na = 0, nb = 0;
        for (int i = 0; i < F; ++i) {
            const double x = pairs.features.at2(a, i), y = pairs.features.at2(b, i);
            dot += x * y;
            na += x * x;
            nb += y * y;
        }
        return dot / (std::sqrt(na) * std::sqrt(nb));
    };
    double total = 0.0;
    for (const auto& e : pairs.entries) {
        for (int p : e.positive_rows) {
            double denom = 0.0;
            for (int c : e.positive_rows) denom += std::exp(cosine(e.anchor_row, c) / tau);
            for (int c : e.negative_rows) denom += std::exp(cosine(e.anchor_row, c) / tau);
            total += -std::log(std::exp(cosine(e.anchor_row, p) / tau) / denom);
        }
    }
    return total / double(pairs.entries.size());
}

inline ContrastivePairSet<double> random_pair_instance(uint64_t seed, int k, int n_pos,
                                                       int n_neg_per, int f) {
    Rng rng(seed);
    ContrastivePairSet<double> pairs;
    const int rows_per = 1 + n_pos;
    pairs.features = Tensor<double>({k * rows_per, f});
    for (auto& v : pairs.features.data) v = rng.uniform(-1.0, 1.0);
    pairs.row_category.resize(size_t(k) * rows_per);
    pairs.row_source.resize(size_t(k) * rows_per);
    for (int c = 0; c < k; ++c) {
        for (int r = 0; r < rows_per; ++r) {
            pairs.row_category[size_t(c * rows_per + r)] = c;
            pairs.row_source[size_t(c * rows_per + r)] = r - 1;
        }
    }
    for (int c = 0; c < k; ++c) {
        ContrastivePairSet<double>::Entry e;
        e.category = c;
        e.anchor_row = c * rows_per;
        for (int p = 0; p < n_pos; ++p) e.positive_rows.push_back(c * rows_per + 1 + p);
        int added = 0;
        for (int other = 0; other < k && added < n_neg_per; ++other) {
            if (other == c) continue;
            for (int r = 0; r < rows_per && added < n_neg_per; ++r) {
                e.negative_rows.push_back(other * rows_per + r);
                ++added;
            }
        }
        pairs.entries.push_back(e);
    }
    pairs.validate();
    return pairs;
}

}  // namespace cae::testoracle
