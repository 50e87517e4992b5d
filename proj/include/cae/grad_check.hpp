#pragma once

#include <functional>
#include <vector>

#include "cae/common.hpp"

namespace cae {

// Central finite-difference gradient verification, run on float64 shadows of
// the float32 training code. Samples up to sample_count coordinates of the
// probe and returns the max relative error between the analytic gradient and
// (f(x+h) - f(x-h)) / 2h.
struct GradCheckOptions {
    int sample_count = 24;
    double step = 1e-3;
    uint64_t seed = 0;
};

inline double grad_check(const std::function<double(const std::vector<double>&)>& loss,
                         const std::function<std::vector<double>(const std::vector<double>&)>& grad,
                         const std::vector<double>& probe, const GradCheckOptions& opt = {}) {
    const double f0 = loss(probe);
    if (!std::isfinite(f0)) throw NumericError("loss is non-finite at the gradient-check probe");
    std::vector<double> analytic = grad(probe);
    if (analytic.size() != probe.size())
        throw NumericError("analytic gradient size does not match probe size");

    double gmax = 0.0;
    for (double g : analytic) gmax = std::max(gmax, std::abs(g));

    // Sample distinct coordinates.
    std::vector<size_t> idx;
    const size_t n = probe.size();
    if (n <= size_t(opt.sample_count)) {
        for (size_t i = 0; i < n; ++i) idx.push_back(i);
    } else {
        Rng rng(mix_seed({opt.seed, 0xF1D0ull}));
        std::vector<bool> taken(n, false);
        while (idx.size() < size_t(opt.sample_count)) {
            size_t i = size_t(rng.below(n));
            if (!taken[i]) {
                taken[i] = true;
                idx.push_back(i);
            }
        }
    }

    double max_rel = 0.0;
    std::vector<double> x = probe;
    for (size_t i : idx) {
        const double keep = x[i];
        x[i] = keep + opt.step;
        const double fp = loss(x);
        x[i] = keep - opt.step;
        const double fm = loss(x);
        x[i] = keep;
        if (!std::isfinite(fp) || !std::isfinite(fm))
            throw NumericError("loss is non-finite during finite differencing");
        const double fd = (fp - fm) / (2.0 * opt.step);
        const double a = analytic[i];
        // Floor the denominator at a small fraction of the gradient scale so
        // finite-difference noise on near-zero components does not blow up
        // the ratio.
        const double denom = std::max({std::abs(a), std::abs(fd), 1e-3 * gmax, 1e-10});
        max_rel = std::max(max_rel, std::abs(a - fd) / denom);
    }
    return max_rel;
}

}  // namespace cae
