// Times the OpenMP kernels against the serial reference implementations on
// training-sized shapes and prints per-kernel speedups.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "cae/common.hpp"
#include "cae/kernels.hpp"

using namespace cae;
using Clock = std::chrono::steady_clock;

namespace {

double time_of(const std::function<void()>& fn, int reps) {
    fn();  // warm-up
    auto t0 = Clock::now();
    for (int i = 0; i < reps; ++i) fn();
    auto t1 = Clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

std::vector<float> random_vec(size_t n, uint64_t seed) {
    Rng rng(seed);
    std::vector<float> v(n);
    for (auto& x : v) x = float(rng.uniform(-1.0, 1.0));
    return v;
}

void row(const char* name, double ref_ms, double omp_ms) {
    std::printf("%-28s %10.3f ms %10.3f ms %8.2fx\n", name, ref_ms, omp_ms, ref_ms / omp_ms);
}

}  // namespace

int main() {
#ifdef _OPENMP
    std::printf("threads: %d\n", omp_get_max_threads());
#else
    std::printf("threads: 1 (OpenMP disabled)\n");
#endif
    std::printf("%-28s %13s %13s %9s\n", "kernel", "serial", "openmp", "speedup");

    const int reps = 10;
    {
        const int B = 50, C = 16, H = 32, W = 32, OC = 32;
        auto x = random_vec(size_t(B) * C * H * W, 1);
        auto w = random_vec(size_t(OC) * C * 9, 2);
        auto bias = random_vec(size_t(OC), 3);
        std::vector<float> y(size_t(B) * OC * H * W);
        double ref = time_of(
            [&] { kernels::ref::conv2d_forward(x.data(), B, C, H, W, w.data(), bias.data(), OC, y.data()); },
            reps);
        double omp = time_of(
            [&] { kernels::conv2d_forward(x.data(), B, C, H, W, w.data(), bias.data(), OC, y.data()); },
            reps);
        row("conv2d_forward 50x16x32x32", ref, omp);

        std::vector<float> dx(x.size());
        double refb = time_of(
            [&] { kernels::ref::conv2d_backward_input(y.data(), B, C, H, W, w.data(), OC, dx.data()); },
            reps);
        double ompb = time_of(
            [&] { kernels::conv2d_backward_input(y.data(), B, C, H, W, w.data(), OC, dx.data()); },
            reps);
        row("conv2d_backward_input", refb, ompb);

        std::vector<float> dw(w.size(), 0.0f), db(size_t(OC), 0.0f);
        double refw = time_of(
            [&] { kernels::ref::conv2d_backward_params(x.data(), y.data(), B, C, H, W, OC, dw.data(), db.data()); },
            reps);
        double ompw = time_of(
            [&] { kernels::conv2d_backward_params(x.data(), y.data(), B, C, H, W, OC, dw.data(), db.data()); },
            reps);
        row("conv2d_backward_params", refw, ompw);
    }
    {
        const int B = 64, IN = 3072, OUT = 256;
        auto x = random_vec(size_t(B) * IN, 4);
        auto w = random_vec(size_t(OUT) * IN, 5);
        auto bias = random_vec(size_t(OUT), 6);
        std::vector<float> y(size_t(B) * OUT);
        double ref = time_of(
            [&] { kernels::ref::dense_forward(x.data(), B, IN, w.data(), bias.data(), OUT, y.data()); },
            reps);
        double omp = time_of(
            [&] { kernels::dense_forward(x.data(), B, IN, w.data(), bias.data(), OUT, y.data()); },
            reps);
        row("dense_forward 64x3072x256", ref, omp);
    }
    {
        const int B = 64, C = 64, H = 16, W = 16;
        auto x = random_vec(size_t(B) * C * H * W, 7);
        std::vector<float> m(C), v(C);
        double ref = time_of([&] { kernels::ref::channel_mean_var(x.data(), B, C, H, W, m.data(), v.data()); },
                             reps);
        double omp = time_of([&] { kernels::channel_mean_var(x.data(), B, C, H, W, m.data(), v.data()); },
                             reps);
        row("channel_mean_var", ref, omp);
    }
    return 0;
}
