#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

// OpenMP compute kernels. Every kernel parallelizes only over loops whose
// iterations own disjoint output elements and keeps each output's reduction
// order fixed (ic -> kh -> kw for convs, batch-major for stats), so results
// are bit-identical across thread counts. The serial implementations in
// kernels::ref are independent per-element rewrites used by the tests; they
// agree with these kernels up to FMA-contraction rounding.
// All convolutions are 3x3, stride 1, zero-padding 1.
namespace cae::kernels {

template <typename T>
void conv2d_forward(const T* x, int B, int C, int H, int W, const T* w, const T* bias, int OC,
                    T* y) {
    const int64_t plane = int64_t(H) * W;
#pragma omp parallel for schedule(static) collapse(2)
    for (int b = 0; b < B; ++b) {
        for (int oc = 0; oc < OC; ++oc) {
            T* yp = y + (int64_t(b) * OC + oc) * plane;
            const T bv = bias ? bias[oc] : T(0);
            for (int64_t i = 0; i < plane; ++i) yp[i] = bv;
            for (int ic = 0; ic < C; ++ic) {
                const T* xp = x + (int64_t(b) * C + ic) * plane;
                const T* wp = w + (int64_t(oc) * C + ic) * 9;
                for (int kh = 0; kh < 3; ++kh) {
                    const int oh_lo = std::max(0, 1 - kh);
                    const int oh_hi = std::min(H, H + 1 - kh);
                    for (int kw = 0; kw < 3; ++kw) {
                        const T wv = wp[kh * 3 + kw];
                        const int ow_lo = std::max(0, 1 - kw);
                        const int ow_hi = std::min(W, W + 1 - kw);
                        for (int oh = oh_lo; oh < oh_hi; ++oh) {
                            const T* xr = xp + int64_t(oh + kh - 1) * W + (kw - 1);
                            T* yr = yp + int64_t(oh) * W;
                            for (int ow = ow_lo; ow < ow_hi; ++ow) yr[ow] += wv * xr[ow];
                        }
                    }
                }
            }
        }
    }
}

template <typename T>
void conv2d_backward_input(const T* dy, int B, int C, int H, int W, const T* w, int OC, T* dx) {
    const int64_t plane = int64_t(H) * W;
#pragma omp parallel for schedule(static) collapse(2)
    for (int b = 0; b < B; ++b) {
        for (int ic = 0; ic < C; ++ic) {
            T* dxp = dx + (int64_t(b) * C + ic) * plane;
            for (int64_t i = 0; i < plane; ++i) dxp[i] = T(0);
            for (int oc = 0; oc < OC; ++oc) {
                const T* dyp = dy + (int64_t(b) * OC + oc) * plane;
                const T* wp = w + (int64_t(oc) * C + ic) * 9;
                for (int kh = 0; kh < 3; ++kh) {
                    // ih = oh + kh - 1  =>  oh = ih + 1 - kh
                    const int ih_lo = std::max(0, kh - 1);
                    const int ih_hi = std::min(H, H + kh - 1);
                    for (int kw = 0; kw < 3; ++kw) {
                        const T wv = wp[kh * 3 + kw];
                        const int iw_lo = std::max(0, kw - 1);
                        const int iw_hi = std::min(W, W + kw - 1);
                        for (int ih = ih_lo; ih < ih_hi; ++ih) {
                            const T* dyr = dyp + int64_t(ih + 1 - kh) * W + (1 - kw);
                            T* dxr = dxp + int64_t(ih) * W;
                            for (int iw = iw_lo; iw < iw_hi; ++iw) dxr[iw] += wv * dyr[iw];
                        }
                    }
                }
            }
        }
    }
}

// Accumulates into dw / db.
template <typename T>
void conv2d_backward_params(const T* x, const T* dy, int B, int C, int H, int W, int OC, T* dw,
                            T* db) {
    const int64_t plane = int64_t(H) * W;
#pragma omp parallel for schedule(static)
    for (int oc = 0; oc < OC; ++oc) {
        for (int ic = 0; ic < C; ++ic) {
            T* dwp = dw + (int64_t(oc) * C + ic) * 9;
            for (int kh = 0; kh < 3; ++kh) {
                const int oh_lo = std::max(0, 1 - kh);
                const int oh_hi = std::min(H, H + 1 - kh);
                for (int kw = 0; kw < 3; ++kw) {
                    const int ow_lo = std::max(0, 1 - kw);
                    const int ow_hi = std::min(W, W + 1 - kw);
                    // Four independent accumulator chains to break the FMA
                    // latency dependency; combined in a fixed order.
                    T a0 = T(0), a1 = T(0), a2 = T(0), a3 = T(0);
                    for (int b = 0; b < B; ++b) {
                        const T* xp = x + (int64_t(b) * C + ic) * plane;
                        const T* dyp = dy + (int64_t(b) * OC + oc) * plane;
                        for (int oh = oh_lo; oh < oh_hi; ++oh) {
                            const T* xr = xp + int64_t(oh + kh - 1) * W + (kw - 1);
                            const T* dyr = dyp + int64_t(oh) * W;
                            int ow = ow_lo;
                            for (; ow + 4 <= ow_hi; ow += 4) {
                                a0 += dyr[ow] * xr[ow];
                                a1 += dyr[ow + 1] * xr[ow + 1];
                                a2 += dyr[ow + 2] * xr[ow + 2];
                                a3 += dyr[ow + 3] * xr[ow + 3];
                            }
                            for (; ow < ow_hi; ++ow) a0 += dyr[ow] * xr[ow];
                        }
                    }
                    dwp[kh * 3 + kw] += (a0 + a1) + (a2 + a3);
                }
            }
        }
        if (db) {
            T acc = T(0);
            for (int b = 0; b < B; ++b) {
                const T* dyp = dy + (int64_t(b) * OC + oc) * plane;
                for (int64_t i = 0; i < plane; ++i) acc += dyp[i];
            }
            db[oc] += acc;
        }
    }
}

template <typename T>
void dense_forward(const T* x, int B, int IN, const T* w, const T* bias, int OUT, T* y) {
#pragma omp parallel for schedule(static) collapse(2)
    for (int b = 0; b < B; ++b) {
        for (int o = 0; o < OUT; ++o) {
            const T* xr = x + int64_t(b) * IN;
            const T* wr = w + int64_t(o) * IN;
            T a0 = bias ? bias[o] : T(0), a1 = T(0), a2 = T(0), a3 = T(0);
            int i = 0;
            for (; i + 4 <= IN; i += 4) {
                a0 += wr[i] * xr[i];
                a1 += wr[i + 1] * xr[i + 1];
                a2 += wr[i + 2] * xr[i + 2];
                a3 += wr[i + 3] * xr[i + 3];
            }
            for (; i < IN; ++i) a0 += wr[i] * xr[i];
            y[int64_t(b) * OUT + o] = (a0 + a1) + (a2 + a3);
        }
    }
}

template <typename T>
void dense_backward_input(const T* dy, int B, int IN, const T* w, int OUT, T* dx) {
#pragma omp parallel for schedule(static)
    for (int b = 0; b < B; ++b) {
        T* dxr = dx + int64_t(b) * IN;
        const T* dyr = dy + int64_t(b) * OUT;
        for (int i = 0; i < IN; ++i) dxr[i] = T(0);
        for (int o = 0; o < OUT; ++o) {
            const T g = dyr[o];
            const T* wr = w + int64_t(o) * IN;
            for (int i = 0; i < IN; ++i) dxr[i] += g * wr[i];
        }
    }
}

// Accumulates into dw / db.
template <typename T>
void dense_backward_params(const T* x, const T* dy, int B, int IN, int OUT, T* dw, T* db) {
#pragma omp parallel for schedule(static)
    for (int o = 0; o < OUT; ++o) {
        T* dwr = dw + int64_t(o) * IN;
        T dbacc = T(0);
        for (int b = 0; b < B; ++b) {
            const T g = dy[int64_t(b) * OUT + o];
            const T* xr = x + int64_t(b) * IN;
            for (int i = 0; i < IN; ++i) dwr[i] += g * xr[i];
            dbacc += g;
        }
        if (db) db[o] += dbacc;
    }
}

template <typename T>
void avgpool2_forward(const T* x, int B, int C, int H, int W, T* y) {
    const int OH = H / 2, OW = W / 2;
#pragma omp parallel for schedule(static) collapse(2)
    for (int b = 0; b < B; ++b) {
        for (int c = 0; c < C; ++c) {
            const T* xp = x + (int64_t(b) * C + c) * H * W;
            T* yp = y + (int64_t(b) * C + c) * OH * OW;
            for (int oh = 0; oh < OH; ++oh) {
                for (int ow = 0; ow < OW; ++ow) {
                    const T* r0 = xp + int64_t(2 * oh) * W + 2 * ow;
                    const T* r1 = r0 + W;
                    yp[int64_t(oh) * OW + ow] = (r0[0] + r0[1] + r1[0] + r1[1]) * T(0.25);
                }
            }
        }
    }
}

template <typename T>
void avgpool2_backward(const T* dy, int B, int C, int H, int W, T* dx) {
    const int OH = H / 2, OW = W / 2;
#pragma omp parallel for schedule(static) collapse(2)
    for (int b = 0; b < B; ++b) {
        for (int c = 0; c < C; ++c) {
            const T* dyp = dy + (int64_t(b) * C + c) * OH * OW;
            T* dxp = dx + (int64_t(b) * C + c) * H * W;
            for (int oh = 0; oh < OH; ++oh) {
                for (int ow = 0; ow < OW; ++ow) {
                    const T g = dyp[int64_t(oh) * OW + ow] * T(0.25);
                    T* r0 = dxp + int64_t(2 * oh) * W + 2 * ow;
                    T* r1 = r0 + W;
                    r0[0] = g;
                    r0[1] = g;
                    r1[0] = g;
                    r1[1] = g;
                }
            }
        }
    }
}

template <typename T>
void global_avgpool_forward(const T* x, int B, int C, int H, int W, T* y) {
    const int64_t plane = int64_t(H) * W;
#pragma omp parallel for schedule(static) collapse(2)
    for (int b = 0; b < B; ++b) {
        for (int c = 0; c < C; ++c) {
            const T* xp = x + (int64_t(b) * C + c) * plane;
            T acc = T(0);
            for (int64_t i = 0; i < plane; ++i) acc += xp[i];
            y[int64_t(b) * C + c] = acc / T(plane);
        }
    }
}

template <typename T>
void global_avgpool_backward(const T* dy, int B, int C, int H, int W, T* dx) {
    const int64_t plane = int64_t(H) * W;
#pragma omp parallel for schedule(static) collapse(2)
    for (int b = 0; b < B; ++b) {
        for (int c = 0; c < C; ++c) {
            const T g = dy[int64_t(b) * C + c] / T(plane);
            T* dxp = dx + (int64_t(b) * C + c) * plane;
            for (int64_t i = 0; i < plane; ++i) dxp[i] = g;
        }
    }
}

template <typename T>
void upsample2_forward(const T* x, int B, int C, int H, int W, T* y) {
#pragma omp parallel for schedule(static) collapse(2)
    for (int b = 0; b < B; ++b) {
        for (int c = 0; c < C; ++c) {
            const T* xp = x + (int64_t(b) * C + c) * H * W;
            T* yp = y + (int64_t(b) * C + c) * 4 * H * W;
            for (int h = 0; h < H; ++h) {
                for (int w = 0; w < W; ++w) {
                    const T v = xp[int64_t(h) * W + w];
                    T* r0 = yp + int64_t(2 * h) * 2 * W + 2 * w;
                    T* r1 = r0 + 2 * W;
                    r0[0] = v;
                    r0[1] = v;
                    r1[0] = v;
                    r1[1] = v;
                }
            }
        }
    }
}

template <typename T>
void upsample2_backward(const T* dy, int B, int C, int H, int W, T* dx) {
#pragma omp parallel for schedule(static) collapse(2)
    for (int b = 0; b < B; ++b) {
        for (int c = 0; c < C; ++c) {
            const T* dyp = dy + (int64_t(b) * C + c) * 4 * H * W;
            T* dxp = dx + (int64_t(b) * C + c) * H * W;
            for (int h = 0; h < H; ++h) {
                for (int w = 0; w < W; ++w) {
                    const T* r0 = dyp + int64_t(2 * h) * 2 * W + 2 * w;
                    const T* r1 = r0 + 2 * W;
                    dxp[int64_t(h) * W + w] = r0[0] + r0[1] + r1[0] + r1[1];
                }
            }
        }
    }
}

// silu(x) = x * sigmoid(x); smooth everywhere, which keeps finite-difference
// gradient checks meaningful at the configured step size. sig caches sigmoid(x).
template <typename T>
void silu_forward(const T* x, int64_t n, T* y, T* sig) {
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < n; ++i) {
        const T s = T(1) / (T(1) + std::exp(-x[i]));
        sig[i] = s;
        y[i] = x[i] * s;
    }
}

template <typename T>
void silu_backward(const T* x, const T* sig, const T* dy, int64_t n, T* dx) {
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < n; ++i) {
        const T s = sig[i];
        dx[i] = dy[i] * s * (T(1) + x[i] * (T(1) - s));
    }
}

template <typename T>
void tanh_forward(const T* x, int64_t n, T* y) {
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < n; ++i) y[i] = std::tanh(x[i]);
}

template <typename T>
void tanh_backward(const T* y, const T* dy, int64_t n, T* dx) {
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < n; ++i) dx[i] = dy[i] * (T(1) - y[i] * y[i]);
}

// Per-channel biased mean/variance over (B, H, W). Two-pass, batch-major order.
template <typename T>
void channel_mean_var(const T* x, int B, int C, int H, int W, T* mean, T* var) {
    const int64_t plane = int64_t(H) * W;
    const T inv_n = T(1) / T(int64_t(B) * plane);
#pragma omp parallel for schedule(static)
    for (int c = 0; c < C; ++c) {
        T sum = T(0);
        for (int b = 0; b < B; ++b) {
            const T* xp = x + (int64_t(b) * C + c) * plane;
            for (int64_t i = 0; i < plane; ++i) sum += xp[i];
        }
        const T mu = sum * inv_n;
        T sq = T(0);
        for (int b = 0; b < B; ++b) {
            const T* xp = x + (int64_t(b) * C + c) * plane;
            for (int64_t i = 0; i < plane; ++i) {
                const T d = xp[i] - mu;
                sq += d * d;
            }
        }
        mean[c] = mu;
        var[c] = sq * inv_n;
    }
}

// Serial reference implementations, written as direct per-element loops.
// Tests assert bit-identical agreement with the parallel kernels above.
namespace ref {

template <typename T>
void conv2d_forward(const T* x, int B, int C, int H, int W, const T* w, const T* bias, int OC,
                    T* y) {
    for (int b = 0; b < B; ++b)
        for (int oc = 0; oc < OC; ++oc)
            for (int oh = 0; oh < H; ++oh)
                for (int ow = 0; ow < W; ++ow) {
                    T acc = bias ? bias[oc] : T(0);
                    for (int ic = 0; ic < C; ++ic)
                        for (int kh = 0; kh < 3; ++kh)
                            for (int kw = 0; kw < 3; ++kw) {
                                const int ih = oh + kh - 1;
                                const int iw = ow + kw - 1;
                                if (ih < 0 || ih >= H || iw < 0 || iw >= W) continue;
                                acc += w[((int64_t(oc) * C + ic) * 3 + kh) * 3 + kw] *
                                       x[((int64_t(b) * C + ic) * H + ih) * W + iw];
                            }
                    y[((int64_t(b) * OC + oc) * H + oh) * W + ow] = acc;
                }
}

template <typename T>
void conv2d_backward_input(const T* dy, int B, int C, int H, int W, const T* w, int OC, T* dx) {
    for (int b = 0; b < B; ++b)
        for (int ic = 0; ic < C; ++ic)
            for (int ih = 0; ih < H; ++ih)
                for (int iw = 0; iw < W; ++iw) {
                    T acc = T(0);
                    for (int oc = 0; oc < OC; ++oc)
                        for (int kh = 0; kh < 3; ++kh)
                            for (int kw = 0; kw < 3; ++kw) {
                                const int oh = ih + 1 - kh;
                                const int ow = iw + 1 - kw;
                                if (oh < 0 || oh >= H || ow < 0 || ow >= W) continue;
                                acc += w[((int64_t(oc) * C + ic) * 3 + kh) * 3 + kw] *
                                       dy[((int64_t(b) * OC + oc) * H + oh) * W + ow];
                            }
                    dx[((int64_t(b) * C + ic) * H + ih) * W + iw] = acc;
                }
}

template <typename T>
void conv2d_backward_params(const T* x, const T* dy, int B, int C, int H, int W, int OC, T* dw,
                            T* db) {
    for (int oc = 0; oc < OC; ++oc) {
        for (int ic = 0; ic < C; ++ic)
            for (int kh = 0; kh < 3; ++kh)
                for (int kw = 0; kw < 3; ++kw) {
                    T acc = T(0);
                    for (int b = 0; b < B; ++b)
                        for (int oh = 0; oh < H; ++oh)
                            for (int ow = 0; ow < W; ++ow) {
                                const int ih = oh + kh - 1;
                                const int iw = ow + kw - 1;
                                if (ih < 0 || ih >= H || iw < 0 || iw >= W) continue;
                                acc += dy[((int64_t(b) * OC + oc) * H + oh) * W + ow] *
                                       x[((int64_t(b) * C + ic) * H + ih) * W + iw];
                            }
                    dw[((int64_t(oc) * C + ic) * 3 + kh) * 3 + kw] += acc;
                }
        if (db) {
            T acc = T(0);
            for (int b = 0; b < B; ++b)
                for (int oh = 0; oh < H; ++oh)
                    for (int ow = 0; ow < W; ++ow)
                        acc += dy[((int64_t(b) * OC + oc) * H + oh) * W + ow];
            db[oc] += acc;
        }
    }
}

template <typename T>
void dense_forward(const T* x, int B, int IN, const T* w, const T* bias, int OUT, T* y) {
    for (int b = 0; b < B; ++b)
        for (int o = 0; o < OUT; ++o) {
            T acc = bias ? bias[o] : T(0);
            for (int i = 0; i < IN; ++i) acc += w[int64_t(o) * IN + i] * x[int64_t(b) * IN + i];
            y[int64_t(b) * OUT + o] = acc;
        }
}

template <typename T>
void dense_backward_input(const T* dy, int B, int IN, const T* w, int OUT, T* dx) {
    for (int b = 0; b < B; ++b)
        for (int i = 0; i < IN; ++i) {
            T acc = T(0);
            for (int o = 0; o < OUT; ++o) acc += dy[int64_t(b) * OUT + o] * w[int64_t(o) * IN + i];
            dx[int64_t(b) * IN + i] = acc;
        }
}

template <typename T>
void dense_backward_params(const T* x, const T* dy, int B, int IN, int OUT, T* dw, T* db) {
    for (int o = 0; o < OUT; ++o) {
        for (int i = 0; i < IN; ++i) {
            T acc = T(0);
            for (int b = 0; b < B; ++b) acc += dy[int64_t(b) * OUT + o] * x[int64_t(b) * IN + i];
            dw[int64_t(o) * IN + i] += acc;
        }
        if (db) {
            T acc = T(0);
            for (int b = 0; b < B; ++b) acc += dy[int64_t(b) * OUT + o];
            db[o] += acc;
        }
    }
}

template <typename T>
void channel_mean_var(const T* x, int B, int C, int H, int W, T* mean, T* var) {
    const int64_t plane = int64_t(H) * W;
    const T inv_n = T(1) / T(int64_t(B) * plane);
    for (int c = 0; c < C; ++c) {
        T sum = T(0);
        for (int b = 0; b < B; ++b)
            for (int64_t i = 0; i < plane; ++i) sum += x[(int64_t(b) * C + c) * plane + i];
        const T mu = sum * inv_n;
        T sq = T(0);
        for (int b = 0; b < B; ++b)
            for (int64_t i = 0; i < plane; ++i) {
                const T d = x[(int64_t(b) * C + c) * plane + i] - mu;
                sq += d * d;
            }
        mean[c] = mu;
        var[c] = sq * inv_n;
    }
}

}  // namespace ref

}  // namespace cae::kernels
