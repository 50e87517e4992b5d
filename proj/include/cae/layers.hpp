#pragma once

#include <memory>
#include <string>
#include <vector>

#include "cae/kernels.hpp"
#include "cae/tensor.hpp"

namespace cae {

enum class Mode { train, eval };

template <typename T>
struct ParamSegment {
    std::string name;
    Tensor<T>* value;
    Tensor<T>* grad;
};

template <typename T>
class Layer {
public:
    virtual ~Layer() = default;
    virtual Tensor<T> forward(const Tensor<T>& x, Mode mode) = 0;
    // Accumulates parameter gradients (unless disabled) and returns dL/dx.
    virtual Tensor<T> backward(const Tensor<T>& dy) = 0;
    virtual void collect_params(std::vector<ParamSegment<T>>& out) { (void)out; }
    virtual const char* kind() const = 0;

    std::string name;
    bool accum_param_grads = true;
};

template <typename T>
class Conv2d : public Layer<T> {
public:
    Conv2d(std::string name_, int in_ch, int out_ch)
        : in_ch_(in_ch),
          out_ch_(out_ch),
          weight({out_ch, in_ch, 3, 3}),
          bias({out_ch}),
          dweight({out_ch, in_ch, 3, 3}),
          dbias({out_ch}) {
        this->name = std::move(name_);
    }

    Tensor<T> forward(const Tensor<T>& x, Mode) override {
        x_ = x;
        Tensor<T> y({x.dim(0), out_ch_, x.dim(2), x.dim(3)});
        kernels::conv2d_forward(x.ptr(), x.dim(0), in_ch_, x.dim(2), x.dim(3), weight.ptr(),
                                bias.ptr(), out_ch_, y.ptr());
        return y;
    }

    Tensor<T> backward(const Tensor<T>& dy) override {
        if (this->accum_param_grads) {
            kernels::conv2d_backward_params(x_.ptr(), dy.ptr(), x_.dim(0), in_ch_, x_.dim(2),
                                            x_.dim(3), out_ch_, dweight.ptr(), dbias.ptr());
        }
        Tensor<T> dx(x_.shape);
        kernels::conv2d_backward_input(dy.ptr(), x_.dim(0), in_ch_, x_.dim(2), x_.dim(3),
                                       weight.ptr(), out_ch_, dx.ptr());
        return dx;
    }

    void collect_params(std::vector<ParamSegment<T>>& out) override {
        out.push_back({this->name + ".weight", &weight, &dweight});
        out.push_back({this->name + ".bias", &bias, &dbias});
    }

    const char* kind() const override { return "conv2d"; }

    int in_ch_, out_ch_;
    Tensor<T> weight, bias, dweight, dbias;

private:
    Tensor<T> x_;
};

template <typename T>
class Dense : public Layer<T> {
public:
    Dense(std::string name_, int in_dim, int out_dim)
        : in_dim_(in_dim),
          out_dim_(out_dim),
          weight({out_dim, in_dim}),
          bias({out_dim}),
          dweight({out_dim, in_dim}),
          dbias({out_dim}) {
        this->name = std::move(name_);
    }

    Tensor<T> forward(const Tensor<T>& x, Mode) override {
        x_ = x;
        Tensor<T> y({x.dim(0), out_dim_});
        kernels::dense_forward(x.ptr(), x.dim(0), in_dim_, weight.ptr(), bias.ptr(), out_dim_,
                               y.ptr());
        return y;
    }

    Tensor<T> backward(const Tensor<T>& dy) override {
        if (this->accum_param_grads) {
            kernels::dense_backward_params(x_.ptr(), dy.ptr(), x_.dim(0), in_dim_, out_dim_,
                                           dweight.ptr(), dbias.ptr());
        }
        Tensor<T> dx(x_.shape);
        kernels::dense_backward_input(dy.ptr(), x_.dim(0), in_dim_, weight.ptr(), out_dim_,
                                      dx.ptr());
        return dx;
    }

    void collect_params(std::vector<ParamSegment<T>>& out) override {
        out.push_back({this->name + ".weight", &weight, &dweight});
        out.push_back({this->name + ".bias", &bias, &dbias});
    }

    const char* kind() const override { return "dense"; }

    int in_dim_, out_dim_;
    Tensor<T> weight, bias, dweight, dbias;

private:
    Tensor<T> x_;
};

// Batch normalization over NCHW channels.
//
// train mode: normalizes by biased batch statistics and (optionally) updates
// running stats. eval mode: normalizes by running stats; when
// record_batch_stats is set it additionally computes the input's batch
// statistics without letting them affect the output. A loss defined on those
// recorded statistics injects its gradient through ext_dmean/ext_dvar, which
// backward() routes into dx alongside the normalization path.
template <typename T>
class BatchNorm2d : public Layer<T> {
public:
    BatchNorm2d(std::string name_, int channels, T momentum = T(0.1), T eps = T(1e-5))
        : channels_(channels),
          momentum_(momentum),
          eps_(eps),
          gamma({channels}),
          beta({channels}),
          dgamma({channels}),
          dbeta({channels}),
          running_mean({channels}),
          running_var({channels}),
          batch_mean({channels}),
          batch_var({channels}) {
        this->name = std::move(name_);
        gamma.fill(T(1));
        running_var.fill(T(1));
    }

    Tensor<T> forward(const Tensor<T>& x, Mode mode) override {
        x_ = x;
        mode_ = mode;
        const int B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
        const int64_t plane = int64_t(H) * W;
        Tensor<T> y(x.shape);
        if (mode == Mode::train) {
            kernels::channel_mean_var(x.ptr(), B, C, H, W, batch_mean.ptr(), batch_var.ptr());
            has_batch_stats = true;
            if (update_running) {
                for (int c = 0; c < C; ++c) {
                    running_mean[c] = (T(1) - momentum_) * running_mean[c] + momentum_ * batch_mean[c];
                    running_var[c] = (T(1) - momentum_) * running_var[c] + momentum_ * batch_var[c];
                }
            }
            invstd_.assign(size_t(C), T(0));
            for (int c = 0; c < C; ++c) invstd_[size_t(c)] = T(1) / std::sqrt(batch_var[c] + eps_);
            xhat_ = Tensor<T>(x.shape);
#pragma omp parallel for schedule(static) collapse(2)
            for (int b = 0; b < B; ++b) {
                for (int c = 0; c < C; ++c) {
                    const T* xp = x.ptr() + (int64_t(b) * C + c) * plane;
                    T* xh = xhat_.ptr() + (int64_t(b) * C + c) * plane;
                    T* yp = y.ptr() + (int64_t(b) * C + c) * plane;
                    const T mu = batch_mean[c], is = invstd_[size_t(c)];
                    const T g = gamma[c], bt = beta[c];
                    for (int64_t i = 0; i < plane; ++i) {
                        xh[i] = (xp[i] - mu) * is;
                        yp[i] = g * xh[i] + bt;
                    }
                }
            }
        } else {
            if (record_batch_stats) {
                kernels::channel_mean_var(x.ptr(), B, C, H, W, batch_mean.ptr(), batch_var.ptr());
                has_batch_stats = true;
            }
#pragma omp parallel for schedule(static) collapse(2)
            for (int b = 0; b < B; ++b) {
                for (int c = 0; c < C; ++c) {
                    const T* xp = x.ptr() + (int64_t(b) * C + c) * plane;
                    T* yp = y.ptr() + (int64_t(b) * C + c) * plane;
                    const T scale = gamma[c] / std::sqrt(running_var[c] + eps_);
                    const T shift = beta[c] - running_mean[c] * scale;
                    for (int64_t i = 0; i < plane; ++i) yp[i] = scale * xp[i] + shift;
                }
            }
        }
        return y;
    }

    Tensor<T> backward(const Tensor<T>& dy) override {
        const int B = x_.dim(0), C = x_.dim(1), H = x_.dim(2), W = x_.dim(3);
        const int64_t plane = int64_t(H) * W;
        const T n = T(int64_t(B) * plane);
        Tensor<T> dx(x_.shape);
        if (mode_ == Mode::train) {
#pragma omp parallel for schedule(static)
            for (int c = 0; c < C; ++c) {
                T sum_dy = T(0), sum_dy_xhat = T(0);
                for (int b = 0; b < B; ++b) {
                    const T* dyp = dy.ptr() + (int64_t(b) * C + c) * plane;
                    const T* xh = xhat_.ptr() + (int64_t(b) * C + c) * plane;
                    for (int64_t i = 0; i < plane; ++i) {
                        sum_dy += dyp[i];
                        sum_dy_xhat += dyp[i] * xh[i];
                    }
                }
                if (this->accum_param_grads) {
                    dgamma[c] += sum_dy_xhat;
                    dbeta[c] += sum_dy;
                }
                const T g = gamma[c], is = invstd_[size_t(c)];
                for (int b = 0; b < B; ++b) {
                    const T* dyp = dy.ptr() + (int64_t(b) * C + c) * plane;
                    const T* xh = xhat_.ptr() + (int64_t(b) * C + c) * plane;
                    T* dxp = dx.ptr() + (int64_t(b) * C + c) * plane;
                    for (int64_t i = 0; i < plane; ++i) {
                        dxp[i] = g * is / n * (n * dyp[i] - sum_dy - xh[i] * sum_dy_xhat);
                    }
                }
            }
        } else {
#pragma omp parallel for schedule(static)
            for (int c = 0; c < C; ++c) {
                const T scale = gamma[c] / std::sqrt(running_var[c] + eps_);
                T sum_dy = T(0), sum_dy_x = T(0);
                for (int b = 0; b < B; ++b) {
                    const T* dyp = dy.ptr() + (int64_t(b) * C + c) * plane;
                    const T* xp = x_.ptr() + (int64_t(b) * C + c) * plane;
                    for (int64_t i = 0; i < plane; ++i) {
                        sum_dy += dyp[i];
                        sum_dy_x += dyp[i] * xp[i];
                    }
                }
                if (this->accum_param_grads) {
                    const T rm = running_mean[c];
                    const T is = T(1) / std::sqrt(running_var[c] + eps_);
                    dgamma[c] += (sum_dy_x - rm * sum_dy) * is;
                    dbeta[c] += sum_dy;
                }
                const T dmu = has_ext_stat_grads ? ext_dmean[c] : T(0);
                const T dvar = has_ext_stat_grads ? ext_dvar[c] : T(0);
                const T bmu = has_batch_stats ? batch_mean[c] : T(0);
                for (int b = 0; b < B; ++b) {
                    const T* dyp = dy.ptr() + (int64_t(b) * C + c) * plane;
                    const T* xp = x_.ptr() + (int64_t(b) * C + c) * plane;
                    T* dxp = dx.ptr() + (int64_t(b) * C + c) * plane;
                    for (int64_t i = 0; i < plane; ++i) {
                        T v = scale * dyp[i];
                        if (has_ext_stat_grads) {
                            v += dmu / n + dvar * T(2) * (xp[i] - bmu) / n;
                        }
                        dxp[i] = v;
                    }
                }
            }
            has_ext_stat_grads = false;
        }
        return dx;
    }

    void collect_params(std::vector<ParamSegment<T>>& out) override {
        out.push_back({this->name + ".gamma", &gamma, &dgamma});
        out.push_back({this->name + ".beta", &beta, &dbeta});
    }

    const char* kind() const override { return "batchnorm2d"; }

    void set_ext_stat_grads(const std::vector<T>& dmean, const std::vector<T>& dvar) {
        ext_dmean = dmean;
        ext_dvar = dvar;
        has_ext_stat_grads = true;
    }

    int channels_;
    T momentum_, eps_;
    Tensor<T> gamma, beta, dgamma, dbeta;
    Tensor<T> running_mean, running_var;
    Tensor<T> batch_mean, batch_var;  // most recent batch statistics
    bool has_batch_stats = false;
    bool record_batch_stats = false;
    bool update_running = true;
    std::vector<T> ext_dmean, ext_dvar;
    bool has_ext_stat_grads = false;

private:
    Tensor<T> x_, xhat_;
    std::vector<T> invstd_;
    Mode mode_ = Mode::train;
};

template <typename T>
class Silu : public Layer<T> {
public:
    explicit Silu(std::string name_) { this->name = std::move(name_); }
    Tensor<T> forward(const Tensor<T>& x, Mode) override {
        x_ = x;
        sig_ = Tensor<T>(x.shape);
        Tensor<T> y(x.shape);
        kernels::silu_forward(x.ptr(), x.numel(), y.ptr(), sig_.ptr());
        return y;
    }
    Tensor<T> backward(const Tensor<T>& dy) override {
        Tensor<T> dx(x_.shape);
        kernels::silu_backward(x_.ptr(), sig_.ptr(), dy.ptr(), x_.numel(), dx.ptr());
        return dx;
    }
    const char* kind() const override { return "silu"; }

private:
    Tensor<T> x_, sig_;
};

template <typename T>
class TanhLayer : public Layer<T> {
public:
    explicit TanhLayer(std::string name_) { this->name = std::move(name_); }
    Tensor<T> forward(const Tensor<T>& x, Mode) override {
        y_ = Tensor<T>(x.shape);
        kernels::tanh_forward(x.ptr(), x.numel(), y_.ptr());
        return y_;
    }
    Tensor<T> backward(const Tensor<T>& dy) override {
        Tensor<T> dx(y_.shape);
        kernels::tanh_backward(y_.ptr(), dy.ptr(), y_.numel(), dx.ptr());
        return dx;
    }
    const char* kind() const override { return "tanh"; }

private:
    Tensor<T> y_;
};

template <typename T>
class AvgPool2 : public Layer<T> {
public:
    explicit AvgPool2(std::string name_) { this->name = std::move(name_); }
    Tensor<T> forward(const Tensor<T>& x, Mode) override {
        in_shape_ = x.shape;
        Tensor<T> y({x.dim(0), x.dim(1), x.dim(2) / 2, x.dim(3) / 2});
        kernels::avgpool2_forward(x.ptr(), x.dim(0), x.dim(1), x.dim(2), x.dim(3), y.ptr());
        return y;
    }
    Tensor<T> backward(const Tensor<T>& dy) override {
        Tensor<T> dx(in_shape_);
        kernels::avgpool2_backward(dy.ptr(), dx.dim(0), dx.dim(1), dx.dim(2), dx.dim(3), dx.ptr());
        return dx;
    }
    const char* kind() const override { return "avgpool2"; }

private:
    std::vector<int> in_shape_;
};

template <typename T>
class GlobalAvgPool : public Layer<T> {
public:
    explicit GlobalAvgPool(std::string name_) { this->name = std::move(name_); }
    Tensor<T> forward(const Tensor<T>& x, Mode) override {
        in_shape_ = x.shape;
        Tensor<T> y({x.dim(0), x.dim(1)});
        kernels::global_avgpool_forward(x.ptr(), x.dim(0), x.dim(1), x.dim(2), x.dim(3), y.ptr());
        return y;
    }
    Tensor<T> backward(const Tensor<T>& dy) override {
        Tensor<T> dx(in_shape_);
        kernels::global_avgpool_backward(dy.ptr(), dx.dim(0), dx.dim(1), dx.dim(2), dx.dim(3),
                                         dx.ptr());
        return dx;
    }
    const char* kind() const override { return "gap"; }

private:
    std::vector<int> in_shape_;
};

// {B, C*H*W} -> {B, C, H, W}
template <typename T>
class Reshape : public Layer<T> {
public:
    Reshape(std::string name_, int c, int h, int w) : c_(c), h_(h), w_(w) {
        this->name = std::move(name_);
    }
    Tensor<T> forward(const Tensor<T>& x, Mode) override {
        Tensor<T> y = x;
        y.shape = {x.dim(0), c_, h_, w_};
        return y;
    }
    Tensor<T> backward(const Tensor<T>& dy) override {
        Tensor<T> dx = dy;
        dx.shape = {dy.dim(0), c_ * h_ * w_};
        return dx;
    }
    const char* kind() const override { return "reshape"; }

private:
    int c_, h_, w_;
};

// Nearest-neighbor 2x upsample.
template <typename T>
class Upsample2 : public Layer<T> {
public:
    explicit Upsample2(std::string name_) { this->name = std::move(name_); }
    Tensor<T> forward(const Tensor<T>& x, Mode) override {
        in_shape_ = x.shape;
        Tensor<T> y({x.dim(0), x.dim(1), x.dim(2) * 2, x.dim(3) * 2});
        kernels::upsample2_forward(x.ptr(), x.dim(0), x.dim(1), x.dim(2), x.dim(3), y.ptr());
        return y;
    }
    Tensor<T> backward(const Tensor<T>& dy) override {
        Tensor<T> dx(in_shape_);
        kernels::upsample2_backward(dy.ptr(), dx.dim(0), dx.dim(1), dx.dim(2), dx.dim(3), dx.ptr());
        return dx;
    }
    const char* kind() const override { return "upsample2"; }

private:
    std::vector<int> in_shape_;
};

}  // namespace cae
