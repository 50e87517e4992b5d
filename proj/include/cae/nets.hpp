#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "cae/layers.hpp"
#include "cae/sha256.hpp"

namespace cae {

enum class Role { teacher, student, generator, aux };

inline const char* role_name(Role r) {
    switch (r) {
        case Role::teacher: return "teacher";
        case Role::student: return "student";
        case Role::generator: return "generator";
        default: return "aux";
    }
}

template <typename T>
struct BnStatEntry {
    std::string layer;
    std::vector<T> mean;
    std::vector<T> var;
};

template <typename T>
using BnStatRecord = std::vector<BnStatEntry<T>>;

// A sequential network plus the handle metadata the training loops rely on:
// role, frozen flag, and a stable architecture id that encodes the dims
// needed to rebuild it.
template <typename T>
class Network {
public:
    std::string architecture_id;
    Role role = Role::aux;
    bool frozen = false;
    std::vector<std::unique_ptr<Layer<T>>> layers;
    // Layers in [0, feature_cutoff) compute the penultimate feature vector;
    // the rest is the classifier. -1 when the net has no feature split.
    int feature_cutoff = -1;

    Tensor<T> forward(const Tensor<T>& x, Mode mode) {
        return forward_range(x, mode, 0, static_cast<int>(layers.size()));
    }

    Tensor<T> forward_features(const Tensor<T>& x, Mode mode) {
        return forward_range(x, mode, 0, feature_cutoff);
    }

    // Backward through the full stack; pair with forward().
    Tensor<T> backward(const Tensor<T>& dy) {
        return backward_range(dy, static_cast<int>(layers.size()), 0);
    }

    // Backward through the feature prefix; pair with forward_features().
    Tensor<T> backward_features(const Tensor<T>& dy) { return backward_range(dy, feature_cutoff, 0); }

    std::vector<ParamSegment<T>> params() {
        std::vector<ParamSegment<T>> out;
        for (auto& l : layers) l->collect_params(out);
        return out;
    }

    int64_t param_count() {
        int64_t n = 0;
        for (auto& seg : params()) n += seg.value->numel();
        return n;
    }

    void zero_grad() {
        for (auto& seg : params()) seg.grad->fill(T(0));
    }

    void set_accum_param_grads(bool on) {
        for (auto& l : layers) l->accum_param_grads = on;
    }

    std::vector<BatchNorm2d<T>*> bn_layers() {
        std::vector<BatchNorm2d<T>*> out;
        for (auto& l : layers) {
            if (auto* bn = dynamic_cast<BatchNorm2d<T>*>(l.get())) out.push_back(bn);
        }
        return out;
    }

    void set_bn_recording(bool on) {
        for (auto* bn : bn_layers()) bn->record_batch_stats = on;
    }

    void set_bn_update_running(bool on) {
        for (auto* bn : bn_layers()) bn->update_running = on;
    }

    // Hex SHA-256 over the little-endian bytes of all parameter segments in
    // declaration order. BN running stats and grads are excluded: the digest
    // identifies theta only.
    std::string param_digest() {
        Sha256 h;
        for (auto& seg : params()) {
            h.update(seg.value->ptr(), size_t(seg.value->numel()) * sizeof(T));
        }
        return to_hex(h.finish());
    }

    std::vector<T> flatten_params() {
        std::vector<T> flat;
        for (auto& seg : params()) {
            flat.insert(flat.end(), seg.value->data.begin(), seg.value->data.end());
        }
        return flat;
    }

    void load_flat_params(const std::vector<T>& flat) {
        size_t off = 0;
        for (auto& seg : params()) {
            std::copy(flat.begin() + off, flat.begin() + off + seg.value->data.size(),
                      seg.value->data.begin());
            off += seg.value->data.size();
        }
        if (off != flat.size()) throw NumericError("flat parameter size mismatch");
    }

    std::vector<T> flatten_grads() {
        std::vector<T> flat;
        for (auto& seg : params()) {
            flat.insert(flat.end(), seg.grad->data.begin(), seg.grad->data.end());
        }
        return flat;
    }

private:
    Tensor<T> forward_range(const Tensor<T>& x, Mode mode, int lo, int hi) {
        Tensor<T> cur = x;
        for (int i = lo; i < hi; ++i) cur = layers[size_t(i)]->forward(cur, mode);
        return cur;
    }

    Tensor<T> backward_range(const Tensor<T>& dy, int hi, int lo) {
        Tensor<T> cur = dy;
        for (int i = hi - 1; i >= lo; --i) cur = layers[size_t(i)]->backward(cur);
        return cur;
    }
};

// -------- architecture registry --------
//
// Architecture ids are strings like "teacher-cnn-v1:k10"; the suffix encodes
// the dimensions needed to rebuild the net when loading a checkpoint.

namespace detail {

inline int arch_field(const std::string& id, char key, int fallback = -1) {
    size_t pos = id.find(':');
    while (pos != std::string::npos) {
        size_t next = id.find(':', pos + 1);
        std::string tok = id.substr(pos + 1, next == std::string::npos ? next : next - pos - 1);
        if (!tok.empty() && tok[0] == key) {
            return std::stoi(tok.substr(1));
        }
        pos = next;
    }
    if (fallback < 0) throw ConfigError("architecture id missing field '" + std::string(1, key) + "': " + id);
    return fallback;
}

}  // namespace detail

template <typename T>
void init_params(Network<T>& net, uint64_t seed) {
    Rng rng(mix_seed({seed, fnv1a64(net.architecture_id)}));
    for (auto& l : net.layers) {
        if (auto* conv = dynamic_cast<Conv2d<T>*>(l.get())) {
            double std = std::sqrt(2.0 / (conv->in_ch_ * 9.0));
            for (auto& v : conv->weight.data) v = T(rng.gaussian(0.0, std));
            conv->bias.fill(T(0));
        } else if (auto* fc = dynamic_cast<Dense<T>*>(l.get())) {
            double std = std::sqrt(2.0 / fc->in_dim_);
            for (auto& v : fc->weight.data) v = T(rng.gaussian(0.0, std));
            fc->bias.fill(T(0));
        }
    }
}

// teacher: four conv/BN blocks, ~80k parameters.
template <typename T>
Network<T> make_teacher(int k) {
    Network<T> net;
    net.architecture_id = "teacher-cnn-v1:k" + std::to_string(k);
    net.role = Role::teacher;
    auto& L = net.layers;
    L.emplace_back(new Conv2d<T>("conv1", 3, 16));
    L.emplace_back(new BatchNorm2d<T>("bn1", 16));
    L.emplace_back(new Silu<T>("act1"));
    L.emplace_back(new AvgPool2<T>("pool1"));
    L.emplace_back(new Conv2d<T>("conv2", 16, 32));
    L.emplace_back(new BatchNorm2d<T>("bn2", 32));
    L.emplace_back(new Silu<T>("act2"));
    L.emplace_back(new AvgPool2<T>("pool2"));
    L.emplace_back(new Conv2d<T>("conv3", 32, 64));
    L.emplace_back(new BatchNorm2d<T>("bn3", 64));
    L.emplace_back(new Silu<T>("act3"));
    L.emplace_back(new AvgPool2<T>("pool3"));
    L.emplace_back(new Conv2d<T>("conv4", 64, 96));
    L.emplace_back(new BatchNorm2d<T>("bn4", 96));
    L.emplace_back(new Silu<T>("act4"));
    L.emplace_back(new AvgPool2<T>("pool4"));
    L.emplace_back(new GlobalAvgPool<T>("gap"));
    net.feature_cutoff = static_cast<int>(L.size());
    L.emplace_back(new Dense<T>("fc", 96, k));
    return net;
}

// student: two conv/BN blocks, ~25k parameters.
template <typename T>
Network<T> make_student(int k) {
    Network<T> net;
    net.architecture_id = "student-cnn-v1:k" + std::to_string(k);
    net.role = Role::student;
    auto& L = net.layers;
    L.emplace_back(new Conv2d<T>("conv1", 3, 36));
    L.emplace_back(new BatchNorm2d<T>("bn1", 36));
    L.emplace_back(new Silu<T>("act1"));
    L.emplace_back(new AvgPool2<T>("pool1"));
    L.emplace_back(new Conv2d<T>("conv2", 36, 72));
    L.emplace_back(new BatchNorm2d<T>("bn2", 72));
    L.emplace_back(new Silu<T>("act2"));
    L.emplace_back(new AvgPool2<T>("pool2"));
    L.emplace_back(new GlobalAvgPool<T>("gap"));
    net.feature_cutoff = static_cast<int>(L.size());
    L.emplace_back(new Dense<T>("fc", 72, k));
    return net;
}

// Width of the penultimate feature vector (projection-head input).
template <typename T>
int feature_width(Network<T>& net) {
    auto* fc = dynamic_cast<Dense<T>*>(net.layers.back().get());
    if (!fc) throw ConfigError("network has no classifier head");
    return fc->in_dim_;
}

// generator: embedding -> dense -> 8x8 map -> two upsample/conv blocks -> tanh.
template <typename T>
Network<T> make_generator(int embed_dim) {
    Network<T> net;
    net.architecture_id = "generator-v1:d" + std::to_string(embed_dim);
    net.role = Role::generator;
    auto& L = net.layers;
    L.emplace_back(new Dense<T>("fc", embed_dim, 48 * 8 * 8));
    L.emplace_back(new Reshape<T>("reshape", 48, 8, 8));
    L.emplace_back(new BatchNorm2d<T>("bn0", 48));
    L.emplace_back(new Silu<T>("act0"));
    L.emplace_back(new Upsample2<T>("up1"));
    L.emplace_back(new Conv2d<T>("conv1", 48, 24));
    L.emplace_back(new BatchNorm2d<T>("bn1", 24));
    L.emplace_back(new Silu<T>("act1"));
    L.emplace_back(new Upsample2<T>("up2"));
    L.emplace_back(new Conv2d<T>("conv2", 24, 12));
    L.emplace_back(new BatchNorm2d<T>("bn2", 12));
    L.emplace_back(new Silu<T>("act2"));
    L.emplace_back(new Conv2d<T>("conv3", 12, 3));
    L.emplace_back(new TanhLayer<T>("tanh"));
    return net;
}

// two-layer projection head for contrastive features.
template <typename T>
Network<T> make_projection_head(int in_dim, int feat_dim) {
    Network<T> net;
    net.architecture_id =
        "proj-head-v1:i" + std::to_string(in_dim) + ":f" + std::to_string(feat_dim);
    net.role = Role::aux;
    auto& L = net.layers;
    L.emplace_back(new Dense<T>("fc1", in_dim, 64));
    L.emplace_back(new Silu<T>("act1"));
    L.emplace_back(new Dense<T>("fc2", 64, feat_dim));
    return net;
}

// input-normalization probe used by BN statistic tests.
template <typename T>
Network<T> make_bn_probe(int k) {
    Network<T> net;
    net.architecture_id = "bn-probe-v1:k" + std::to_string(k);
    net.role = Role::aux;
    auto& L = net.layers;
    L.emplace_back(new BatchNorm2d<T>("bn1", 3));
    L.emplace_back(new GlobalAvgPool<T>("gap"));
    net.feature_cutoff = static_cast<int>(L.size());
    L.emplace_back(new Dense<T>("fc", 3, k));
    return net;
}

template <typename T>
Network<T> make_network(const std::string& architecture_id) {
    if (architecture_id.rfind("teacher-cnn-v1", 0) == 0)
        return make_teacher<T>(detail::arch_field(architecture_id, 'k'));
    if (architecture_id.rfind("student-cnn-v1", 0) == 0)
        return make_student<T>(detail::arch_field(architecture_id, 'k'));
    if (architecture_id.rfind("generator-v1", 0) == 0)
        return make_generator<T>(detail::arch_field(architecture_id, 'd'));
    if (architecture_id.rfind("proj-head-v1", 0) == 0)
        return make_projection_head<T>(detail::arch_field(architecture_id, 'i'),
                                       detail::arch_field(architecture_id, 'f'));
    if (architecture_id.rfind("bn-probe-v1", 0) == 0)
        return make_bn_probe<T>(detail::arch_field(architecture_id, 'k'));
    throw ConfigError("unknown architecture id: " + architecture_id);
}

// -------- role-checked operations --------

template <typename T>
Tensor<T> forward_logits(Network<T>& net, const Tensor<T>& images, Mode mode = Mode::eval) {
    if (net.role != Role::teacher && net.role != Role::student)
        throw ConfigError("forward_logits requires a teacher or student network");
    if (images.ndim() != 4 || images.dim(1) != 3)
        throw ConfigError("forward_logits expects an NCHW image batch with 3 channels");
    if (images.dim(0) == 0) {
        auto* fc = dynamic_cast<Dense<T>*>(net.layers.back().get());
        return Tensor<T>({0, fc ? fc->out_dim_ : 0});
    }
    Tensor<T> out = net.forward(images, mode);
    if (!out.all_finite()) throw NumericError("non-finite logits from " + net.architecture_id);
    return out;
}

// Penultimate activations through the projection head.
template <typename T>
Tensor<T> student_features(Network<T>& net, Network<T>& head, const Tensor<T>& images,
                           Mode mode = Mode::eval) {
    if (net.role != Role::student) throw ConfigError("student_features requires a student network");
    Tensor<T> feat = net.forward_features(images, mode);
    return head.forward(feat, mode);
}

// Generator forward with output-range contract.
template <typename T>
Tensor<T> generate(Network<T>& net, const Tensor<T>& embeddings, Mode mode = Mode::eval) {
    if (net.role != Role::generator) throw ConfigError("generate requires a generator network");
    auto* fc = dynamic_cast<Dense<T>*>(net.layers.front().get());
    if (fc && embeddings.dim(1) != fc->in_dim_)
        throw ConfigError("embedding width " + std::to_string(embeddings.dim(1)) +
                          " does not match generator input width " + std::to_string(fc->in_dim_));
    return net.forward(embeddings, mode);
}

template <typename T>
BnStatRecord<T> bn_running_stats(Network<T>& net) {
    auto bns = net.bn_layers();
    if (bns.empty() && net.role == Role::teacher)
        throw ConfigError("teacher network has no batch-normalization layers");
    BnStatRecord<T> rec;
    for (auto* bn : bns) {
        rec.push_back({bn->name, bn->running_mean.data, bn->running_var.data});
    }
    return rec;
}

template <typename T>
BnStatRecord<T> bn_batch_stats(Network<T>& net) {
    BnStatRecord<T> rec;
    for (auto* bn : net.bn_layers()) {
        if (!bn->has_batch_stats)
            throw NumericError("batch statistics not recorded for layer " + bn->name);
        rec.push_back({bn->name, bn->batch_mean.data, bn->batch_var.data});
    }
    return rec;
}

}  // namespace cae
