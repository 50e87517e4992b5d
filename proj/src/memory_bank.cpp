#include "cae/memory_bank.hpp"

namespace cae {

void MemoryBank::write(SyntheticBatch batch) {
    const size_t n = size_t(batch.size());
    if (n == 0) throw ConfigError("memory bank: refusing to store an empty batch");
    if (n > capacity_)
        throw ConfigError("memory bank: batch of " + std::to_string(n) +
                          " images exceeds capacity " + std::to_string(capacity_));
    if (batch.labels.size() != n || batch.provenance.size() != n)
        throw ConfigError("memory bank: labels/provenance do not match batch size");
    entries_.push_back(std::move(batch));
    total_images_ += n;
    while (total_images_ > capacity_) {
        total_images_ -= size_t(entries_.front().size());
        entries_.pop_front();
    }
}

SyntheticBatch MemoryBank::sample(int count, uint64_t seed) const {
    if (empty()) throw ConfigError("memory bank: cannot sample from an empty bank");
    if (count <= 0) throw ConfigError("memory bank: sample count must be > 0");
    const auto& first = entries_.front().images;
    const int C = first.dim(1), H = first.dim(2), W = first.dim(3);
    const int64_t image_elems = int64_t(C) * H * W;

    SyntheticBatch out;
    out.images = Tensor<float>({count, C, H, W});
    out.labels.resize(size_t(count));
    out.provenance.resize(size_t(count));
    out.step = entries_.back().step;

    Rng rng(mix_seed({seed, 0xBA7Cull}));
    for (int i = 0; i < count; ++i) {
        uint64_t flat = rng.below(total_images_);
        for (const auto& e : entries_) {
            const uint64_t n = uint64_t(e.size());
            if (flat < n) {
                const float* src = e.images.ptr() + int64_t(flat) * image_elems;
                std::copy(src, src + image_elems, out.images.ptr() + int64_t(i) * image_elems);
                out.labels[size_t(i)] = e.labels[size_t(flat)];
                out.provenance[size_t(i)] = e.provenance[size_t(flat)];
                break;
            }
            flat -= n;
        }
    }
    return out;
}

}  // namespace cae
