#pragma once

#include <deque>
#include <vector>

#include "cae/common.hpp"
#include "cae/tensor.hpp"

namespace cae {

// Provenance per image: -1 for an anchor-embedding image, n >= 0 for the
// diffusion source index it came from.
constexpr int kProvenanceAnchor = -1;

struct SyntheticBatch {
    Tensor<float> images;  // B x C x H x W
    std::vector<int> labels;
    std::vector<int> provenance;
    int64_t step = 0;

    int size() const { return images.ndim() > 0 ? images.dim(0) : 0; }
};

// Bounded FIFO of synthetic batches. Capacity counts images; eviction removes
// whole oldest batches. Reads never mutate.
class MemoryBank {
public:
    explicit MemoryBank(size_t capacity_images) : capacity_(capacity_images) {
        if (capacity_ == 0) throw ConfigError("memory bank capacity must be > 0");
    }

    void write(SyntheticBatch batch);

    // Uniform with replacement over all stored images, seeded.
    SyntheticBatch sample(int count, uint64_t seed) const;

    size_t size_images() const { return total_images_; }
    size_t capacity() const { return capacity_; }
    bool empty() const { return total_images_ == 0; }
    size_t batch_count() const { return entries_.size(); }
    const std::deque<SyntheticBatch>& entries() const { return entries_; }

private:
    size_t capacity_;
    size_t total_images_ = 0;
    std::deque<SyntheticBatch> entries_;
};

}  // namespace cae
