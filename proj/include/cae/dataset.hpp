#pragma once

#include <string>
#include <vector>

#include "cae/common.hpp"
#include "cae/tensor.hpp"

namespace cae {

struct ToyDataset {
    Tensor<float> train_images;  // N x 3 x 32 x 32, values in [-1, 1]
    std::vector<int> train_labels;
    Tensor<float> test_images;
    std::vector<int> test_labels;
    std::vector<std::string> class_names;
    std::string recipe_id;
    uint64_t seed = 0;
    int k = 0;
};

// Procedurally rendered shape/texture classes, class-balanced and
// deterministic under (recipe_id, seed). Train and test draw from disjoint
// per-class sample index ranges.
ToyDataset make_toy_dataset(const std::string& recipe_id, int k, int per_class, int test_per_class,
                            uint64_t seed);

// The recipe's canonical category names (first k of them).
std::vector<std::string> recipe_class_names(const std::string& recipe_id, int k);

}  // namespace cae
