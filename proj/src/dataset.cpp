#include "cae/dataset.hpp"

#include <array>
#include <cmath>

namespace cae {

namespace {

constexpr int kSize = 32;

const std::array<const char*, 10> kShapeNames = {"circle",   "ring",     "square",  "triangle",
                                                 "cross",    "hstripes", "vstripes", "dstripes",
                                                 "checker",  "dots"};

// Shape mask in [0,1] for pixel (x, y), parameterized by the per-sample rng
// draws captured in `p`.
struct SampleParams {
    double cx, cy;      // center
    double size;        // primary radius / half-extent
    double thickness;   // ring/cross arm width
    double period;      // stripe/checker/dot spacing
    double phase;
    float fg[3], bg[3];
};

double shape_mask(int cls, const SampleParams& p, int x, int y) {
    const double dx = x - p.cx, dy = y - p.cy;
    const double r = std::sqrt(dx * dx + dy * dy);
    switch (cls) {
        case 0:  // circle
            return r <= p.size ? 1.0 : 0.0;
        case 1:  // ring
            return (r <= p.size && r >= p.size - p.thickness) ? 1.0 : 0.0;
        case 2:  // square
            return (std::abs(dx) <= p.size && std::abs(dy) <= p.size) ? 1.0 : 0.0;
        case 3: {  // upward triangle
            if (dy < -p.size || dy > p.size) return 0.0;
            const double half_width = (dy + p.size) / (2.0 * p.size) * p.size;
            return std::abs(dx) <= half_width ? 1.0 : 0.0;
        }
        case 4:  // cross
            return ((std::abs(dx) <= p.thickness && std::abs(dy) <= p.size) ||
                    (std::abs(dy) <= p.thickness && std::abs(dx) <= p.size))
                       ? 1.0
                       : 0.0;
        case 5:  // horizontal stripes
            return std::fmod(y + p.phase, p.period) < p.period * 0.5 ? 1.0 : 0.0;
        case 6:  // vertical stripes
            return std::fmod(x + p.phase, p.period) < p.period * 0.5 ? 1.0 : 0.0;
        case 7:  // diagonal stripes
            return std::fmod(x + y + p.phase, p.period) < p.period * 0.5 ? 1.0 : 0.0;
        case 8: {  // checkerboard
            const int ix = int((x + p.phase) / p.period);
            const int iy = int((y + p.phase) / p.period);
            return (ix + iy) % 2 == 0 ? 1.0 : 0.0;
        }
        default: {  // dot grid
            const double mx = std::fmod(x + p.phase, p.period) - p.period * 0.5;
            const double my = std::fmod(y + p.phase, p.period) - p.period * 0.5;
            return std::sqrt(mx * mx + my * my) <= p.thickness ? 1.0 : 0.0;
        }
    }
}

// Classes k and k+5 share a palette, so mean color narrows a sample to a
// pair of classes and the shape decides between them.
void palette_of(int cls, float fg[3], float bg[3]) {
    Rng rng(mix_seed({uint64_t(cls % 5), 0xC0104ull}));
    for (int c = 0; c < 3; ++c) {
        bg[c] = float(rng.uniform(-0.85, -0.35));
        fg[c] = float(rng.uniform(0.35, 0.85));
    }
}

void render_sample(int cls, uint64_t sample_seed, float* out) {
    Rng rng(sample_seed);
    SampleParams p{};
    p.cx = 15.5 + rng.uniform(-4.0, 4.0);
    p.cy = 15.5 + rng.uniform(-4.0, 4.0);
    p.size = rng.uniform(6.0, 11.0);
    p.thickness = rng.uniform(1.5, 3.0);
    p.period = rng.uniform(5.0, 9.0);
    p.phase = rng.uniform(0.0, p.period);
    float fg_base[3], bg_base[3];
    palette_of(cls, fg_base, bg_base);
    for (int c = 0; c < 3; ++c) {
        p.bg[c] = bg_base[c] + float(rng.uniform(-0.15, 0.15));
        p.fg[c] = fg_base[c] + float(rng.uniform(-0.15, 0.15));
    }
    const double noise_std = 0.06;
    for (int y = 0; y < kSize; ++y) {
        for (int x = 0; x < kSize; ++x) {
            const double m = shape_mask(cls, p, x, y);
            for (int c = 0; c < 3; ++c) {
                double v = p.bg[c] + m * (p.fg[c] - p.bg[c]) + rng.gaussian(0.0, noise_std);
                out[(int64_t(c) * kSize + y) * kSize + x] =
                    float(std::min(1.0, std::max(-1.0, v)));
            }
        }
    }
}

void render_split(int k, int per_class, uint64_t seed, uint64_t split_tag, int index_offset,
                  Tensor<float>& images, std::vector<int>& labels) {
    images = Tensor<float>({k * per_class, 3, kSize, kSize});
    labels.resize(size_t(k) * per_class);
    const int64_t elems = 3LL * kSize * kSize;
    for (int cls = 0; cls < k; ++cls) {
        for (int i = 0; i < per_class; ++i) {
            const int row = cls * per_class + i;
            labels[size_t(row)] = cls;
            const uint64_t s =
                mix_seed({seed, split_tag, uint64_t(cls), uint64_t(index_offset + i)});
            render_sample(cls, s, images.ptr() + int64_t(row) * elems);
        }
    }
}

}  // namespace

std::vector<std::string> recipe_class_names(const std::string& recipe_id, int k) {
    if (recipe_id != "shapes-v1") throw ConfigError("unknown dataset recipe: " + recipe_id);
    if (k < 2 || k > int(kShapeNames.size()))
        throw ConfigError("recipe shapes-v1 supports 2..10 categories, got " + std::to_string(k));
    std::vector<std::string> names;
    for (int i = 0; i < k; ++i) names.emplace_back(kShapeNames[size_t(i)]);
    return names;
}

ToyDataset make_toy_dataset(const std::string& recipe_id, int k, int per_class, int test_per_class,
                            uint64_t seed) {
    if (per_class < 10) throw ConfigError("data.per_class must be >= 10");
    if (test_per_class < 1) throw ConfigError("data.test_per_class must be >= 1");
    ToyDataset ds;
    ds.class_names = recipe_class_names(recipe_id, k);
    ds.recipe_id = recipe_id;
    ds.seed = seed;
    ds.k = k;
    // Disjoint per-class sample indices keep the splits non-overlapping.
    render_split(k, per_class, seed, /*split_tag=*/1, /*index_offset=*/0, ds.train_images,
                 ds.train_labels);
    render_split(k, test_per_class, seed, /*split_tag=*/2, /*index_offset=*/per_class,
                 ds.test_images, ds.test_labels);
    return ds;
}

}  // namespace cae
