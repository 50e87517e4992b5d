#pragma once

#include <memory>
#include <string>
#include <vector>

#include "cae/common.hpp"
#include "cae/tensor.hpp"

namespace cae {

struct CategorySpec {
    int index = 0;
    std::string name;
};

enum class PromptMode { class_name, class_index };

inline const char* prompt_mode_name(PromptMode m) {
    return m == PromptMode::class_name ? "name" : "index";
}

// "a photo of <name>" or "a photo of <index>".
std::string build_prompt(const CategorySpec& category, PromptMode mode);

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual std::vector<float> embed(const std::string& prompt) = 0;
    virtual int dim() const = 0;
    virtual std::string id() const = 0;
    int call_count() const { return calls_; }

protected:
    int calls_ = 0;
};

// Deterministic hash-to-vector provider: a stand-in for a real language
// model. Maps each prompt to a unit-norm vector seeded by (seed, prompt).
std::unique_ptr<EmbeddingProvider> provider_stub(uint64_t seed, int dim);

struct CategoryEmbeddingSpace {
    Tensor<float> embeddings;  // K x dim, fixed after construction
    int dim = 0;
    std::string provider_id;
    PromptMode prompt_mode = PromptMode::class_name;
    std::vector<CategorySpec> categories;
    int source_dim = 0;          // provider-native width before projection
    uint64_t projection_seed = 0;

    int k() const { return embeddings.dim(0); }
};

struct NoiseSourceSpec {
    enum class Family { gaussian, uniform, laplace, bernoulli_mask };
    int source_index = 1;  // 1-based, per configuration order
    Family family = Family::gaussian;
    double p0 = 0.0, p1 = 1.0;      // family parameters (see family_params_doc)
    std::vector<float> magnitude;   // size 1 (broadcast) or size dim

    bool same_distribution(const NoiseSourceSpec& other) const {
        return family == other.family && p0 == other.p0 && p1 == other.p1;
    }
};

const char* family_name(NoiseSourceSpec::Family f);
NoiseSourceSpec::Family family_from_name(const std::string& s);

// Analytic mean/stddev of one unscaled draw; used by the statistics checks.
void family_moments(const NoiseSourceSpec& spec, double* mean, double* stddev);

// The default four sources: gaussian(0,1), uniform(-1,1), laplace(0,1),
// bernoulli-mask(p=0.5, values +-1). For n > 4 the list is extended with
// narrower variants so that (family, params) pairs stay pairwise distinct.
std::vector<NoiseSourceSpec> default_noise_sources(int n, float magnitude);

void validate_noise_sources(const std::vector<NoiseSourceSpec>& sources, int dim);

struct DiffusedEmbeddingSet {
    Tensor<float> tensor;  // K x N x dim
    uint64_t draw_seed = 0;
    int k() const { return tensor.dim(0); }
    int n() const { return tensor.dim(1); }
    int d() const { return tensor.dim(2); }
    const float* row(int k_, int n_) const {
        return tensor.ptr() + (int64_t(k_) * tensor.dim(1) + n_) * tensor.dim(2);
    }
};

void validate_categories(const std::vector<CategorySpec>& categories, PromptMode mode);

// Queries the provider exactly once per category, then applies the seeded
// orthonormal projection to target_dim (identity when dims already match).
// The result is immutable; training never calls the provider again.
CategoryEmbeddingSpace init_embedding_space(const std::vector<CategorySpec>& categories,
                                            EmbeddingProvider& provider, PromptMode mode,
                                            int target_dim, uint64_t projection_seed);

// e[k][n] = E_off[k] + M_n * q_n with q_n freshly drawn from source n.
// Stream seeds derive from (seed, k, n); pass mix_seed({run_seed, step}) to
// redraw per training step.
DiffusedEmbeddingSet cend_diffuse(const CategoryEmbeddingSpace& space,
                                  const std::vector<NoiseSourceSpec>& sources, uint64_t seed);

// Embedding file format "CAEE": version u16, K u32, D u32, K x D float32
// row-major, then K length-prefixed UTF-8 category names.
void write_embedding_file(const std::string& path, const Tensor<float>& embeddings,
                          const std::vector<CategorySpec>& categories);

// Reads a CAEE file and aligns rows to the given category list. The returned
// space is provider-native width; apply project_space afterwards if needed.
CategoryEmbeddingSpace ingest_embedding_file(const std::string& path,
                                             const std::vector<CategorySpec>& categories);

// Seeded orthonormal projection to target_dim (norm-preserving when widening,
// row-orthonormal when narrowing). Identity when dims match.
CategoryEmbeddingSpace project_space(const CategoryEmbeddingSpace& space, int target_dim,
                                     uint64_t projection_seed);

// 0.1 * root-mean-square row norm; the default per-source magnitude.
float default_magnitude(const Tensor<float>& embeddings);

}  // namespace cae
