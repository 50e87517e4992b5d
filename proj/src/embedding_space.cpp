#include "cae/embedding_space.hpp"

#include <cstring>
#include <fstream>
#include <set>

namespace cae {

std::string build_prompt(const CategorySpec& category, PromptMode mode) {
    if (mode == PromptMode::class_name) {
        if (category.name.empty())
            throw ConfigError("category " + std::to_string(category.index) +
                              " has an empty name but prompt mode is class-name");
        return "a photo of " + category.name;
    }
    return "a photo of " + std::to_string(category.index);
}

namespace {

class StubProvider : public EmbeddingProvider {
public:
    StubProvider(uint64_t seed, int dim) : seed_(seed), dim_(dim) {
        if (dim < 2) throw ConfigError("stub provider dimension must be >= 2");
    }

    std::vector<float> embed(const std::string& prompt) override {
        ++calls_;
        Rng rng(mix_seed({seed_, fnv1a64(prompt)}));
        std::vector<float> v(static_cast<size_t>(dim_));
        double norm_sq = 0.0;
        for (auto& x : v) {
            x = float(rng.gaussian(0.0, 1.0));
            norm_sq += double(x) * double(x);
        }
        const float inv = float(1.0 / std::sqrt(norm_sq));
        for (auto& x : v) x *= inv;
        return v;
    }

    int dim() const override { return dim_; }
    std::string id() const override {
        return "stub-v1:s" + std::to_string(seed_) + ":d" + std::to_string(dim_);
    }

private:
    uint64_t seed_;
    int dim_;
};

}  // namespace

std::unique_ptr<EmbeddingProvider> provider_stub(uint64_t seed, int dim) {
    return std::make_unique<StubProvider>(seed, dim);
}

const char* family_name(NoiseSourceSpec::Family f) {
    switch (f) {
        case NoiseSourceSpec::Family::gaussian: return "gaussian";
        case NoiseSourceSpec::Family::uniform: return "uniform";
        case NoiseSourceSpec::Family::laplace: return "laplace";
        default: return "bernoulli-mask";
    }
}

NoiseSourceSpec::Family family_from_name(const std::string& s) {
    if (s == "gaussian") return NoiseSourceSpec::Family::gaussian;
    if (s == "uniform") return NoiseSourceSpec::Family::uniform;
    if (s == "laplace") return NoiseSourceSpec::Family::laplace;
    if (s == "bernoulli-mask") return NoiseSourceSpec::Family::bernoulli_mask;
    throw ConfigError("unknown noise family: " + s);
}

void family_moments(const NoiseSourceSpec& spec, double* mean, double* stddev) {
    using F = NoiseSourceSpec::Family;
    switch (spec.family) {
        case F::gaussian:
            *mean = spec.p0;
            *stddev = spec.p1;
            break;
        case F::uniform:
            *mean = 0.5 * (spec.p0 + spec.p1);
            *stddev = (spec.p1 - spec.p0) / std::sqrt(12.0);
            break;
        case F::laplace:
            *mean = spec.p0;
            *stddev = spec.p1 * std::sqrt(2.0);
            break;
        case F::bernoulli_mask: {
            const double m = 2.0 * spec.p0 - 1.0;
            *mean = m;
            *stddev = std::sqrt(std::max(0.0, 1.0 - m * m));
            break;
        }
    }
}

std::vector<NoiseSourceSpec> default_noise_sources(int n, float magnitude) {
    if (n < 1) throw ConfigError("cend.sources: need at least one noise source");
    using F = NoiseSourceSpec::Family;
    // Base palette plus progressively narrower variants; (family, params)
    // stay pairwise distinct for any n.
    std::vector<NoiseSourceSpec> palette;
    double scale = 1.0;
    while (int(palette.size()) < n) {
        palette.push_back({0, F::gaussian, 0.0, 1.0 * scale, {}});
        palette.push_back({0, F::uniform, -1.0 * scale, 1.0 * scale, {}});
        palette.push_back({0, F::laplace, 0.0, 1.0 * scale, {}});
        palette.push_back({0, F::bernoulli_mask, scale == 1.0 ? 0.5 : 0.5 * scale, 0.0, {}});
        scale *= 0.5;
    }
    palette.resize(size_t(n));
    for (int i = 0; i < n; ++i) {
        palette[size_t(i)].source_index = i + 1;
        palette[size_t(i)].magnitude = {magnitude};
    }
    return palette;
}

void validate_noise_sources(const std::vector<NoiseSourceSpec>& sources, int dim) {
    if (sources.empty()) throw ConfigError("cend.sources: need at least one noise source");
    for (size_t i = 0; i < sources.size(); ++i) {
        const auto& s = sources[i];
        if (s.magnitude.size() != 1 && s.magnitude.size() != size_t(dim))
            throw ConfigError("noise source " + std::to_string(i + 1) +
                              ": magnitude must be scalar or match the embedding dimension");
        for (float m : s.magnitude) {
            if (!std::isfinite(m) || m < 0.0f)
                throw ConfigError("noise source " + std::to_string(i + 1) +
                                  ": magnitudes must be finite and >= 0");
        }
        if (s.family == NoiseSourceSpec::Family::bernoulli_mask && (s.p0 <= 0.0 || s.p0 >= 1.0))
            throw ConfigError("noise source " + std::to_string(i + 1) +
                              ": bernoulli-mask p must be in (0,1)");
        if (s.family == NoiseSourceSpec::Family::uniform && !(s.p1 > s.p0))
            throw ConfigError("noise source " + std::to_string(i + 1) +
                              ": uniform bounds must satisfy high > low");
        if ((s.family == NoiseSourceSpec::Family::gaussian ||
             s.family == NoiseSourceSpec::Family::laplace) &&
            !(s.p1 > 0.0))
            throw ConfigError("noise source " + std::to_string(i + 1) +
                              ": scale parameter must be > 0");
        for (size_t j = 0; j < i; ++j) {
            if (s.same_distribution(sources[j]))
                throw ConfigError("noise sources " + std::to_string(j + 1) + " and " +
                                  std::to_string(i + 1) +
                                  " share the same (family, params) distribution");
        }
    }
}

void validate_categories(const std::vector<CategorySpec>& categories, PromptMode mode) {
    const int k = int(categories.size());
    if (k < 2) throw ConfigError("contrastive training requires >= 2 categories");
    std::vector<bool> seen(size_t(k), false);
    for (const auto& c : categories) {
        if (c.index < 0 || c.index >= k || seen[size_t(c.index)])
            throw ConfigError("category indices must form a contiguous 0..K-1 range");
        seen[size_t(c.index)] = true;
        if (mode == PromptMode::class_name && c.name.empty())
            throw ConfigError("category " + std::to_string(c.index) +
                              " has an empty name but prompt mode is class-name");
    }
}

CategoryEmbeddingSpace init_embedding_space(const std::vector<CategorySpec>& categories,
                                            EmbeddingProvider& provider, PromptMode mode,
                                            int target_dim, uint64_t projection_seed) {
    validate_categories(categories, mode);
    const int k = int(categories.size());
    const int d = provider.dim();
    CategoryEmbeddingSpace space;
    space.embeddings = Tensor<float>({k, d});
    space.dim = d;
    space.source_dim = d;
    space.provider_id = provider.id();
    space.prompt_mode = mode;
    space.categories = categories;
    for (const auto& cat : categories) {
        std::vector<float> row = provider.embed(build_prompt(cat, mode));
        if (int(row.size()) != d)
            throw NumericError("provider returned dimension " + std::to_string(row.size()) +
                               " for category " + std::to_string(cat.index) + ", expected " +
                               std::to_string(d));
        for (float v : row) {
            if (!std::isfinite(v))
                throw NumericError("provider returned a non-finite embedding for category " +
                                   std::to_string(cat.index));
        }
        std::copy(row.begin(), row.end(),
                  space.embeddings.ptr() + int64_t(cat.index) * d);
    }
    return project_space(space, target_dim, projection_seed);
}

CategoryEmbeddingSpace project_space(const CategoryEmbeddingSpace& space, int target_dim,
                                     uint64_t projection_seed) {
    if (target_dim == space.dim) {
        CategoryEmbeddingSpace out = space;
        out.projection_seed = projection_seed;
        return out;
    }
    const int k = space.k(), src = space.dim, dst = target_dim;
    // Random matrix with orthonormalized vectors on the smaller side keeps
    // the map an isometry (widening) or row-orthonormal compression.
    Rng rng(mix_seed({projection_seed, 0x9807ull}));
    const int rows = std::min(src, dst), cols = std::max(src, dst);
    std::vector<std::vector<double>> basis(static_cast<size_t>(rows),
                                           std::vector<double>(static_cast<size_t>(cols), 0.0));
    for (auto& row : basis)
        for (auto& v : row) v = rng.gaussian(0.0, 1.0);
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < i; ++j) {
            double dot = 0.0;
            for (int c = 0; c < cols; ++c) dot += basis[size_t(i)][size_t(c)] * basis[size_t(j)][size_t(c)];
            for (int c = 0; c < cols; ++c) basis[size_t(i)][size_t(c)] -= dot * basis[size_t(j)][size_t(c)];
        }
        double norm = 0.0;
        for (int c = 0; c < cols; ++c) norm += basis[size_t(i)][size_t(c)] * basis[size_t(i)][size_t(c)];
        norm = std::sqrt(norm);
        if (norm < 1e-12) throw NumericError("projection basis degenerated");
        for (int c = 0; c < cols; ++c) basis[size_t(i)][size_t(c)] /= norm;
    }

    CategoryEmbeddingSpace out = space;
    out.embeddings = Tensor<float>({k, dst});
    out.dim = dst;
    out.projection_seed = projection_seed;
    for (int r = 0; r < k; ++r) {
        const float* x = space.embeddings.ptr() + int64_t(r) * src;
        float* y = out.embeddings.ptr() + int64_t(r) * dst;
        for (int o = 0; o < dst; ++o) {
            double acc = 0.0;
            for (int i = 0; i < src; ++i) {
                // basis is rows x cols with rows = min(src, dst)
                const double m = (src <= dst) ? basis[size_t(i)][size_t(o)]
                                              : basis[size_t(o)][size_t(i)];
                acc += m * double(x[i]);
            }
            y[o] = float(acc);
        }
    }
    return out;
}

float default_magnitude(const Tensor<float>& embeddings) {
    const int k = embeddings.dim(0), d = embeddings.dim(1);
    double sum = 0.0;
    for (int r = 0; r < k; ++r) {
        double n = 0.0;
        const float* x = embeddings.ptr() + int64_t(r) * d;
        for (int i = 0; i < d; ++i) n += double(x[i]) * double(x[i]);
        sum += n;
    }
    return float(0.1 * std::sqrt(sum / k));
}

namespace {

double draw_one(const NoiseSourceSpec& spec, Rng& rng) {
    using F = NoiseSourceSpec::Family;
    switch (spec.family) {
        case F::gaussian: return rng.gaussian(spec.p0, spec.p1);
        case F::uniform: return rng.uniform(spec.p0, spec.p1);
        case F::laplace: return rng.laplace(spec.p0, spec.p1);
        default: return rng.bernoulli_pm1(spec.p0);
    }
}

}  // namespace

DiffusedEmbeddingSet cend_diffuse(const CategoryEmbeddingSpace& space,
                                  const std::vector<NoiseSourceSpec>& sources, uint64_t seed) {
    validate_noise_sources(sources, space.dim);
    const int k = space.k(), n = int(sources.size()), d = space.dim;
    DiffusedEmbeddingSet out;
    out.tensor = Tensor<float>({k, n, d});
    out.draw_seed = seed;
    for (int ki = 0; ki < k; ++ki) {
        const float* base = space.embeddings.ptr() + int64_t(ki) * d;
        for (int ni = 0; ni < n; ++ni) {
            const auto& src = sources[size_t(ni)];
            Rng rng(mix_seed({seed, uint64_t(ki), uint64_t(ni)}));
            float* row = out.tensor.ptr() + (int64_t(ki) * n + ni) * d;
            const bool scalar_mag = src.magnitude.size() == 1;
            for (int i = 0; i < d; ++i) {
                const float m = scalar_mag ? src.magnitude[0] : src.magnitude[size_t(i)];
                const float q = float(draw_one(src, rng));
                row[i] = base[i] + m * q;
                if (!std::isfinite(row[i]))
                    throw NumericError("non-finite diffused embedding at category " +
                                       std::to_string(ki) + " source " + std::to_string(ni + 1));
            }
        }
    }
    return out;
}

namespace {

void need(std::istream& is, const char* what) {
    if (!is.good()) throw IoError(std::string("unexpected end of embedding file reading ") + what);
}

}  // namespace

void write_embedding_file(const std::string& path, const Tensor<float>& embeddings,
                          const std::vector<CategorySpec>& categories) {
    const uint32_t k = uint32_t(embeddings.dim(0));
    const uint32_t d = uint32_t(embeddings.dim(1));
    if (categories.size() != k) throw ConfigError("embedding file: category count mismatch");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open embedding file for writing: " + path);
    os.write("CAEE", 4);
    const uint16_t version = 1;
    os.write(reinterpret_cast<const char*>(&version), 2);
    os.write(reinterpret_cast<const char*>(&k), 4);
    os.write(reinterpret_cast<const char*>(&d), 4);
    os.write(reinterpret_cast<const char*>(embeddings.ptr()),
             std::streamsize(size_t(k) * d * 4));
    for (const auto& c : categories) {
        const uint32_t len = uint32_t(c.name.size());
        os.write(reinterpret_cast<const char*>(&len), 4);
        os.write(c.name.data(), len);
    }
    if (!os) throw IoError("failed writing embedding file: " + path);
}

CategoryEmbeddingSpace ingest_embedding_file(const std::string& path,
                                             const std::vector<CategorySpec>& categories) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open embedding file: " + path);
    char magic[4];
    is.read(magic, 4);
    need(is, "magic");
    if (std::memcmp(magic, "CAEE", 4) != 0) throw IoError("bad embedding file magic in " + path);
    uint16_t version;
    is.read(reinterpret_cast<char*>(&version), 2);
    need(is, "version");
    if (version != 1)
        throw IoError("unsupported embedding file version " + std::to_string(version));
    uint32_t k, d;
    is.read(reinterpret_cast<char*>(&k), 4);
    need(is, "category count");
    is.read(reinterpret_cast<char*>(&d), 4);
    need(is, "dimension");
    if (k != categories.size())
        throw IoError("missing category embedding: file has " + std::to_string(k) +
                      " rows, configuration expects " + std::to_string(categories.size()));
    CategoryEmbeddingSpace space;
    space.embeddings = Tensor<float>({int(k), int(d)});
    space.dim = int(d);
    space.source_dim = int(d);
    space.provider_id = "file:" + path;
    is.read(reinterpret_cast<char*>(space.embeddings.ptr()), std::streamsize(size_t(k) * d * 4));
    need(is, "embedding rows");
    for (uint32_t r = 0; r < k; ++r) {
        const float* row = space.embeddings.ptr() + int64_t(r) * d;
        for (uint32_t i = 0; i < d; ++i) {
            if (!std::isfinite(row[i]))
                throw NumericError("embedding file row for category " + std::to_string(r) +
                                   " contains a non-finite value");
        }
    }
    space.categories = categories;
    for (uint32_t r = 0; r < k; ++r) {
        uint32_t len;
        is.read(reinterpret_cast<char*>(&len), 4);
        need(is, "category name length");
        if (len > (1u << 16)) throw IoError("corrupt embedding file: oversized category name");
        std::string name(len, '\0');
        is.read(name.data(), len);
        need(is, "category name");
        if (!categories[r].name.empty() && !name.empty() && categories[r].name != name)
            throw ConfigError("embedding file category name '" + name +
                              "' does not match configured '" + categories[r].name + "' at index " +
                              std::to_string(r));
    }
    return space;
}

}  // namespace cae
