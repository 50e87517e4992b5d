#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "cae/embedding_space.hpp"

using namespace cae;

namespace {

std::vector<CategorySpec> make_categories(int k) {
    std::vector<CategorySpec> cats;
    for (int i = 0; i < k; ++i) cats.push_back({i, "class" + std::to_string(i)});
    return cats;
}

std::filesystem::path temp_path(const char* name) {
    return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("build_prompt formats") {
    CHECK(build_prompt({0, "cat"}, PromptMode::class_name) == "a photo of cat");
    CHECK(build_prompt({3, "dog"}, PromptMode::class_index) == "a photo of 3");
    CHECK_THROWS_AS(build_prompt({2, ""}, PromptMode::class_name), ConfigError);
    CHECK_THROWS_WITH(build_prompt({2, ""}, PromptMode::class_name),
                      doctest::Contains("category 2"));
    // index mode works with empty names
    CHECK(build_prompt({7, ""}, PromptMode::class_index) == "a photo of 7");
}

TEST_CASE("stub provider determinism and spread") {
    auto p = provider_stub(42, 64);
    auto a = p->embed("a photo of cat");
    auto b = p->embed("a photo of cat");
    CHECK(a == b);
    auto c = p->embed("a photo of dog");
    double dot = 0, na = 0, nc = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        dot += double(a[i]) * c[i];
        na += double(a[i]) * a[i];
        nc += double(c[i]) * c[i];
    }
    CHECK(dot / std::sqrt(na * nc) < 1.0);  // distinct prompts, distinct vectors
    CHECK(std::abs(std::sqrt(na) - 1.0) < 1e-6);
    CHECK(std::abs(std::sqrt(nc) - 1.0) < 1e-6);
    CHECK(p->call_count() == 3);
    CHECK_THROWS_AS(provider_stub(1, 1), ConfigError);
}

TEST_CASE("init_embedding_space calls provider once per category and is reproducible") {
    auto cats = make_categories(10);
    auto p1 = provider_stub(7, 64);
    auto s1 = init_embedding_space(cats, *p1, PromptMode::class_name, 64, 5);
    CHECK(p1->call_count() == 10);
    CHECK(s1.embeddings.shape == std::vector<int>{10, 64});
    CHECK(s1.embeddings.all_finite());

    auto p2 = provider_stub(7, 64);
    auto s2 = init_embedding_space(cats, *p2, PromptMode::class_name, 64, 5);
    CHECK(s1.embeddings.data == s2.embeddings.data);  // bitwise

    SUBCASE("K=1 rejected") {
        auto one = make_categories(1);
        auto p = provider_stub(7, 64);
        CHECK_THROWS_AS(init_embedding_space(one, *p, PromptMode::class_name, 64, 5), ConfigError);
    }
    SUBCASE("duplicate category index rejected") {
        auto dup = make_categories(3);
        dup[2].index = 1;
        auto p = provider_stub(7, 64);
        CHECK_THROWS_AS(init_embedding_space(dup, *p, PromptMode::class_name, 64, 5), ConfigError);
    }
}

TEST_CASE("projection preserves norms when widening") {
    auto cats = make_categories(4);
    auto p = provider_stub(3, 32);
    auto wide = init_embedding_space(cats, *p, PromptMode::class_name, 96, 11);
    CHECK(wide.dim == 96);
    CHECK(wide.source_dim == 32);
    for (int r = 0; r < 4; ++r) {
        double n = 0;
        for (int i = 0; i < 96; ++i) {
            const float v = wide.embeddings.at2(r, i);
            n += double(v) * v;
        }
        CHECK(std::abs(std::sqrt(n) - 1.0) < 1e-4);  // provider rows are unit-norm
    }
}

TEST_CASE("cend_diffuse zero magnitude is exact identity") {
    auto cats = make_categories(3);
    auto p = provider_stub(9, 16);
    auto space = init_embedding_space(cats, *p, PromptMode::class_name, 16, 1);
    auto sources = default_noise_sources(4, 0.0f);
    auto diffused = cend_diffuse(space, sources, 123);
    for (int k = 0; k < 3; ++k)
        for (int n = 0; n < 4; ++n)
            for (int d = 0; d < 16; ++d)
                CHECK(diffused.row(k, n)[d] == space.embeddings.at2(k, d));
}

TEST_CASE("cend_diffuse on zero space with unit magnitude returns the raw draw") {
    CategoryEmbeddingSpace space;
    space.embeddings = Tensor<float>({2, 8});
    space.dim = 8;
    space.categories = make_categories(2);
    auto sources = default_noise_sources(1, 1.0f);
    auto diffused = cend_diffuse(space, sources, 77);
    auto again = cend_diffuse(space, sources, 77);
    CHECK(diffused.tensor.data == again.tensor.data);  // determinism
    // The same seeded draw added to a nonzero base shifts by exactly the base.
    CategoryEmbeddingSpace shifted = space;
    shifted.embeddings.fill(2.5f);
    auto d2 = cend_diffuse(shifted, sources, 77);
    for (int64_t i = 0; i < d2.tensor.numel(); ++i)
        CHECK(d2.tensor[i] == doctest::Approx(diffused.tensor[i] + 2.5f).epsilon(1e-6));
}

TEST_CASE("cend_diffuse redraws differ across seeds") {
    auto cats = make_categories(2);
    auto p = provider_stub(9, 16);
    auto space = init_embedding_space(cats, *p, PromptMode::class_name, 16, 1);
    auto sources = default_noise_sources(2, 0.5f);
    auto d1 = cend_diffuse(space, sources, 1);
    auto d2 = cend_diffuse(space, sources, 2);
    CHECK(d1.tensor.data != d2.tensor.data);
}

// Monte-Carlo statistics oracle: sample moments of (diffused - base) / M
// against each family's analytic moments.
TEST_CASE("cend_diffuse per-family moments") {
    const int draws = 100000;
    const int dim = 10;
    const double m = 0.5;
    CategoryEmbeddingSpace space;
    space.embeddings = Tensor<float>({draws / dim, dim});
    space.dim = dim;

    auto check_family = [&](NoiseSourceSpec::Family fam, double p0, double p1) {
        NoiseSourceSpec spec;
        spec.family = fam;
        spec.p0 = p0;
        spec.p1 = p1;
        spec.magnitude = {float(m)};
        spec.source_index = 1;
        auto diffused = cend_diffuse(space, {spec}, 2024);
        double sum = 0.0, sq = 0.0;
        const int64_t n = diffused.tensor.numel();
        for (int64_t i = 0; i < n; ++i) {
            sum += diffused.tensor[i];
            sq += double(diffused.tensor[i]) * diffused.tensor[i];
        }
        const double mean = sum / double(n);
        const double stddev = std::sqrt(sq / double(n) - mean * mean);
        double fmean, fstd;
        family_moments(spec, &fmean, &fstd);
        CHECK(std::abs(mean - m * fmean) <= 3.0 * m * fstd / std::sqrt(double(n)));
        CHECK(std::abs(stddev - m * fstd) <= 0.02 * m * fstd);
    };

    check_family(NoiseSourceSpec::Family::gaussian, 0.0, 1.0);
    check_family(NoiseSourceSpec::Family::uniform, -1.0, 1.0);
    check_family(NoiseSourceSpec::Family::laplace, 0.0, 1.0);
    check_family(NoiseSourceSpec::Family::bernoulli_mask, 0.5, 0.0);
}

TEST_CASE("noise source validation") {
    auto sources = default_noise_sources(4, 0.1f);
    CHECK_NOTHROW(validate_noise_sources(sources, 16));

    SUBCASE("duplicate distribution rejected") {
        sources.push_back(sources[0]);
        sources.back().source_index = 5;
        CHECK_THROWS_AS(validate_noise_sources(sources, 16), ConfigError);
    }
    SUBCASE("negative magnitude rejected") {
        sources[1].magnitude = {-0.5f};
        CHECK_THROWS_AS(validate_noise_sources(sources, 16), ConfigError);
    }
    SUBCASE("magnitude length mismatch rejected") {
        sources[1].magnitude = {0.5f, 0.5f};
        CHECK_THROWS_AS(validate_noise_sources(sources, 16), ConfigError);
    }
    SUBCASE("defaults stay distinct for n up to 8") {
        CHECK_NOTHROW(validate_noise_sources(default_noise_sources(8, 0.1f), 16));
    }
}

TEST_CASE("embedding file round trip") {
    auto cats = make_categories(10);
    auto p = provider_stub(21, 48);
    auto space = init_embedding_space(cats, *p, PromptMode::class_name, 48, 0);
    auto path = temp_path("cae_test_embed.caee");
    write_embedding_file(path.string(), space.embeddings, cats);

    auto loaded = ingest_embedding_file(path.string(), cats);
    CHECK(loaded.dim == 48);
    CHECK(loaded.embeddings.data == space.embeddings.data);

    SUBCASE("row count mismatch") {
        auto fewer = make_categories(9);
        CHECK_THROWS_WITH(ingest_embedding_file(path.string(), fewer),
                          doctest::Contains("missing category embedding"));
    }
    SUBCASE("truncated file") {
        auto bytes = std::filesystem::file_size(path);
        std::filesystem::resize_file(path, bytes / 2);
        CHECK_THROWS_WITH(ingest_embedding_file(path.string(), cats),
                          doctest::Contains("unexpected end of embedding file"));
    }
    SUBCASE("bad magic") {
        std::ofstream os(path, std::ios::binary);
        os.write("NOPE", 4);
        os.close();
        CHECK_THROWS_AS(ingest_embedding_file(path.string(), cats), IoError);
    }
    SUBCASE("NaN row names the category") {
        auto bad = space.embeddings;
        bad.at2(3, 0) = std::numeric_limits<float>::quiet_NaN();
        write_embedding_file(path.string(), bad, cats);
        CHECK_THROWS_WITH(ingest_embedding_file(path.string(), cats),
                          doctest::Contains("category 3"));
    }
    std::error_code ec;
    std::filesystem::remove(path, ec);
}

TEST_CASE("default magnitude follows rms row norm") {
    Tensor<float> e({3, 4});
    e.fill(0.5f);  // row norm = 1.0
    CHECK(default_magnitude(e) == doctest::Approx(0.1).epsilon(1e-6));
}
