#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "cae/config.hpp"

using namespace cae;

TEST_CASE("minimal config resolves defaults with a stable digest") {
    const char* text = R"({"seed": 42, "data": {"k": 10}})";
    auto a = parse_config_text(text, "test");
    auto b = parse_config_text(text, "test");
    CHECK(a.digest == b.digest);
    CHECK(a.digest.size() == 64);
    CHECK(a.student.lr == 0.1);
    CHECK(a.generator.lr == 0.001);
    CHECK(a.student.t_kd == 4.0);
    CHECK(a.student.tau == 0.1);
    CHECK(a.cend.n == 4);
    CHECK(a.generator.bank_capacity == 4096);
    CHECK(a.data.recipe == "shapes-v1");
}

TEST_CASE("resolved config round trip reproduces the digest") {
    auto a = parse_config_text(R"({"seed": 7, "data": {"k": 4, "per_class": 20},
                                   "student": {"alpha": 0.5, "epochs": 3}})",
                               "test");
    auto b = parse_config_text(a.canonical_json(), "roundtrip");
    CHECK(a.digest == b.digest);
}

TEST_CASE("config validation errors name exact key paths") {
    CHECK_THROWS_WITH(parse_config_text(R"({"seed": 1, "data": {"k": 10},
                                            "student": {"tau": 0.0}})",
                                        "t"),
                      doctest::Contains("student.tau must be > 0"));
    CHECK_THROWS_WITH(parse_config_text(R"({"seed": 1, "data": {"k": 10}, "bogus": 1})", "t"),
                      doctest::Contains("bogus"));
    CHECK_THROWS_WITH(parse_config_text(R"({"seed": 1, "data": {"k": 10},
                                            "generator": {"weird_key": 2}})",
                                        "t"),
                      doctest::Contains("generator.weird_key"));
    CHECK_THROWS_WITH(parse_config_text(R"({"data": {"k": 10}})", "t"),
                      doctest::Contains("seed"));
    CHECK_THROWS_WITH(parse_config_text(R"({"seed": 1})", "t"), doctest::Contains("data"));
    CHECK_THROWS_WITH(parse_config_text(R"({"seed": 1, "data": {"k": 99}})", "t"),
                      doctest::Contains("data.k"));
}

TEST_CASE("duplicate noise sources are rejected at load") {
    const char* text = R"({
        "seed": 1, "data": {"k": 10},
        "cend": {"sources": [
            {"family": "gaussian", "p0": 0.0, "p1": 1.0},
            {"family": "gaussian", "p0": 0.0, "p1": 1.0}
        ]}
    })";
    CHECK_THROWS_WITH(parse_config_text(text, "t"), doctest::Contains("same (family, params)"));
}

TEST_CASE("gaussian strategy requires alpha zero") {
    CHECK_THROWS_WITH(parse_config_text(R"({"seed": 1, "data": {"k": 10},
                                            "embeddings": {"strategy": "gaussian"}})",
                                        "t"),
                      doctest::Contains("student.alpha must be 0"));
    CHECK_NOTHROW(parse_config_text(R"({"seed": 1, "data": {"k": 10},
                                        "embeddings": {"strategy": "gaussian"},
                                        "student": {"alpha": 0.0}})",
                                    "t"));
}

TEST_CASE("explicit sources override n and keep auto magnitudes") {
    auto cfg = parse_config_text(R"({
        "seed": 1, "data": {"k": 4},
        "cend": {"sources": [
            {"family": "laplace", "p0": 0.0, "p1": 1.0},
            {"family": "uniform", "p0": -1.0, "p1": 1.0, "magnitude": 0.05}
        ]}
    })",
                                 "t");
    CHECK(cfg.cend.n == 2);
    Tensor<float> e({2, 4});
    e.fill(0.5f);  // rms row norm 1 -> auto magnitude 0.1
    auto sources = cfg.resolve_sources(e);
    REQUIRE(sources.size() == 2);
    CHECK(sources[0].magnitude[0] == doctest::Approx(0.1f));
    CHECK(sources[1].magnitude[0] == doctest::Approx(0.05f));
    CHECK(sources[0].family == NoiseSourceSpec::Family::laplace);
}

TEST_CASE("config file loading") {
    auto path = std::filesystem::temp_directory_path() / "cae_test_cfg.json";
    {
        std::ofstream os(path);
        os << R"({"seed": 3, "data": {"k": 5}})";
    }
    auto cfg = load_config(path.string());
    CHECK(cfg.seed == 3);
    CHECK(cfg.data.k == 5);
    CHECK_THROWS_AS(load_config("/definitely/not/here.json"), IoError);
    std::error_code ec;
    std::filesystem::remove(path, ec);
}
