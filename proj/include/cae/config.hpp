#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cae/embedding_space.hpp"

namespace cae {

// Generator inputs: "cend" draws category embeddings diffused per step;
// "gaussian" reproduces the unstructured-noise baseline (fresh z ~ N(0,1)
// per slot, labels assigned to slots but invisible to the generator).
enum class EmbeddingStrategy { cend, gaussian };

struct DataConfig {
    std::string recipe = "shapes-v1";
    int k = 10;
    int per_class = 150;
    int test_per_class = 50;
};

struct EmbeddingsConfig {
    std::string provider = "stub";  // "stub" or "file"
    uint64_t provider_seed = 9001;
    std::string file;               // CAEE path when provider == "file"
    PromptMode prompt_mode = PromptMode::class_name;
    int dim = 64;       // provider-native width (stub only)
    int gen_dim = 64;   // generator input width after projection
    uint64_t projection_seed = 7;
    EmbeddingStrategy strategy = EmbeddingStrategy::cend;
};

struct CendSourceConfig {
    std::string family = "gaussian";
    double p0 = 0.0, p1 = 1.0;
    std::optional<double> magnitude;  // absent -> auto (0.1 * rms row norm)
};

struct CendConfig {
    int n = 4;                               // used when sources empty
    std::vector<CendSourceConfig> sources;   // explicit source list
    std::optional<double> magnitude;         // shared default magnitude
};

struct GeneratorConfig {
    double lr = 1e-3;
    double lambda_bn = 1.0;
    double lambda_adv = 1.0;
    int bank_capacity = 4096;
};

struct StudentConfig {
    double lr = 0.1;
    double momentum = 0.9;
    int epochs = 60;
    double t_kd = 4.0;
    double tau = 0.1;
    double alpha = 1.0;
    int g_steps = 1;   // generator steps per epoch
    int s_steps = 5;   // student steps per epoch
    int batch_size = 64;
    bool negatives_include_anchors = true;
};

struct TeacherConfig {
    double lr = 1e-3;
    int epochs = 30;
    int batch_size = 64;
    double accuracy_floor = 0.95;
};

struct ScheduleConfig {
    double min_lr = 0.0;
};

struct RunConfig {
    uint64_t seed = 0;
    std::string out_dir;
    DataConfig data;
    EmbeddingsConfig embeddings;
    CendConfig cend;
    GeneratorConfig generator;
    StudentConfig student;
    TeacherConfig teacher;
    ScheduleConfig schedule;

    std::string digest;  // sha256 of the resolved canonical form

    // Resolved noise sources for the given embedding matrix (fills the
    // auto magnitudes).
    std::vector<NoiseSourceSpec> resolve_sources(const Tensor<float>& embeddings) const;

    std::string canonical_json() const;
};

// Strict load: unknown keys rejected, every numeric field range-checked,
// errors name the exact key path. `data` and `seed` are required.
RunConfig load_config(const std::string& path);
RunConfig parse_config_text(const std::string& text, const std::string& origin);

void save_resolved_config(const RunConfig& cfg, const std::string& path);

}  // namespace cae
