#include "cae/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "cae/sha256.hpp"

namespace cae {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
    throw ConfigError(path + " " + msg);
}

void reject_unknown(const json& obj, const std::string& path, const std::set<std::string>& known) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!known.count(it.key())) fail(path.empty() ? it.key() : path + "." + it.key(),
                                         "is not a recognized configuration key");
    }
}

double get_number(const json& obj, const std::string& path, const std::string& key, double fallback,
                  double lo, double hi, bool required = false) {
    if (!obj.contains(key)) {
        if (required) fail(path + "." + key, "is required");
        return fallback;
    }
    const auto& v = obj.at(key);
    if (!v.is_number()) fail(path + "." + key, "must be a number");
    const double x = v.get<double>();
    if (x < lo || x > hi)
        fail(path + "." + key, "must be in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return x;
}

int get_int(const json& obj, const std::string& path, const std::string& key, int fallback, int lo,
            int hi, bool required = false) {
    if (!obj.contains(key)) {
        if (required) fail(path + "." + key, "is required");
        return fallback;
    }
    const auto& v = obj.at(key);
    if (!v.is_number_integer()) fail(path + "." + key, "must be an integer");
    const int64_t x = v.get<int64_t>();
    if (x < lo || x > hi)
        fail(path + "." + key, "must be in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return int(x);
}

std::string get_string(const json& obj, const std::string& path, const std::string& key,
                       const std::string& fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj.at(key).is_string()) fail(path + "." + key, "must be a string");
    return obj.at(key).get<std::string>();
}

uint64_t get_seed(const json& obj, const std::string& path, const std::string& key,
                  uint64_t fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_number_integer() || v.get<int64_t>() < 0)
        fail(path + "." + key, "must be a non-negative integer");
    return v.get<uint64_t>();
}

}  // namespace

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(origin + ": not valid JSON: " + e.what());
    }
    if (!root.is_object()) throw ConfigError(origin + ": top level must be an object");

    RunConfig cfg;
    reject_unknown(root, "", {"seed", "out_dir", "data", "embeddings", "cend", "generator",
                              "student", "teacher", "schedule"});

    if (!root.contains("seed")) throw ConfigError("seed is required");
    if (!root.at("seed").is_number_integer() || root.at("seed").get<int64_t>() < 0)
        throw ConfigError("seed must be a non-negative integer");
    cfg.seed = root.at("seed").get<uint64_t>();
    cfg.out_dir = get_string(root, "", "out_dir", "");

    if (!root.contains("data") || !root.at("data").is_object())
        throw ConfigError("data section is required");
    {
        const auto& d = root.at("data");
        reject_unknown(d, "data", {"recipe", "k", "per_class", "test_per_class"});
        cfg.data.recipe = get_string(d, "data", "recipe", cfg.data.recipe);
        cfg.data.k = get_int(d, "data", "k", cfg.data.k, 2, 10);
        cfg.data.per_class = get_int(d, "data", "per_class", cfg.data.per_class, 10, 100000);
        cfg.data.test_per_class =
            get_int(d, "data", "test_per_class", cfg.data.test_per_class, 1, 100000);
    }

    if (root.contains("embeddings")) {
        const auto& e = root.at("embeddings");
        if (!e.is_object()) throw ConfigError("embeddings must be an object");
        reject_unknown(e, "embeddings",
                       {"provider", "provider_seed", "file", "prompt_mode", "dim", "gen_dim",
                        "projection_seed", "strategy"});
        cfg.embeddings.provider = get_string(e, "embeddings", "provider", cfg.embeddings.provider);
        if (cfg.embeddings.provider != "stub" && cfg.embeddings.provider != "file")
            fail("embeddings.provider", "must be 'stub' or 'file'");
        cfg.embeddings.provider_seed =
            get_seed(e, "embeddings", "provider_seed", cfg.embeddings.provider_seed);
        cfg.embeddings.file = get_string(e, "embeddings", "file", "");
        if (cfg.embeddings.provider == "file" && cfg.embeddings.file.empty())
            fail("embeddings.file", "is required when embeddings.provider is 'file'");
        const std::string pm = get_string(e, "embeddings", "prompt_mode", "name");
        if (pm == "name")
            cfg.embeddings.prompt_mode = PromptMode::class_name;
        else if (pm == "index")
            cfg.embeddings.prompt_mode = PromptMode::class_index;
        else
            fail("embeddings.prompt_mode", "must be 'name' or 'index'");
        cfg.embeddings.dim = get_int(e, "embeddings", "dim", cfg.embeddings.dim, 2, 4096);
        cfg.embeddings.gen_dim = get_int(e, "embeddings", "gen_dim", cfg.embeddings.gen_dim, 2, 4096);
        cfg.embeddings.projection_seed =
            get_seed(e, "embeddings", "projection_seed", cfg.embeddings.projection_seed);
        const std::string strat = get_string(e, "embeddings", "strategy", "cend");
        if (strat == "cend")
            cfg.embeddings.strategy = EmbeddingStrategy::cend;
        else if (strat == "gaussian")
            cfg.embeddings.strategy = EmbeddingStrategy::gaussian;
        else
            fail("embeddings.strategy", "must be 'cend' or 'gaussian'");
    }

    if (root.contains("cend")) {
        const auto& c = root.at("cend");
        if (!c.is_object()) throw ConfigError("cend must be an object");
        reject_unknown(c, "cend", {"n", "sources", "magnitude"});
        cfg.cend.n = get_int(c, "cend", "n", cfg.cend.n, 1, 64);
        if (c.contains("magnitude"))
            cfg.cend.magnitude = get_number(c, "cend", "magnitude", 0.0, 0.0, 1e6);
        if (c.contains("sources")) {
            if (!c.at("sources").is_array()) fail("cend.sources", "must be an array");
            int idx = 0;
            for (const auto& s : c.at("sources")) {
                const std::string path = "cend.sources[" + std::to_string(idx) + "]";
                if (!s.is_object()) fail(path, "must be an object");
                reject_unknown(s, path, {"family", "p0", "p1", "magnitude"});
                CendSourceConfig sc;
                sc.family = get_string(s, path, "family", "gaussian");
                family_from_name(sc.family);  // validates
                sc.p0 = get_number(s, path, "p0", 0.0, -1e6, 1e6);
                sc.p1 = get_number(s, path, "p1", 1.0, -1e6, 1e6);
                if (s.contains("magnitude"))
                    sc.magnitude = get_number(s, path, "magnitude", 0.0, 0.0, 1e6);
                cfg.cend.sources.push_back(sc);
                ++idx;
            }
            if (!cfg.cend.sources.empty()) cfg.cend.n = int(cfg.cend.sources.size());
        }
    }

    if (root.contains("generator")) {
        const auto& g = root.at("generator");
        if (!g.is_object()) throw ConfigError("generator must be an object");
        reject_unknown(g, "generator", {"lr", "lambda_bn", "lambda_adv", "bank_capacity"});
        cfg.generator.lr = get_number(g, "generator", "lr", cfg.generator.lr, 1e-8, 1.0);
        cfg.generator.lambda_bn =
            get_number(g, "generator", "lambda_bn", cfg.generator.lambda_bn, 0.0, 1e4);
        cfg.generator.lambda_adv =
            get_number(g, "generator", "lambda_adv", cfg.generator.lambda_adv, 0.0, 1e4);
        cfg.generator.bank_capacity =
            get_int(g, "generator", "bank_capacity", cfg.generator.bank_capacity, 1, 10000000);
    }

    if (root.contains("student")) {
        const auto& s = root.at("student");
        if (!s.is_object()) throw ConfigError("student must be an object");
        reject_unknown(s, "student",
                       {"lr", "momentum", "epochs", "t_kd", "tau", "alpha", "g_steps", "s_steps",
                        "batch_size", "negatives_include_anchors"});
        cfg.student.lr = get_number(s, "student", "lr", cfg.student.lr, 1e-8, 10.0);
        cfg.student.momentum = get_number(s, "student", "momentum", cfg.student.momentum, 0.0, 0.999);
        cfg.student.epochs = get_int(s, "student", "epochs", cfg.student.epochs, 1, 100000);
        cfg.student.t_kd = get_number(s, "student", "t_kd", cfg.student.t_kd, 1e-6, 1e3);
        if (s.contains("tau")) {
            if (!s.at("tau").is_number() || !(s.at("tau").get<double>() > 0.0))
                throw ConfigError("student.tau must be > 0");
            cfg.student.tau = s.at("tau").get<double>();
        }
        cfg.student.alpha = get_number(s, "student", "alpha", cfg.student.alpha, 0.0, 1e4);
        cfg.student.g_steps = get_int(s, "student", "g_steps", cfg.student.g_steps, 1, 10000);
        cfg.student.s_steps = get_int(s, "student", "s_steps", cfg.student.s_steps, 1, 10000);
        cfg.student.batch_size = get_int(s, "student", "batch_size", cfg.student.batch_size, 1, 4096);
        if (s.contains("negatives_include_anchors")) {
            if (!s.at("negatives_include_anchors").is_boolean())
                fail("student.negatives_include_anchors", "must be a boolean");
            cfg.student.negatives_include_anchors = s.at("negatives_include_anchors").get<bool>();
        }
    }

    if (root.contains("teacher")) {
        const auto& t = root.at("teacher");
        if (!t.is_object()) throw ConfigError("teacher must be an object");
        reject_unknown(t, "teacher", {"lr", "epochs", "batch_size", "accuracy_floor"});
        cfg.teacher.lr = get_number(t, "teacher", "lr", cfg.teacher.lr, 1e-8, 1.0);
        cfg.teacher.epochs = get_int(t, "teacher", "epochs", cfg.teacher.epochs, 0, 100000);
        cfg.teacher.batch_size = get_int(t, "teacher", "batch_size", cfg.teacher.batch_size, 1, 4096);
        cfg.teacher.accuracy_floor =
            get_number(t, "teacher", "accuracy_floor", cfg.teacher.accuracy_floor, 0.0, 1.0);
    }

    if (root.contains("schedule")) {
        const auto& s = root.at("schedule");
        if (!s.is_object()) throw ConfigError("schedule must be an object");
        reject_unknown(s, "schedule", {"min_lr"});
        cfg.schedule.min_lr = get_number(s, "schedule", "min_lr", cfg.schedule.min_lr, 0.0, 10.0);
    }

    if (cfg.schedule.min_lr > cfg.student.lr)
        throw ConfigError("schedule.min_lr must be <= student.lr");
    if (cfg.embeddings.strategy == EmbeddingStrategy::gaussian && cfg.student.alpha != 0.0)
        throw ConfigError(
            "student.alpha must be 0 when embeddings.strategy is 'gaussian' (contrastive pairs "
            "require category embeddings)");

    // Validate the source list early (auto magnitudes stubbed with 0).
    cfg.resolve_sources(Tensor<float>({1, 1}));

    cfg.digest = Sha256::hex_of(cfg.canonical_json());
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open config file: " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_config_text(ss.str(), path);
}

std::vector<NoiseSourceSpec> RunConfig::resolve_sources(const Tensor<float>& embeds) const {
    const float auto_mag =
        float(cend.magnitude.value_or(double(default_magnitude(embeds))));
    std::vector<NoiseSourceSpec> out;
    if (cend.sources.empty()) {
        out = default_noise_sources(cend.n, auto_mag);
    } else {
        int idx = 1;
        for (const auto& sc : cend.sources) {
            NoiseSourceSpec spec;
            spec.source_index = idx++;
            spec.family = family_from_name(sc.family);
            spec.p0 = sc.p0;
            spec.p1 = sc.p1;
            spec.magnitude = {float(sc.magnitude.value_or(double(auto_mag)))};
            out.push_back(spec);
        }
    }
    validate_noise_sources(out, embeds.dim(1));
    return out;
}

std::string RunConfig::canonical_json() const {
    json root;
    root["seed"] = seed;
    root["out_dir"] = out_dir;
    root["data"] = {{"recipe", data.recipe},
                    {"k", data.k},
                    {"per_class", data.per_class},
                    {"test_per_class", data.test_per_class}};
    root["embeddings"] = {
        {"provider", embeddings.provider},
        {"provider_seed", embeddings.provider_seed},
        {"file", embeddings.file},
        {"prompt_mode", prompt_mode_name(embeddings.prompt_mode)},
        {"dim", embeddings.dim},
        {"gen_dim", embeddings.gen_dim},
        {"projection_seed", embeddings.projection_seed},
        {"strategy", embeddings.strategy == EmbeddingStrategy::cend ? "cend" : "gaussian"}};
    json sources = json::array();
    for (const auto& s : cend.sources) {
        json js = {{"family", s.family}, {"p0", s.p0}, {"p1", s.p1}};
        if (s.magnitude) js["magnitude"] = *s.magnitude;
        sources.push_back(js);
    }
    root["cend"] = {{"n", cend.n}, {"sources", sources}};
    if (cend.magnitude) root["cend"]["magnitude"] = *cend.magnitude;
    root["generator"] = {{"lr", generator.lr},
                         {"lambda_bn", generator.lambda_bn},
                         {"lambda_adv", generator.lambda_adv},
                         {"bank_capacity", generator.bank_capacity}};
    root["student"] = {{"lr", student.lr},
                       {"momentum", student.momentum},
                       {"epochs", student.epochs},
                       {"t_kd", student.t_kd},
                       {"tau", student.tau},
                       {"alpha", student.alpha},
                       {"g_steps", student.g_steps},
                       {"s_steps", student.s_steps},
                       {"batch_size", student.batch_size},
                       {"negatives_include_anchors", student.negatives_include_anchors}};
    root["teacher"] = {{"lr", teacher.lr},
                       {"epochs", teacher.epochs},
                       {"batch_size", teacher.batch_size},
                       {"accuracy_floor", teacher.accuracy_floor}};
    root["schedule"] = {{"min_lr", schedule.min_lr}};
    return root.dump(2);
}

void save_resolved_config(const RunConfig& cfg, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot write resolved config: " + path);
    os << cfg.canonical_json() << "\n";
}

}  // namespace cae
