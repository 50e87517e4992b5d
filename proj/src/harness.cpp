#include "cae/harness.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace cae {

using nlohmann::json;

void AblationPlan::validate() const {
    static const std::vector<std::string> kAxes = {"cend_on_off", "cncl_on_off", "n_sources",
                                                   "provider",    "prompt_mode", "lambda_sweep"};
    if (std::find(kAxes.begin(), kAxes.end(), axis) == kAxes.end())
        throw ConfigError("ablation axis '" + axis + "' is not recognized");
    if (values.empty()) throw ConfigError("ablation plan: values list is empty");
    if (repetitions < 1) throw ConfigError("ablation plan: repetitions must be >= 1");
    if (seeds.empty()) throw ConfigError("ablation plan: seed set is empty");
    for (const auto& v : values) apply_axis_value(base, axis, v);  // fail fast
}

AblationPlan load_ablation_plan(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open ablation plan: " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    json root;
    try {
        root = json::parse(ss.str());
    } catch (const json::exception& e) {
        throw ConfigError(path + ": not valid JSON: " + e.what());
    }
    AblationPlan plan;
    if (!root.contains("axis") || !root.at("axis").is_string())
        throw ConfigError("ablation plan: axis is required");
    plan.axis = root.at("axis").get<std::string>();
    if (!root.contains("values") || !root.at("values").is_array())
        throw ConfigError("ablation plan: values array is required");
    for (const auto& v : root.at("values")) {
        if (v.is_string())
            plan.values.push_back(v.get<std::string>());
        else
            plan.values.push_back(v.dump());
    }
    if (root.contains("repetitions")) plan.repetitions = root.at("repetitions").get<int>();
    if (!root.contains("base_config"))
        throw ConfigError("ablation plan: base_config is required");
    if (root.at("base_config").is_string()) {
        plan.base = load_config(root.at("base_config").get<std::string>());
    } else {
        plan.base = parse_config_text(root.at("base_config").dump(), path + "#base_config");
    }
    if (root.contains("seeds")) {
        for (const auto& s : root.at("seeds")) plan.seeds.push_back(s.get<uint64_t>());
    } else {
        plan.seeds.push_back(plan.base.seed);
    }
    plan.validate();
    return plan;
}

RunConfig apply_axis_value(const RunConfig& base, const std::string& axis,
                           const std::string& value) {
    RunConfig cfg = base;
    if (axis == "cend_on_off") {
        if (value == "on") {
            cfg.embeddings.strategy = EmbeddingStrategy::cend;
        } else if (value == "off") {
            cfg.embeddings.strategy = EmbeddingStrategy::gaussian;
            cfg.student.alpha = 0.0;  // contrastive pairs need category embeddings
        } else {
            throw ConfigError("cend_on_off values must be 'on' or 'off'");
        }
    } else if (axis == "cncl_on_off") {
        if (value == "on") {
            if (cfg.student.alpha == 0.0) cfg.student.alpha = 1.0;
        } else if (value == "off") {
            cfg.student.alpha = 0.0;
        } else {
            throw ConfigError("cncl_on_off values must be 'on' or 'off'");
        }
    } else if (axis == "n_sources") {
        int n = 0;
        try {
            n = std::stoi(value);
        } catch (...) {
            throw ConfigError("n_sources values must be integers, got '" + value + "'");
        }
        if (n < 1 || n > 64) throw ConfigError("n_sources must be in [1, 64]");
        cfg.cend.sources.clear();
        cfg.cend.n = n;
    } else if (axis == "provider") {
        if (value.rfind("stub:", 0) == 0) {
            cfg.embeddings.provider = "stub";
            cfg.embeddings.provider_seed = std::stoull(value.substr(5));
        } else if (value == "stub") {
            cfg.embeddings.provider = "stub";
        } else if (value.rfind("file:", 0) == 0) {
            cfg.embeddings.provider = "file";
            cfg.embeddings.file = value.substr(5);
        } else {
            throw ConfigError("provider values must be 'stub', 'stub:<seed>' or 'file:<path>'");
        }
    } else if (axis == "prompt_mode") {
        if (value == "name")
            cfg.embeddings.prompt_mode = PromptMode::class_name;
        else if (value == "index")
            cfg.embeddings.prompt_mode = PromptMode::class_index;
        else
            throw ConfigError("prompt_mode values must be 'name' or 'index'");
    } else if (axis == "lambda_sweep") {
        json v;
        try {
            v = json::parse(value);
        } catch (const json::exception&) {
            throw ConfigError("lambda_sweep values must be JSON objects like "
                              "{\"lambda_bn\":1.0,\"lambda_adv\":0.5}");
        }
        if (v.contains("lambda_bn")) cfg.generator.lambda_bn = v.at("lambda_bn").get<double>();
        if (v.contains("lambda_adv")) cfg.generator.lambda_adv = v.at("lambda_adv").get<double>();
    } else {
        throw ConfigError("ablation axis '" + axis + "' is not recognized");
    }
    cfg.digest = Sha256::hex_of(cfg.canonical_json());
    return cfg;
}

namespace {

void write_ablation_report(const AblationReport& report, const std::string& dir) {
    std::filesystem::create_directories(dir);
    std::ofstream csv(std::filesystem::path(dir) / "report.csv");
    if (!csv) throw IoError("cannot write ablation report in " + dir);
    csv << "axis,value,seed,repetition,status,final_acc,mean_l_g,mean_l_s,seconds,config_digest\n";
    for (const auto& c : report.cells) {
        csv << c.axis << ',' << c.value << ',' << c.seed << ',' << c.repetition << ','
            << (c.ok ? "ok" : "failed") << ',' << c.final_accuracy << ',' << c.mean_l_g << ','
            << c.mean_l_s << ',' << c.seconds << ',' << c.config_digest << "\n";
    }
    std::ofstream jl(std::filesystem::path(dir) / "report.jsonl");
    for (const auto& c : report.cells) {
        json j;
        j["axis"] = c.axis;
        j["value"] = c.value;
        j["seed"] = c.seed;
        j["repetition"] = c.repetition;
        j["status"] = c.ok ? "ok" : "failed";
        if (!c.ok) j["error"] = c.error;
        j["final_acc"] = c.final_accuracy;
        j["mean_l_g"] = c.mean_l_g;
        j["mean_l_s"] = c.mean_l_s;
        j["seconds"] = c.seconds;
        j["config_digest"] = c.config_digest;
        jl << j.dump() << "\n";
    }
}

}  // namespace

AblationReport run_ablation(const AblationPlan& plan, const std::string& out_dir) {
    plan.validate();
    AblationReport report;

    // one pretrained teacher per seed, shared across cells
    std::map<uint64_t, PretrainResult> teachers;
    std::map<uint64_t, ToyDataset> datasets;
    for (uint64_t seed : plan.seeds) {
        RunConfig cfg = plan.base;
        cfg.seed = seed;
        datasets[seed] = make_toy_dataset(cfg.data.recipe, cfg.data.k, cfg.data.per_class,
                                          cfg.data.test_per_class, seed);
        teachers[seed] = pretrain_teacher(datasets[seed], cfg);
    }

    std::map<std::string, std::pair<double, int>> acc_sums;
    for (const auto& value : plan.values) {
        for (int rep = 0; rep < plan.repetitions; ++rep) {
            for (uint64_t seed : plan.seeds) {
                AblationCell cell;
                cell.axis = plan.axis;
                cell.value = value;
                cell.seed = seed;
                cell.repetition = rep;
                try {
                    RunConfig cfg = apply_axis_value(plan.base, plan.axis, value);
                    cfg.seed = mix_seed({seed, uint64_t(rep)});
                    if (plan.repetitions == 1) cfg.seed = seed;
                    cfg.digest = Sha256::hex_of(cfg.canonical_json());
                    cell.config_digest = cfg.digest;

                    auto session = make_session(cfg, teachers[seed].teacher);
                    using Clock = std::chrono::steady_clock;
                    const auto t0 = Clock::now();
                    auto outcome = run_distillation(session, datasets[seed]);
                    cell.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
                    cell.final_accuracy = outcome.final_accuracy;
                    for (const auto& r : outcome.records) {
                        cell.mean_l_g += r.l_g_total / double(outcome.records.size());
                        cell.mean_l_s += r.l_s_total / double(outcome.records.size());
                    }
                    cell.ok = true;
                    auto& [sum, count] = acc_sums[value];
                    sum += cell.final_accuracy;
                    ++count;
                } catch (const std::exception& e) {
                    cell.ok = false;
                    cell.error = e.what();
                }
                report.cells.push_back(cell);
            }
        }
    }
    for (const auto& [value, sc] : acc_sums)
        if (sc.second > 0) report.mean_accuracy[value] = sc.first / sc.second;

    if (!out_dir.empty()) write_ablation_report(report, out_dir);
    return report;
}

SpeedupResult measure_speedup(const RunConfig& config_a, const RunConfig& config_b, int epochs) {
    if (epochs < 3) throw ConfigError("measure_speedup: epochs must be >= 3 (first is warm-up)");
    SpeedupResult result;
    auto run_one = [&](RunConfig cfg, std::vector<double>& out_times) {
        cfg.student.epochs = epochs;
        auto data = make_toy_dataset(cfg.data.recipe, cfg.data.k, cfg.data.per_class,
                                     cfg.data.test_per_class, cfg.seed);
        auto pre = pretrain_teacher(data, cfg);
        auto session = make_session(cfg, pre.teacher);
        auto outcome = run_distillation(session, data);
        for (const auto& r : outcome.records) out_times.push_back(r.epoch_seconds);
    };
    run_one(config_a, result.epoch_seconds_a);
    run_one(config_b, result.epoch_seconds_b);

    auto mean_tail = [](const std::vector<double>& t) {
        double s = 0.0;
        for (size_t i = 1; i < t.size(); ++i) s += t[i];
        return s / double(t.size() - 1);
    };
    const double a = mean_tail(result.epoch_seconds_a);
    const double b = mean_tail(result.epoch_seconds_b);
    if (!(a > 0.0) || !(b > 0.0)) throw NumericError("measure_speedup: non-positive epoch timing");
    result.ratio = a / b;
    return result;
}

int64_t steps_to_threshold(const RunConfig& cfg, Network<float>& teacher, const ToyDataset& data,
                           double threshold_accuracy) {
    auto session = make_session(cfg, teacher);
    int64_t steps = INT64_MAX;
    run_distillation(session, data, nullptr, [&](const MetricsRecord& rec) {
        if (rec.student_test_acc >= threshold_accuracy) {
            steps = session.gen_steps_done;
            return false;  // stop early
        }
        return true;
    });
    return steps;
}

}  // namespace cae
