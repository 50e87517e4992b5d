// Command-line entry point: init-embeddings, pretrain-teacher, distill, eval,
// ablate, report. Exit codes: 0 ok, 2 usage, 3 configuration, 4 io,
// 5 numeric, 1 other.

#include <cstdlib>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "cae/checkpoint.hpp"
#include "cae/distill.hpp"
#include "cae/harness.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace cae;

namespace {

fs::path resolve_out(const std::string& dir) {
    fs::path p(dir);
    const char* root = std::getenv("CAE_OUT_ROOT");
    if (root && *root && p.is_relative()) return fs::path(root) / p;
    return p;
}

fs::path prepare_run_dir(const std::string& dir, bool force) {
    if (dir.empty()) throw UsageError("an output directory is required (--out-dir or out_dir)");
    fs::path p = resolve_out(dir);
    if (fs::exists(p)) {
        if (!force)
            throw IoError("run directory already exists: " + p.string() +
                          " (pass --force to overwrite)");
        fs::remove_all(p);
    }
    fs::create_directories(p);
    return p;
}

RunConfig load_with_overrides(const std::string& config_path, int64_t seed_override,
                              const std::string& out_dir_override) {
    RunConfig cfg = load_config(config_path);
    if (seed_override >= 0) cfg.seed = uint64_t(seed_override);
    if (!out_dir_override.empty()) cfg.out_dir = out_dir_override;
    cfg.digest = Sha256::hex_of(cfg.canonical_json());
    return cfg;
}

std::vector<CategorySpec> categories_from(const RunConfig& cfg) {
    auto names = recipe_class_names(cfg.data.recipe, cfg.data.k);
    std::vector<CategorySpec> cats;
    for (int i = 0; i < cfg.data.k; ++i) cats.push_back({i, names[size_t(i)]});
    return cats;
}

int cmd_init_embeddings(const std::string& config_path, const std::string& out,
                        const std::string& provider_flag, const std::string& prompt_flag,
                        int64_t seed_override) {
    RunConfig cfg = load_with_overrides(config_path, seed_override, "");
    if (!provider_flag.empty()) cfg.embeddings.provider = provider_flag;
    if (!prompt_flag.empty()) {
        if (prompt_flag == "name")
            cfg.embeddings.prompt_mode = PromptMode::class_name;
        else if (prompt_flag == "index")
            cfg.embeddings.prompt_mode = PromptMode::class_index;
        else
            throw UsageError("--prompt-mode must be 'name' or 'index'");
    }
    auto cats = categories_from(cfg);
    CategoryEmbeddingSpace space;
    if (cfg.embeddings.provider == "stub") {
        auto provider = provider_stub(cfg.embeddings.provider_seed, cfg.embeddings.dim);
        // native width: the projection happens at training time
        space = init_embedding_space(cats, *provider, cfg.embeddings.prompt_mode,
                                     cfg.embeddings.dim, cfg.embeddings.projection_seed);
    } else if (cfg.embeddings.provider == "file") {
        space = ingest_embedding_file(cfg.embeddings.file, cats);
    } else {
        throw UsageError("--provider must be 'stub' or 'file'");
    }
    write_embedding_file(out, space.embeddings, cats);
    json j;
    j["out"] = out;
    j["k"] = space.k();
    j["dim"] = space.dim;
    j["provider_id"] = space.provider_id;
    std::cout << j.dump() << "\n";
    return 0;
}

int cmd_pretrain_teacher(const std::string& config_path, const std::string& out,
                         int64_t seed_override) {
    RunConfig cfg = load_with_overrides(config_path, seed_override, "");
    auto data = make_toy_dataset(cfg.data.recipe, cfg.data.k, cfg.data.per_class,
                                 cfg.data.test_per_class, cfg.seed);
    auto result = pretrain_teacher(data, cfg);
    save_checkpoint(result.teacher, out, uint32_t(result.epochs_run), cfg.seed);
    json j;
    j["out"] = out;
    j["test_accuracy"] = result.test_accuracy;
    j["epochs"] = result.epochs_run;
    std::cout << j.dump() << "\n";
    return 0;
}

int cmd_distill(const std::string& config_path, const std::string& teacher_path,
                const std::string& out_dir, int64_t seed_override, bool force) {
    RunConfig cfg = load_with_overrides(config_path, seed_override, out_dir);
    fs::path run_dir = prepare_run_dir(cfg.out_dir, force);

    CheckpointMeta meta;
    auto teacher = load_checkpoint(teacher_path, &meta, nullptr, "teacher-cnn-v1");
    if (meta.role != Role::teacher)
        throw ConfigError("checkpoint at " + teacher_path + " is not a teacher");
    auto* fc = dynamic_cast<Dense<float>*>(teacher.layers.back().get());
    if (fc && fc->out_dim_ != cfg.data.k)
        throw ConfigError("teacher has " + std::to_string(fc->out_dim_) +
                          " classes but data.k is " + std::to_string(cfg.data.k));

    save_resolved_config(cfg, (run_dir / "config.resolved.json").string());
    auto data = make_toy_dataset(cfg.data.recipe, cfg.data.k, cfg.data.per_class,
                                 cfg.data.test_per_class, cfg.seed);
    auto session = make_session(cfg, teacher);
    if (cfg.embeddings.strategy == EmbeddingStrategy::cend)
        write_embedding_file((run_dir / "embeddings.caee").string(), session.space.embeddings,
                             session.space.categories);

    DistillOutcome outcome;
    {
        MetricsWriter writer((run_dir / "metrics.jsonl").string(),
                             (run_dir / "timings.jsonl").string());
        outcome = run_distillation(session, data, &writer);
    }
    fs::create_directories(run_dir / "checkpoints");
    save_checkpoint(session.student, (run_dir / "checkpoints" / "student.caec").string(),
                    uint32_t(cfg.student.epochs), cfg.seed);
    save_checkpoint(session.head, (run_dir / "checkpoints" / "head.caec").string(),
                    uint32_t(cfg.student.epochs), cfg.seed);
    save_checkpoint(session.generator, (run_dir / "checkpoints" / "generator.caec").string(),
                    uint32_t(cfg.student.epochs), cfg.seed, &session.gen_opt);
    emit_report(outcome.records, run_dir.string());

    json j;
    j["run_dir"] = run_dir.string();
    j["final_accuracy"] = outcome.final_accuracy;
    j["epochs"] = cfg.student.epochs;
    j["config_digest"] = cfg.digest;
    std::cout << j.dump() << "\n";
    return 0;
}

int cmd_eval(const std::string& ckpt_path, const std::string& data_config,
             const std::string& split, int64_t seed_override) {
    RunConfig cfg = load_with_overrides(data_config, seed_override, "");
    auto data = make_toy_dataset(cfg.data.recipe, cfg.data.k, cfg.data.per_class,
                                 cfg.data.test_per_class, cfg.seed);
    auto net = load_checkpoint(ckpt_path);
    if (net.role != Role::teacher && net.role != Role::student)
        throw ConfigError("eval expects a teacher or student checkpoint");
    double acc = 0.0;
    if (split == "train")
        acc = evaluate_accuracy(net, data.train_images, data.train_labels);
    else if (split == "test")
        acc = evaluate_accuracy(net, data.test_images, data.test_labels);
    else
        throw UsageError("--split must be 'train' or 'test'");
    json j;
    j["ckpt"] = ckpt_path;
    j["split"] = split;
    j["accuracy"] = acc;
    std::cout << j.dump() << "\n";
    return 0;
}

int cmd_ablate(const std::string& plan_path, const std::string& out_dir, bool force) {
    auto plan = load_ablation_plan(plan_path);
    fs::path dir = prepare_run_dir(out_dir, force);
    auto report = run_ablation(plan, dir.string());
    json j;
    j["out_dir"] = dir.string();
    j["cells"] = report.cells.size();
    int failed = 0;
    for (const auto& c : report.cells)
        if (!c.ok) ++failed;
    j["failed_cells"] = failed;
    json means;
    for (const auto& [value, acc] : report.mean_accuracy) means[value] = acc;
    j["mean_accuracy"] = means;
    std::cout << j.dump() << "\n";
    return 0;
}

int cmd_report(const std::string& run_dir) {
    fs::path dir = resolve_out(run_dir);
    auto records = read_metrics_file((dir / "metrics.jsonl").string());
    if (records.empty()) throw IoError("no metrics records in " + dir.string());
    emit_report(records, dir.string());
    json j;
    j["run_dir"] = dir.string();
    j["records"] = records.size();
    j["final_accuracy"] = records.back().student_test_acc;
    std::cout << j.dump() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"category-aware embedding data-free distillation laboratory"};
    app.require_subcommand(1);

    std::string config_path, out_path, out_dir, teacher_path, ckpt_path, data_config;
    std::string provider_flag, prompt_flag, plan_path, run_dir, split = "test";
    int64_t seed_override = -1;
    bool force = false;

    auto* init_cmd = app.add_subcommand("init-embeddings", "build and export the category embedding file");
    init_cmd->add_option("--config", config_path, "run configuration file")->required();
    init_cmd->add_option("--out", out_path, "output embedding file")->required();
    init_cmd->add_option("--provider", provider_flag, "override provider: stub|file");
    init_cmd->add_option("--prompt-mode", prompt_flag, "override prompt mode: name|index");
    init_cmd->add_option("--seed", seed_override, "override config seed");

    auto* pre_cmd = app.add_subcommand("pretrain-teacher", "train the frozen teacher on the toy dataset");
    pre_cmd->add_option("--config", config_path, "run configuration file")->required();
    pre_cmd->add_option("--out", out_path, "output checkpoint path")->required();
    pre_cmd->add_option("--seed", seed_override, "override config seed");

    auto* dist_cmd = app.add_subcommand("distill", "run the full data-free distillation loop");
    dist_cmd->add_option("--config", config_path, "run configuration file")->required();
    dist_cmd->add_option("--teacher", teacher_path, "pretrained teacher checkpoint")->required();
    dist_cmd->add_option("--out-dir", out_dir, "run directory");
    dist_cmd->add_option("--seed", seed_override, "override config seed");
    dist_cmd->add_flag("--force", force, "replace an existing run directory");

    auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on the toy dataset");
    eval_cmd->add_option("--ckpt", ckpt_path, "teacher or student checkpoint")->required();
    eval_cmd->add_option("--data", data_config, "config file defining the dataset")->required();
    eval_cmd->add_option("--split", split, "train|test (default test)");
    eval_cmd->add_option("--seed", seed_override, "override config seed");

    auto* abl_cmd = app.add_subcommand("ablate", "run an ablation sweep from a plan file");
    abl_cmd->add_option("--plan", plan_path, "ablation plan file")->required();
    abl_cmd->add_option("--out-dir", out_dir, "report directory")->required();
    abl_cmd->add_flag("--force", force, "replace an existing report directory");

    auto* rep_cmd = app.add_subcommand("report", "regenerate summary and plots for a run directory");
    rep_cmd->add_option("--run-dir", run_dir, "existing run directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        std::cerr << "error: usage: " << e.what() << "\n";
        return 2;
    }

    try {
        if (init_cmd->parsed())
            return cmd_init_embeddings(config_path, out_path, provider_flag, prompt_flag,
                                       seed_override);
        if (pre_cmd->parsed()) return cmd_pretrain_teacher(config_path, out_path, seed_override);
        if (dist_cmd->parsed())
            return cmd_distill(config_path, teacher_path, out_dir, seed_override, force);
        if (eval_cmd->parsed()) return cmd_eval(ckpt_path, data_config, split, seed_override);
        if (abl_cmd->parsed()) return cmd_ablate(plan_path, out_dir, force);
        if (rep_cmd->parsed()) return cmd_report(run_dir);
    } catch (const UsageError& e) {
        std::cerr << "error: usage: " << e.what() << "\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "error: config: " << e.what() << "\n";
        return 3;
    } catch (const IoError& e) {
        std::cerr << "error: io: " << e.what() << "\n";
        return 4;
    } catch (const NumericError& e) {
        std::cerr << "error: numeric: " << e.what() << "\n";
        return 5;
    } catch (const std::exception& e) {
        std::cerr << "error: internal: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
