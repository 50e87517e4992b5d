#include "cae/distill.hpp"

#include <chrono>

namespace cae {

namespace {

// stream tags for derived seeds
constexpr uint64_t kTagDiffuse = 0xD1FFull;
constexpr uint64_t kTagGaussianInput = 0xBA5Eull;
constexpr uint64_t kTagSample = 0x5A3Bull;
constexpr uint64_t kTagPairs = 0xC4C1ull;
constexpr uint64_t kTagShuffle = 0x5F1Eull;

std::vector<CategorySpec> categories_for(const RunConfig& cfg) {
    auto names = recipe_class_names(cfg.data.recipe, cfg.data.k);
    std::vector<CategorySpec> cats;
    for (int i = 0; i < cfg.data.k; ++i) cats.push_back({i, names[size_t(i)]});
    return cats;
}

}  // namespace

DistillSession make_session(const RunConfig& cfg, Network<float>& teacher) {
    if (teacher.role != Role::teacher) throw ConfigError("session requires a teacher-role network");
    teacher.frozen = true;

    DistillSession s;
    s.cfg = cfg;
    s.teacher = &teacher;
    s.student = make_student<float>(cfg.data.k);
    init_params(s.student, mix_seed({cfg.seed, 0x57ull}));
    s.head = make_projection_head<float>(feature_width(s.student), 64);
    init_params(s.head, mix_seed({cfg.seed, 0x58ull}));
    s.generator = make_generator<float>(cfg.embeddings.gen_dim);
    init_params(s.generator, mix_seed({cfg.seed, 0x59ull}));
    s.bank = MemoryBank(size_t(cfg.generator.bank_capacity));
    s.gen_opt = Adam(float(cfg.generator.lr));
    s.student_opt = Sgd(float(cfg.student.lr), float(cfg.student.momentum));
    s.head_opt = Sgd(float(cfg.student.lr), float(cfg.student.momentum));

    if (cfg.embeddings.strategy == EmbeddingStrategy::cend) {
        auto cats = categories_for(cfg);
        if (cfg.embeddings.provider == "stub") {
            auto provider = provider_stub(cfg.embeddings.provider_seed, cfg.embeddings.dim);
            s.space = init_embedding_space(cats, *provider, cfg.embeddings.prompt_mode,
                                           cfg.embeddings.gen_dim, cfg.embeddings.projection_seed);
        } else {
            auto native = ingest_embedding_file(cfg.embeddings.file, cats);
            native.prompt_mode = cfg.embeddings.prompt_mode;
            s.space = project_space(native, cfg.embeddings.gen_dim, cfg.embeddings.projection_seed);
        }
        s.sources = cfg.resolve_sources(s.space.embeddings);
    } else {
        // Unstructured baseline: sources only determine the batch layout.
        s.sources = default_noise_sources(cfg.cend.sources.empty() ? cfg.cend.n
                                                                   : int(cfg.cend.sources.size()),
                                          0.0f);
    }
    return s;
}

EmbeddingBatch make_embedding_batch(const DistillSession& s, int64_t step) {
    const int k = s.cfg.data.k;
    const int n = int(s.sources.size());
    const int d = s.cfg.embeddings.gen_dim;
    EmbeddingBatch batch;
    batch.rows = Tensor<float>({k * (1 + n), d});
    batch.labels.resize(size_t(k) * (1 + n));
    batch.provenance.resize(size_t(k) * (1 + n));

    if (s.cfg.embeddings.strategy == EmbeddingStrategy::cend) {
        const auto diffused =
            cend_diffuse(s.space, s.sources, mix_seed({s.cfg.seed, kTagDiffuse, uint64_t(step)}));
        int row = 0;
        for (int ki = 0; ki < k; ++ki) {
            std::copy(s.space.embeddings.ptr() + int64_t(ki) * d,
                      s.space.embeddings.ptr() + int64_t(ki + 1) * d,
                      batch.rows.ptr() + int64_t(row) * d);
            batch.labels[size_t(row)] = ki;
            batch.provenance[size_t(row)] = kProvenanceAnchor;
            ++row;
            for (int ni = 0; ni < n; ++ni) {
                std::copy(diffused.row(ki, ni), diffused.row(ki, ni) + d,
                          batch.rows.ptr() + int64_t(row) * d);
                batch.labels[size_t(row)] = ki;
                batch.provenance[size_t(row)] = ni;
                ++row;
            }
        }
    } else {
        Rng rng(mix_seed({s.cfg.seed, kTagGaussianInput, uint64_t(step)}));
        int row = 0;
        for (int ki = 0; ki < k; ++ki) {
            for (int j = 0; j < 1 + n; ++j) {
                float* p = batch.rows.ptr() + int64_t(row) * d;
                for (int i = 0; i < d; ++i) p[i] = float(rng.gaussian(0.0, 1.0));
                batch.labels[size_t(row)] = ki;
                batch.provenance[size_t(row)] = kProvenanceAnchor;
                ++row;
            }
        }
    }
    return batch;
}

GeneratorLossBreakdown generator_step(DistillSession& s, double lr) {
    auto& teacher = *s.teacher;
    auto batch = make_embedding_batch(s, s.gen_steps_done);

    Tensor<float> images = s.generator.forward(batch.rows, Mode::train);

    // Teacher pass in eval mode, recording batch statistics for the BN loss.
    teacher.set_bn_recording(true);
    Tensor<float> t_logits = teacher.forward(images, Mode::eval);
    teacher.set_bn_recording(false);

    Tensor<float> s_logits = s.student.forward(images, Mode::eval);

    GeneratorLossBreakdown out;
    out.lambda_bn = s.cfg.generator.lambda_bn;
    out.lambda_adv = s.cfg.generator.lambda_adv;

    Tensor<float> d_t_ce;
    out.l_ce = ce_loss(t_logits, batch.labels, &d_t_ce);

    auto batch_stats = bn_batch_stats(teacher);
    auto running_stats = bn_running_stats(teacher);
    std::vector<std::vector<float>> dmean, dvar;
    out.l_bn = bn_loss(batch_stats, running_stats, &dmean, &dvar);

    Tensor<float> d_s_adv, d_t_adv;
    out.l_adv = adv_loss(s_logits, t_logits, &d_s_adv, &d_t_adv);

    out.total = out.l_ce + out.lambda_bn * out.l_bn + out.lambda_adv * out.l_adv;
    if (!std::isfinite(out.total))
        throw NumericError("generator loss non-finite: l_ce=" + std::to_string(out.l_ce) +
                           " l_bn=" + std::to_string(out.l_bn) +
                           " l_adv=" + std::to_string(out.l_adv));

    // dL/d(teacher logits) = dCE + lambda_adv * dADV; BN loss enters through
    // the recorded statistics.
    Tensor<float> d_t(t_logits.shape);
    for (int64_t i = 0; i < d_t.numel(); ++i)
        d_t[i] = d_t_ce[i] + float(out.lambda_adv) * d_t_adv[i];
    auto bns = teacher.bn_layers();
    for (size_t l = 0; l < bns.size(); ++l) {
        for (auto& v : dmean[l]) v *= float(out.lambda_bn);
        for (auto& v : dvar[l]) v *= float(out.lambda_bn);
        bns[l]->set_ext_stat_grads(dmean[l], dvar[l]);
    }
    teacher.set_accum_param_grads(false);
    Tensor<float> dx_teacher = teacher.backward(d_t);

    Tensor<float> d_s(s_logits.shape);
    for (int64_t i = 0; i < d_s.numel(); ++i) d_s[i] = float(out.lambda_adv) * d_s_adv[i];
    s.student.set_accum_param_grads(false);
    Tensor<float> dx_student = s.student.backward(d_s);
    s.student.set_accum_param_grads(true);

    Tensor<float> d_images(images.shape);
    for (int64_t i = 0; i < d_images.numel(); ++i) d_images[i] = dx_teacher[i] + dx_student[i];

    s.generator.zero_grad();
    s.generator.backward(d_images);
    s.gen_opt.set_lr(float(lr));
    s.gen_opt.step(s.generator.params());

    s.bank.write({std::move(images), batch.labels, batch.provenance, s.gen_steps_done});
    ++s.gen_steps_done;
    return out;
}

ContrastivePairSet<float> build_pairs(DistillSession& s, const DiffusedEmbeddingSet& diffused) {
    const int k = s.space.k();
    if (k < 2) throw ConfigError("contrastive training requires >= 2 categories");
    const int n = diffused.n(), d = diffused.d();
    const int rows_per = 1 + n;

    Tensor<float> embeds({k * rows_per, d});
    ContrastivePairSet<float> pairs;
    pairs.row_category.resize(size_t(k) * rows_per);
    pairs.row_source.resize(size_t(k) * rows_per);
    int row = 0;
    for (int ki = 0; ki < k; ++ki) {
        std::copy(s.space.embeddings.ptr() + int64_t(ki) * d,
                  s.space.embeddings.ptr() + int64_t(ki + 1) * d, embeds.ptr() + int64_t(row) * d);
        pairs.row_category[size_t(row)] = ki;
        pairs.row_source[size_t(row)] = kProvenanceAnchor;
        ++row;
        for (int ni = 0; ni < n; ++ni) {
            std::copy(diffused.row(ki, ni), diffused.row(ki, ni) + d,
                      embeds.ptr() + int64_t(row) * d);
            pairs.row_category[size_t(row)] = ki;
            pairs.row_source[size_t(row)] = ni;
            ++row;
        }
    }

    Tensor<float> images = generate(s.generator, embeds, Mode::eval);
    pairs.features = student_features(s.student, s.head, images, Mode::eval);

    for (int ki = 0; ki < k; ++ki) {
        ContrastivePairSet<float>::Entry e;
        e.category = ki;
        e.anchor_row = ki * rows_per;
        for (int ni = 0; ni < n; ++ni) e.positive_rows.push_back(ki * rows_per + 1 + ni);
        for (int other = 0; other < k; ++other) {
            if (other == ki) continue;
            if (s.cfg.student.negatives_include_anchors)
                e.negative_rows.push_back(other * rows_per);
            for (int ni = 0; ni < n; ++ni) e.negative_rows.push_back(other * rows_per + 1 + ni);
        }
        pairs.entries.push_back(std::move(e));
    }
    pairs.validate();
    return pairs;
}

StudentLossBreakdown student_step(DistillSession& s, double lr) {
    auto& teacher = *s.teacher;
    StudentLossBreakdown out;
    out.alpha = s.cfg.student.alpha;

    SyntheticBatch mem = s.bank.sample(
        s.cfg.student.batch_size, mix_seed({s.cfg.seed, kTagSample, uint64_t(s.student_steps_done)}));
    Tensor<float> t_logits = teacher.forward(mem.images, Mode::eval);
    Tensor<float> s_logits = s.student.forward(mem.images, Mode::train);

    Tensor<float> d_s;
    out.l_kl = kl_distill_loss(s_logits, t_logits, float(s.cfg.student.t_kd), &d_s);

    s.student.zero_grad();
    s.head.zero_grad();
    s.student.backward(d_s);

    if (out.alpha > 0.0) {
        const auto diffused = cend_diffuse(
            s.space, s.sources, mix_seed({s.cfg.seed, kTagPairs, uint64_t(s.student_steps_done)}));
        auto pairs = build_pairs(s, diffused);
        Tensor<float> d_feat;
        out.l_cncl = cncl_loss(pairs, float(s.cfg.student.tau), &d_feat);
        for (auto& v : d_feat.data) v *= float(out.alpha);
        Tensor<float> d_head_in = s.head.backward(d_feat);
        s.student.backward_features(d_head_in);
    }

    out.total = out.l_kl + out.alpha * out.l_cncl;
    if (!std::isfinite(out.total))
        throw NumericError("student loss non-finite: l_kl=" + std::to_string(out.l_kl) +
                           " l_cncl=" + std::to_string(out.l_cncl));

    s.student_opt.set_lr(float(lr));
    s.student_opt.step(s.student.params());
    s.head_opt.set_lr(float(lr));
    s.head_opt.step(s.head.params());
    ++s.student_steps_done;
    return out;
}

double evaluate_accuracy(Network<float>& net, const Tensor<float>& images,
                         const std::vector<int>& labels) {
    const int n = images.dim(0);
    if (n == 0) throw ConfigError("evaluate_accuracy: empty split");
    const int chunk = 128;
    int correct = 0;
    for (int lo = 0; lo < n; lo += chunk) {
        const int hi = std::min(n, lo + chunk);
        Tensor<float> part({hi - lo, images.dim(1), images.dim(2), images.dim(3)});
        std::copy(images.ptr() + int64_t(lo) * images.numel() / n,
                  images.ptr() + int64_t(hi) * images.numel() / n, part.ptr());
        Tensor<float> logits = forward_logits(net, part, Mode::eval);
        const int k = logits.dim(1);
        for (int b = 0; b < hi - lo; ++b) {
            int arg = 0;
            for (int i = 1; i < k; ++i)
                if (logits.at2(b, i) > logits.at2(b, arg)) arg = i;
            if (arg == labels[size_t(lo + b)]) ++correct;
        }
    }
    return double(correct) / double(n);
}

std::vector<double> low_confidence_from_logits(const Tensor<float>& logits,
                                               const std::vector<int>& labels, double threshold,
                                               int k) {
    if (!(threshold > 0.0 && threshold < 1.0))
        throw ConfigError("low-confidence threshold must be in (0,1)");
    const int n = logits.dim(0), classes = logits.dim(1);
    std::vector<int64_t> total(size_t(k), 0), low(size_t(k), 0);
    Tensor<float> probs(logits.shape);
    softmax_rows(logits, probs);
    const float thr = float(threshold);  // boundary is inclusive at float precision
    for (int b = 0; b < n; ++b) {
        float maxp = 0.0f;
        for (int i = 0; i < classes; ++i) maxp = std::max(maxp, probs.at2(b, i));
        const int lab = labels[size_t(b)];
        if (lab < 0 || lab >= k) throw ConfigError("low_confidence: label out of range");
        ++total[size_t(lab)];
        if (maxp <= thr) ++low[size_t(lab)];
    }
    std::vector<double> out(size_t(k), 0.0);
    for (int i = 0; i < k; ++i)
        if (total[size_t(i)] > 0) out[size_t(i)] = double(low[size_t(i)]) / double(total[size_t(i)]);
    return out;
}

std::vector<double> low_confidence_profile(Network<float>& teacher, const MemoryBank& bank,
                                           double threshold, size_t max_recent_images) {
    if (bank.empty()) throw ConfigError("low_confidence_profile: memory bank is empty");
    auto* fc = dynamic_cast<Dense<float>*>(teacher.layers.back().get());
    const int k = fc ? fc->out_dim_ : 0;
    std::vector<int64_t> total(size_t(k), 0), low(size_t(k), 0);
    const float thr = float(threshold);
    size_t skip = 0;
    if (max_recent_images > 0 && bank.size_images() > max_recent_images) {
        size_t covered = 0, keep = 0;
        for (auto it = bank.entries().rbegin(); it != bank.entries().rend(); ++it) {
            ++keep;
            covered += size_t(it->size());
            if (covered >= max_recent_images) break;
        }
        skip = bank.batch_count() - keep;
    }
    size_t index = 0;
    for (const auto& e : bank.entries()) {
        if (index++ < skip) continue;
        Tensor<float> logits = teacher.forward(e.images, Mode::eval);
        Tensor<float> probs(logits.shape);
        softmax_rows(logits, probs);
        for (int b = 0; b < logits.dim(0); ++b) {
            float maxp = 0.0f;
            for (int i = 0; i < logits.dim(1); ++i) maxp = std::max(maxp, probs.at2(b, i));
            ++total[size_t(e.labels[size_t(b)])];
            if (maxp <= thr) ++low[size_t(e.labels[size_t(b)])];
        }
    }
    std::vector<double> out(size_t(k), 0.0);
    for (int i = 0; i < k; ++i)
        if (total[size_t(i)] > 0) out[size_t(i)] = double(low[size_t(i)]) / double(total[size_t(i)]);
    return out;
}

PretrainResult pretrain_teacher(const ToyDataset& data, const RunConfig& cfg) {
    PretrainResult result;
    result.teacher = make_teacher<float>(data.k);
    init_params(result.teacher, mix_seed({cfg.seed, 0x7EAC4ull}));
    auto& net = result.teacher;

    Adam opt(float(cfg.teacher.lr));
    const int n = data.train_images.dim(0);
    const int bs = cfg.teacher.batch_size;
    const int64_t img_elems = 3LL * 32 * 32;
    const double stop_at = std::min(1.0, cfg.teacher.accuracy_floor + 0.01);

    std::vector<int> order(static_cast<size_t>(n), 0);
    for (int i = 0; i < n; ++i) order[size_t(i)] = i;

    double best = 0.0;
    for (int epoch = 0; epoch < cfg.teacher.epochs; ++epoch) {
        // deterministic shuffle
        Rng rng(mix_seed({cfg.seed, kTagShuffle, uint64_t(epoch)}));
        for (int i = n - 1; i > 0; --i)
            std::swap(order[size_t(i)], order[size_t(rng.below(uint64_t(i + 1)))]);

        ScheduleState sched{cfg.teacher.lr, cfg.teacher.lr * 0.01, epoch, cfg.teacher.epochs};
        opt.set_lr(float(cosine_lr(sched)));

        for (int lo = 0; lo < n; lo += bs) {
            const int hi = std::min(n, lo + bs);
            Tensor<float> batch({hi - lo, 3, 32, 32});
            std::vector<int> labels(size_t(hi - lo));
            for (int i = lo; i < hi; ++i) {
                const int src = order[size_t(i)];
                std::copy(data.train_images.ptr() + src * img_elems,
                          data.train_images.ptr() + (src + 1) * img_elems,
                          batch.ptr() + int64_t(i - lo) * img_elems);
                labels[size_t(i - lo)] = data.train_labels[size_t(src)];
            }
            Tensor<float> logits = net.forward(batch, Mode::train);
            Tensor<float> d;
            ce_loss(logits, labels, &d);
            net.zero_grad();
            net.backward(d);
            opt.step(net.params());
        }
        result.epochs_run = epoch + 1;
        const double acc = evaluate_accuracy(net, data.test_images, data.test_labels);
        best = std::max(best, acc);
        result.test_accuracy = acc;
        if (acc >= stop_at) break;
    }
    if (best < cfg.teacher.accuracy_floor)
        throw NumericError("teacher underfit: held-out accuracy " + std::to_string(best) +
                           " below floor " + std::to_string(cfg.teacher.accuracy_floor) + " after " +
                           std::to_string(result.epochs_run) + " epochs");
    net.frozen = true;
    return result;
}

DistillOutcome run_distillation(DistillSession& s, const ToyDataset& data, MetricsWriter* writer,
                                const std::function<bool(const MetricsRecord&)>& on_epoch) {
    DistillOutcome out;
    using Clock = std::chrono::steady_clock;
    const int epochs = s.cfg.student.epochs;
    for (int epoch = 0; epoch < epochs; ++epoch) {
        const auto t0 = Clock::now();
        ScheduleState gs{s.cfg.generator.lr, s.cfg.schedule.min_lr, epoch, epochs};
        ScheduleState ss{s.cfg.student.lr, s.cfg.schedule.min_lr, epoch, epochs};
        const double lr_g = cosine_lr(gs);
        const double lr_s = cosine_lr(ss);

        MetricsRecord rec;
        rec.epoch = epoch;
        rec.lr_generator = lr_g;
        rec.lr_student = lr_s;

        for (int g = 0; g < s.cfg.student.g_steps; ++g) {
            auto b = generator_step(s, lr_g);
            rec.l_ce += b.l_ce / s.cfg.student.g_steps;
            rec.l_bn += b.l_bn / s.cfg.student.g_steps;
            rec.l_adv += b.l_adv / s.cfg.student.g_steps;
            rec.l_g_total += b.total / s.cfg.student.g_steps;
        }
        for (int st = 0; st < s.cfg.student.s_steps; ++st) {
            auto b = student_step(s, lr_s);
            rec.l_kl += b.l_kl / s.cfg.student.s_steps;
            rec.l_cncl += b.l_cncl / s.cfg.student.s_steps;
            rec.l_s_total += b.total / s.cfg.student.s_steps;
        }

        rec.student_test_acc = evaluate_accuracy(s.student, data.test_images, data.test_labels);
        rec.low_conf = low_confidence_profile(*s.teacher, s.bank, 0.1, 1024);
        rec.epoch_seconds = std::chrono::duration<double>(Clock::now() - t0).count();

        if (writer) writer->append(rec);
        out.records.push_back(rec);
        out.final_accuracy = rec.student_test_acc;
        if (on_epoch && !on_epoch(rec)) break;
    }
    return out;
}

}  // namespace cae
