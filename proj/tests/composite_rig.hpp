#pragma once

// Double-precision harness for finite-difference checks of the composite
// generator and student objectives. Mirrors the float training composition
// through the same templated primitives.

#include <vector>

#include "cae/grad_check.hpp"
#include "cae/losses.hpp"
#include "cae/nets.hpp"

namespace cae::testrig {

struct GeneratorObjectiveRig {
    Network<double> teacher;
    Network<double> student;
    Network<double> generator;
    Tensor<double> embed_rows;
    std::vector<int> labels;
    double lambda_bn = 1.0;
    double lambda_adv = 1.0;

    static GeneratorObjectiveRig make(uint64_t seed, int k = 3, int gen_dim = 16) {
        GeneratorObjectiveRig rig;
        rig.teacher = make_teacher<double>(k);
        rig.student = make_student<double>(k);
        rig.generator = make_generator<double>(gen_dim);
        init_params(rig.teacher, mix_seed({seed, 1}));
        init_params(rig.student, mix_seed({seed, 2}));
        init_params(rig.generator, mix_seed({seed, 3}));
        rig.teacher.set_bn_update_running(false);
        rig.student.set_bn_update_running(false);
        rig.generator.set_bn_update_running(false);
        Rng rng(mix_seed({seed, 4}));
        for (auto* bn : rig.teacher.bn_layers()) {
            for (auto& v : bn->running_mean.data) v = rng.uniform(-0.2, 0.2);
            for (auto& v : bn->running_var.data) v = rng.uniform(0.6, 1.4);
        }
        const int b = 2 * k;
        rig.embed_rows = Tensor<double>({b, gen_dim});
        for (auto& v : rig.embed_rows.data) v = rng.gaussian(0.0, 1.0);
        for (int i = 0; i < b; ++i) rig.labels.push_back(i % k);
        return rig;
    }

    double value_and_grad(const std::vector<double>& theta_g, std::vector<double>* grads) {
        generator.load_flat_params(theta_g);
        Tensor<double> images = generator.forward(embed_rows, Mode::train);
        teacher.set_bn_recording(true);
        Tensor<double> t_logits = teacher.forward(images, Mode::eval);
        teacher.set_bn_recording(false);
        Tensor<double> s_logits = student.forward(images, Mode::eval);

        Tensor<double> d_t_ce;
        const double l_ce = ce_loss(t_logits, labels, grads ? &d_t_ce : nullptr);
        auto batch = bn_batch_stats(teacher);
        auto running = bn_running_stats(teacher);
        std::vector<std::vector<double>> dmean, dvar;
        const double l_bn =
            bn_loss(batch, running, grads ? &dmean : nullptr, grads ? &dvar : nullptr);
        Tensor<double> d_s_adv, d_t_adv;
        const double l_adv = adv_loss(s_logits, t_logits, grads ? &d_s_adv : nullptr,
                                      grads ? &d_t_adv : nullptr);
        const double total = l_ce + lambda_bn * l_bn + lambda_adv * l_adv;
        if (!grads) return total;

        Tensor<double> d_t(t_logits.shape);
        for (int64_t i = 0; i < d_t.numel(); ++i) d_t[i] = d_t_ce[i] + lambda_adv * d_t_adv[i];
        auto bns = teacher.bn_layers();
        for (size_t l = 0; l < bns.size(); ++l) {
            for (auto& v : dmean[l]) v *= lambda_bn;
            for (auto& v : dvar[l]) v *= lambda_bn;
            bns[l]->set_ext_stat_grads(dmean[l], dvar[l]);
        }
        teacher.set_accum_param_grads(false);
        Tensor<double> dx_t = teacher.backward(d_t);
        Tensor<double> d_s(s_logits.shape);
        for (int64_t i = 0; i < d_s.numel(); ++i) d_s[i] = lambda_adv * d_s_adv[i];
        student.set_accum_param_grads(false);
        Tensor<double> dx_s = student.backward(d_s);

        Tensor<double> d_images(images.shape);
        for (int64_t i = 0; i < d_images.numel(); ++i) d_images[i] = dx_t[i] + dx_s[i];
        generator.zero_grad();
        generator.backward(d_images);
        *grads = generator.flatten_grads();
        return total;
    }

    double max_grad_error(uint64_t probe_seed) {
        auto x0 = generator.flatten_params();
        auto value = [&](const std::vector<double>& p) {
            return const_cast<GeneratorObjectiveRig*>(this)->value_and_grad(p, nullptr);
        };
        auto grad = [&](const std::vector<double>& p) {
            std::vector<double> g;
            value_and_grad(p, &g);
            return g;
        };
        return grad_check(value, grad, x0, {16, 1e-3, probe_seed});
    }
};

struct StudentObjectiveRig {
    Network<double> teacher;
    Network<double> student;
    Network<double> head;
    Tensor<double> mem_images;
    Tensor<double> t_logits;  // fixed teacher outputs on mem_images
    Tensor<double> pair_images;
    // pair bookkeeping (row categories / entries) mirrors build_pairs
    ContrastivePairSet<double> pair_template;
    double t_kd = 4.0;
    double tau = 0.1;
    double alpha = 1.0;
    size_t student_param_count = 0;

    static StudentObjectiveRig make(uint64_t seed, int k = 3, int n_sources = 2) {
        StudentObjectiveRig rig;
        rig.teacher = make_teacher<double>(k);
        rig.student = make_student<double>(k);
        rig.head = make_projection_head<double>(feature_width(rig.student), 64);
        init_params(rig.teacher, mix_seed({seed, 11}));
        init_params(rig.student, mix_seed({seed, 12}));
        init_params(rig.head, mix_seed({seed, 13}));
        rig.teacher.set_bn_update_running(false);
        rig.student.set_bn_update_running(false);

        Rng rng(mix_seed({seed, 14}));
        rig.mem_images = Tensor<double>({2 * k, 3, 32, 32});
        for (auto& v : rig.mem_images.data) v = rng.uniform(-1.0, 1.0);
        rig.t_logits = rig.teacher.forward(rig.mem_images, Mode::eval);

        const int rows_per = 1 + n_sources;
        rig.pair_images = Tensor<double>({k * rows_per, 3, 32, 32});
        for (auto& v : rig.pair_images.data) v = rng.uniform(-1.0, 1.0);
        auto& pt = rig.pair_template;
        pt.row_category.resize(size_t(k) * rows_per);
        pt.row_source.resize(size_t(k) * rows_per);
        for (int ki = 0; ki < k; ++ki) {
            for (int r = 0; r < rows_per; ++r) {
                pt.row_category[size_t(ki * rows_per + r)] = ki;
                pt.row_source[size_t(ki * rows_per + r)] = r - 1;
            }
            ContrastivePairSet<double>::Entry e;
            e.category = ki;
            e.anchor_row = ki * rows_per;
            for (int ni = 0; ni < n_sources; ++ni) e.positive_rows.push_back(ki * rows_per + 1 + ni);
            for (int other = 0; other < k; ++other) {
                if (other == ki) continue;
                for (int r = 0; r < rows_per; ++r) e.negative_rows.push_back(other * rows_per + r);
            }
            pt.entries.push_back(e);
        }
        rig.student_param_count = size_t(rig.student.param_count());
        return rig;
    }

    void load(const std::vector<double>& theta) {
        std::vector<double> s(theta.begin(), theta.begin() + std::ptrdiff_t(student_param_count));
        std::vector<double> h(theta.begin() + std::ptrdiff_t(student_param_count), theta.end());
        student.load_flat_params(s);
        head.load_flat_params(h);
    }

    std::vector<double> flat_params() {
        auto s = student.flatten_params();
        auto h = head.flatten_params();
        s.insert(s.end(), h.begin(), h.end());
        return s;
    }

    double value_and_grad(const std::vector<double>& theta, std::vector<double>* grads) {
        load(theta);
        Tensor<double> s_logits = student.forward(mem_images, Mode::train);
        Tensor<double> d_s;
        const double l_kl =
            kl_distill_loss(s_logits, t_logits, t_kd, grads ? &d_s : nullptr);
        if (grads) {
            student.zero_grad();
            head.zero_grad();
            student.backward(d_s);
        }
        Tensor<double> feat_in = student.forward_features(pair_images, Mode::eval);
        Tensor<double> features = head.forward(feat_in, Mode::eval);
        auto pairs = pair_template;
        pairs.features = features;
        Tensor<double> d_feat;
        const double l_cncl = cncl_loss(pairs, tau, grads ? &d_feat : nullptr);
        const double total = l_kl + alpha * l_cncl;
        if (!grads) return total;

        for (auto& v : d_feat.data) v *= alpha;
        Tensor<double> d_head_in = head.backward(d_feat);
        student.backward_features(d_head_in);
        *grads = student.flatten_grads();
        auto hg = head.flatten_grads();
        grads->insert(grads->end(), hg.begin(), hg.end());
        return total;
    }

    double max_grad_error(uint64_t probe_seed) {
        auto x0 = flat_params();
        auto value = [&](const std::vector<double>& p) { return value_and_grad(p, nullptr); };
        auto grad = [&](const std::vector<double>& p) {
            std::vector<double> g;
            value_and_grad(p, &g);
            return g;
        };
        return grad_check(value, grad, x0, {16, 1e-3, probe_seed});
    }
};

}  // namespace cae::testrig
