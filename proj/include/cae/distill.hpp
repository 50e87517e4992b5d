#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cae/config.hpp"
#include "cae/dataset.hpp"
#include "cae/losses.hpp"
#include "cae/memory_bank.hpp"
#include "cae/metrics.hpp"
#include "cae/nets.hpp"
#include "cae/optim.hpp"

namespace cae {

struct GeneratorLossBreakdown {
    double l_ce = 0.0;
    double l_bn = 0.0;
    double l_adv = 0.0;
    double total = 0.0;
    double lambda_bn = 0.0;
    double lambda_adv = 0.0;
};

struct StudentLossBreakdown {
    double l_kl = 0.0;
    double l_cncl = 0.0;
    double total = 0.0;
    double alpha = 0.0;
};

// Everything one distillation run owns. The teacher is frozen on entry.
struct DistillSession {
    RunConfig cfg;
    Network<float>* teacher = nullptr;  // borrowed, frozen
    Network<float> student;
    Network<float> head;
    Network<float> generator;
    CategoryEmbeddingSpace space;  // unused under the gaussian strategy
    std::vector<NoiseSourceSpec> sources;
    MemoryBank bank{1};
    Adam gen_opt;
    Sgd student_opt;
    Sgd head_opt;
    int64_t gen_steps_done = 0;
    int64_t student_steps_done = 0;
};

// Builds student/head/generator, resolves the embedding space (provider stub,
// file ingestion, or gaussian baseline) and noise sources.
DistillSession make_session(const RunConfig& cfg, Network<float>& teacher);

// The per-step embedding batch: every category once as anchor plus one fresh
// diffused draw per source (K * (1 + N) rows). Under the gaussian strategy
// all rows are fresh unstructured draws with slot labels.
struct EmbeddingBatch {
    Tensor<float> rows;  // B x gen_dim
    std::vector<int> labels;
    std::vector<int> provenance;  // kProvenanceAnchor or source index
};
EmbeddingBatch make_embedding_batch(const DistillSession& s, int64_t step);

// One Adam update on the generator only; appends the generated batch to the
// memory bank. Teacher and student parameters are untouched.
GeneratorLossBreakdown generator_step(DistillSession& s, double lr);

// Anchor/positive/negative features for the contrastive loss, computed via
// the student projection head on freshly generated images. Layer caches stay
// valid for an immediate backward pass.
ContrastivePairSet<float> build_pairs(DistillSession& s, const DiffusedEmbeddingSet& diffused);

// One SGD update on the student and projection head: distillation KL on a
// memory sample plus alpha * contrastive loss on fresh pairs.
StudentLossBreakdown student_step(DistillSession& s, double lr);

// Trains the teacher on the toy dataset with Adam and a cosine schedule,
// stopping once held-out accuracy clears the configured floor. Throws
// "teacher underfit" when the floor is unreachable within the epoch budget.
struct PretrainResult {
    Network<float> teacher;
    double test_accuracy = 0.0;
    int epochs_run = 0;
};
PretrainResult pretrain_teacher(const ToyDataset& data, const RunConfig& cfg);

double evaluate_accuracy(Network<float>& net, const Tensor<float>& images,
                         const std::vector<int>& labels);

// Per-category fraction of bank images whose teacher max-softmax is <=
// threshold (boundary inclusive). Categories absent from the bank report 0.
// max_recent_images > 0 restricts the scan to the newest whole batches
// covering at least that many images (the training loop uses a bounded
// window so the per-epoch diagnostic cost stays flat).
std::vector<double> low_confidence_profile(Network<float>& teacher, const MemoryBank& bank,
                                           double threshold, size_t max_recent_images = 0);
std::vector<double> low_confidence_from_logits(const Tensor<float>& logits,
                                               const std::vector<int>& labels, double threshold,
                                               int k);

// Full alternating loop; optionally streams metrics and invokes a per-epoch
// callback (used by the efficiency harness).
struct DistillOutcome {
    std::vector<MetricsRecord> records;
    double final_accuracy = 0.0;
};
DistillOutcome run_distillation(
    DistillSession& s, const ToyDataset& data, MetricsWriter* writer = nullptr,
    const std::function<bool(const MetricsRecord&)>& on_epoch = nullptr);

}  // namespace cae
