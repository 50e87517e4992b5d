#pragma once

#include <string>
#include <vector>

#include "cae/common.hpp"

namespace cae {

// One row per epoch. epoch_seconds is the only nondeterministic field; the
// metrics stream keeps it in a separate timings file so identical-seed runs
// produce byte-identical metrics.jsonl.
struct MetricsRecord {
    int epoch = 0;
    double lr_generator = 0.0;
    double lr_student = 0.0;
    double l_ce = 0.0;
    double l_bn = 0.0;
    double l_adv = 0.0;
    double l_g_total = 0.0;
    double l_kl = 0.0;
    double l_cncl = 0.0;
    double l_s_total = 0.0;
    double student_test_acc = 0.0;
    std::vector<double> low_conf;  // per-category proportion
    double epoch_seconds = 0.0;

    void validate(int prev_epoch) const;
    std::string to_json_line() const;          // deterministic fields only
    static MetricsRecord from_json_line(const std::string& line);
};

// Streaming writer: appends one line per record as training progresses.
class MetricsWriter {
public:
    MetricsWriter(const std::string& metrics_path, const std::string& timings_path);
    ~MetricsWriter();
    void append(const MetricsRecord& rec);

private:
    struct Impl;
    Impl* impl_;
    int prev_epoch_ = -1;
};

std::vector<MetricsRecord> read_metrics_file(const std::string& path);

// Writes metrics.jsonl, timings.jsonl, summary.csv and two PNG charts into
// dir. Rejects empty record lists.
void emit_report(const std::vector<MetricsRecord>& records, const std::string& dir);

}  // namespace cae
