#include "cae/metrics.hpp"

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "cae/plot.hpp"

namespace cae {

using nlohmann::json;

void MetricsRecord::validate(int prev_epoch) const {
    if (epoch <= prev_epoch)
        throw NumericError("metrics epoch " + std::to_string(epoch) +
                           " does not increase over " + std::to_string(prev_epoch));
    if (student_test_acc < 0.0 || student_test_acc > 1.0)
        throw NumericError("metrics accuracy out of [0,1]");
    for (double p : low_conf) {
        if (!(p >= 0.0 && p <= 1.0))
            throw NumericError("low-confidence proportion out of [0,1]");
    }
}

std::string MetricsRecord::to_json_line() const {
    json j;
    j["epoch"] = epoch;
    j["lr_g"] = lr_generator;
    j["lr_s"] = lr_student;
    j["l_ce"] = l_ce;
    j["l_bn"] = l_bn;
    j["l_adv"] = l_adv;
    j["l_g_total"] = l_g_total;
    j["l_kl"] = l_kl;
    j["l_cncl"] = l_cncl;
    j["l_s_total"] = l_s_total;
    j["acc"] = student_test_acc;
    j["low_conf"] = low_conf;
    return j.dump();
}

MetricsRecord MetricsRecord::from_json_line(const std::string& line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::exception& e) {
        throw IoError(std::string("bad metrics line: ") + e.what());
    }
    MetricsRecord r;
    r.epoch = j.at("epoch").get<int>();
    r.lr_generator = j.at("lr_g").get<double>();
    r.lr_student = j.at("lr_s").get<double>();
    r.l_ce = j.at("l_ce").get<double>();
    r.l_bn = j.at("l_bn").get<double>();
    r.l_adv = j.at("l_adv").get<double>();
    r.l_g_total = j.at("l_g_total").get<double>();
    r.l_kl = j.at("l_kl").get<double>();
    r.l_cncl = j.at("l_cncl").get<double>();
    r.l_s_total = j.at("l_s_total").get<double>();
    r.student_test_acc = j.at("acc").get<double>();
    r.low_conf = j.at("low_conf").get<std::vector<double>>();
    return r;
}

struct MetricsWriter::Impl {
    std::ofstream metrics;
    std::ofstream timings;
};

MetricsWriter::MetricsWriter(const std::string& metrics_path, const std::string& timings_path) {
    impl_ = new Impl;
    impl_->metrics.open(metrics_path);
    impl_->timings.open(timings_path);
    if (!impl_->metrics || !impl_->timings) {
        delete impl_;
        throw IoError("cannot open metrics stream at " + metrics_path);
    }
}

MetricsWriter::~MetricsWriter() { delete impl_; }

void MetricsWriter::append(const MetricsRecord& rec) {
    rec.validate(prev_epoch_);
    prev_epoch_ = rec.epoch;
    impl_->metrics << rec.to_json_line() << "\n";
    impl_->metrics.flush();
    json t;
    t["epoch"] = rec.epoch;
    t["seconds"] = rec.epoch_seconds;
    impl_->timings << t.dump() << "\n";
    impl_->timings.flush();
}

std::vector<MetricsRecord> read_metrics_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open metrics file: " + path);
    std::vector<MetricsRecord> out;
    std::string line;
    while (std::getline(is, line)) {
        if (!line.empty()) out.push_back(MetricsRecord::from_json_line(line));
    }
    return out;
}

void emit_report(const std::vector<MetricsRecord>& records, const std::string& dir) {
    if (records.empty()) throw ConfigError("emit_report: no records");
    std::filesystem::create_directories(dir);
    const auto p = [&](const char* name) { return (std::filesystem::path(dir) / name).string(); };

    {
        MetricsWriter w(p("metrics.jsonl"), p("timings.jsonl"));
        for (const auto& r : records) w.append(r);
    }
    {
        std::ofstream csv(p("summary.csv"));
        if (!csv) throw IoError("cannot write summary.csv in " + dir);
        csv << "epoch,lr_g,lr_s,l_ce,l_bn,l_adv,l_g_total,l_kl,l_cncl,l_s_total,acc\n";
        for (const auto& r : records) {
            csv << r.epoch << ',' << r.lr_generator << ',' << r.lr_student << ',' << r.l_ce << ','
                << r.l_bn << ',' << r.l_adv << ',' << r.l_g_total << ',' << r.l_kl << ','
                << r.l_cncl << ',' << r.l_s_total << ',' << r.student_test_acc << "\n";
        }
    }

    Series gl{"l_g", {}, 200, 60, 40};
    Series sl{"l_s", {}, 40, 60, 200};
    Series acc{"acc", {}, 30, 150, 60};
    for (const auto& r : records) {
        gl.values.push_back(r.l_g_total);
        sl.values.push_back(r.l_s_total);
        acc.values.push_back(r.student_test_acc);
    }
    plot_lines(p("loss_curves.png"), {gl, sl, acc}, "training curves");

    std::vector<std::string> labels;
    for (size_t i = 0; i < records.back().low_conf.size(); ++i) labels.push_back(std::to_string(i));
    plot_bars(p("low_confidence.png"), records.back().low_conf, labels,
              "per-category low-confidence proportion");
}

}  // namespace cae
