#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cae/distill.hpp"

namespace cae {

struct AblationPlan {
    std::string axis;  // cend_on_off | cncl_on_off | n_sources | provider | prompt_mode | lambda_sweep
    std::vector<std::string> values;  // axis-specific value encodings
    int repetitions = 1;
    std::vector<uint64_t> seeds;  // identical seed set for every cell
    RunConfig base;

    void validate() const;
};

AblationPlan load_ablation_plan(const std::string& path);

// Applies one axis value to a copy of the base configuration.
RunConfig apply_axis_value(const RunConfig& base, const std::string& axis,
                           const std::string& value);

struct AblationCell {
    std::string axis;
    std::string value;
    uint64_t seed = 0;
    int repetition = 0;
    bool ok = false;
    std::string error;
    double final_accuracy = 0.0;
    double mean_l_g = 0.0;
    double mean_l_s = 0.0;
    double seconds = 0.0;
    std::string config_digest;
};

struct AblationReport {
    std::vector<AblationCell> cells;
    // mean final accuracy per value over the seed set (successful cells only)
    std::map<std::string, double> mean_accuracy;
};

// Runs every cell (value x seed x repetition); a failed cell is recorded and
// the sweep continues. Teachers are pretrained once per seed and shared
// across cells. Writes report.csv / report.jsonl into out_dir when given.
AblationReport run_ablation(const AblationPlan& plan, const std::string& out_dir = "");

// Table-comparison harness: wall-clock epoch time of config_a over config_b,
// first epoch excluded as warm-up. epochs >= 3.
struct SpeedupResult {
    double ratio = 0.0;
    std::vector<double> epoch_seconds_a;
    std::vector<double> epoch_seconds_b;
};
SpeedupResult measure_speedup(const RunConfig& config_a, const RunConfig& config_b, int epochs);

// Generator steps needed to reach the accuracy threshold (INT64_MAX when the
// budget runs out first).
int64_t steps_to_threshold(const RunConfig& cfg, Network<float>& teacher, const ToyDataset& data,
                           double threshold_accuracy);

}  // namespace cae
