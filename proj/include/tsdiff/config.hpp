#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tsdiff/data.hpp"
#include "tsdiff/denoiser.hpp"
#include "tsdiff/diffusion.hpp"
#include "tsdiff/metrics.hpp"
#include "tsdiff/schedule.hpp"

namespace tsdiff {

struct SineSpec {
    int num_sequences = 1000;
    int seq_len = 100;
    int dims = 5;
    double heldout_fraction = 0.2;
};

struct CsvSpec {
    std::string path;
    std::vector<std::string> columns;
    WindowSpec window;
};

struct DatasetSpec {
    enum class Type { sine, csv } type = Type::sine;
    SineSpec sine;
    CsvSpec csv;

    int seq_len() const { return type == Type::sine ? sine.seq_len : csv.window.length; }
};

struct ScheduleSpec {
    std::string type = "cosine";
    int num_steps = 1000;
    double offset = 0.008;
    SigmaPolicy sigma_policy = SigmaPolicy::beta;
};

struct DenoiserSpec {
    Backbone backbone = Backbone::transformer;
    int hidden_dim = 256;
    int num_layers = 6;
    int num_heads = 8;
    int feedforward_dim = 0;  // 0 -> 4 * hidden_dim
    double dropout = 0.0;
};

struct SampleSpec {
    int count = 256;
    int chunk = 64;
};

// Full run configuration. Every section has defaults; the dataset section is
// required only by commands that load data. Unknown keys anywhere are
// rejected with the offending path.
struct RunConfig {
    std::uint64_t seed = 42;
    std::string output_dir;  // empty -> $TSDIFF_OUT_ROOT or "runs"
    std::optional<DatasetSpec> dataset;
    ScheduleSpec schedule;
    DenoiserSpec denoiser;
    TrainConfig train;
    MetricConfig metrics;
    SampleSpec sample;
};

RunConfig parse_run_config(const nlohmann::json& j);
RunConfig load_run_config(const std::string& path);

nlohmann::json to_json(const RunConfig& config);

// Completes a denoiser config from the run config plus data dimensions.
DenoiserConfig make_denoiser_config(const RunConfig& config, int seq_len, int feature_dim);

NoiseSchedule build_schedule(const ScheduleSpec& spec);

}  // namespace tsdiff
