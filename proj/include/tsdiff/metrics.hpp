#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tsdiff/data.hpp"
#include "tsdiff/nn.hpp"

namespace tsdiff {

// Held-out real data vs. synthetic data, both in original (inverse-scaled)
// units with matching sequence length and feature dimension.
struct EvalPair {
    SequenceBatch real;
    SequenceBatch synthetic;

    void validate() const;
};

struct MetricConfig {
    int repetitions = 10;
    int hidden_dim = 64;
    int num_layers = 2;
    int num_heads = 2;
    int epochs = 50;
    int batch_size = 64;          // split evenly across classes for LDS
    double learning_rate = 1e-3;
    int jsd_bins = 50;
    int coverage_k = 5;
    std::vector<double> alpha_grid = {0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40, 0.45, 0.50,
                                      0.55, 0.60, 0.65, 0.70, 0.75, 0.80, 0.85, 0.90, 0.95};
    int parallelism = 1;
    std::uint64_t seed = 42;

    void validate() const;
};

struct MetricReport {
    std::string name;
    std::vector<double> runs;
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation (n-1), 0 for a single run
    int run_count = 0;
    std::map<std::string, double> aux;  // e.g. per-class F1 means for LDS

    static MetricReport from_runs(std::string name, std::vector<double> runs);
};

double lds_score_from_accuracy(double accuracy);  // |0.5 - accuracy|

// Long-Sequence Discriminative Score. Labels real = 1, synthetic = 0, trains
// a transformer classifier on a balanced 80/20 split and reports
// |0.5 - test accuracy| plus per-class F1. The head is zero-initialized and
// per-class half-batches accumulate separately, which makes the score exactly
// symmetric under swapping the two sides of the pair.
MetricReport lds(const EvalPair& pair, const MetricConfig& config);

// Long-Sequence Predictive Score: trains a transformer predictor on synthetic
// sequences mapping steps [0..N-horizon) to the final `horizon` steps, then
// reports MAE on the real side, in scaled space. horizon 1 is LPS, 5 is the
// +5-steps score.
MetricReport lps(const EvalPair& pair, int horizon, const MetricConfig& config);

// Evaluation half of LPS with an arbitrary predictor; used by the harness to
// validate the plumbing against closed-form baselines. `predict` maps input
// tokens [B*(N-horizon), D] to flat predictions [B, horizon*D].
double evaluate_predictor_mae(const std::function<nn::Mat(const nn::Mat&, int batch)>& predict,
                              const SequenceBatch& real_scaled, int horizon);

// Jensen-Shannon divergence (log base 2, in [0, 1]) between pooled per-feature
// value distributions, averaged across features. Histograms span the combined
// min-max range per feature; operates on raw units (the score is invariant to
// per-feature affine scaling because the bins move with the data).
MetricReport jsd(const EvalPair& pair, const MetricConfig& config);
double jsd_value(const EvalPair& pair, int bins);

struct PrcScores {
    MetricReport alpha_precision;
    MetricReport beta_recall;
    MetricReport coverage;
};

// Flattens each sequence to an [N*D] embedding in scaled space.
// alpha-precision: mean over the grid of the fraction of synthetic embeddings
// inside the alpha-quantile ball of real distances around the real mean;
// beta-recall swaps the roles; coverage is the fraction of real points whose
// k-th-nearest-real-neighbor ball contains a synthetic point.
PrcScores precision_recall_coverage(const EvalPair& pair, const MetricConfig& config);

struct EvaluationSuite {
    std::vector<MetricReport> reports;
};

// Full metric suite in Table-1 order: LDS, LPS, JSD, alpha-precision,
// beta-recall, coverage, +5 steps (the latter only when N > 5).
EvaluationSuite evaluate_all(const EvalPair& pair, const MetricConfig& config);

std::uint64_t metric_config_digest(const MetricConfig& config);
nlohmann::json report_to_json(const MetricReport& report, const MetricConfig& config);
nlohmann::json suite_to_json(const EvaluationSuite& suite, const MetricConfig& config);
std::string render_table(const EvaluationSuite& suite);

// Metric-internal scaling: one min-max scaler fitted on the pooled pair (so
// every score is symmetric in its two inputs), mapped to [-1, 1].
ScalerState pooled_scaler(const EvalPair& pair);

}  // namespace tsdiff
