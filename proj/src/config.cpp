#include "tsdiff/config.hpp"

#include <fstream>
#include <set>

#include "tsdiff/errors.hpp"

namespace tsdiff {

namespace {

using nlohmann::json;

void expect_object(const json& j, const std::string& path) {
    if (!j.is_object()) throw ConfigError(path + ": expected a JSON object");
}

void reject_unknown(const json& j, const std::string& path, const std::set<std::string>& allowed) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!allowed.contains(it.key())) {
            throw ConfigError(path + ": unknown key \"" + it.key() + "\"");
        }
    }
}

template <typename T>
T get_or(const json& j, const std::string& path, const std::string& key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(path + "." + key + ": wrong type");
    }
}

template <typename T>
T get_required(const json& j, const std::string& path, const std::string& key) {
    if (!j.contains(key)) throw ConfigError(path + "." + key + ": required field missing");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(path + "." + key + ": wrong type");
    }
}

DatasetSpec parse_dataset(const json& j) {
    expect_object(j, "dataset");
    DatasetSpec spec;
    const std::string type = get_required<std::string>(j, "dataset", "type");
    if (type == "sine") {
        spec.type = DatasetSpec::Type::sine;
        reject_unknown(j, "dataset",
                       {"type", "num_sequences", "seq_len", "dims", "heldout_fraction"});
        spec.sine.num_sequences = get_or(j, "dataset", "num_sequences", spec.sine.num_sequences);
        spec.sine.seq_len = get_or(j, "dataset", "seq_len", spec.sine.seq_len);
        spec.sine.dims = get_or(j, "dataset", "dims", spec.sine.dims);
        spec.sine.heldout_fraction = get_or(j, "dataset", "heldout_fraction", spec.sine.heldout_fraction);
    } else if (type == "csv") {
        spec.type = DatasetSpec::Type::csv;
        reject_unknown(j, "dataset", {"type", "path", "columns", "window"});
        spec.csv.path = get_required<std::string>(j, "dataset", "path");
        spec.csv.columns = get_required<std::vector<std::string>>(j, "dataset", "columns");
        if (j.contains("window")) {
            const json& w = j.at("window");
            expect_object(w, "dataset.window");
            reject_unknown(w, "dataset.window", {"length", "stride", "heldout_fraction"});
            spec.csv.window.length = get_or(w, "dataset.window", "length", spec.csv.window.length);
            spec.csv.window.stride = get_or(w, "dataset.window", "stride", spec.csv.window.stride);
            spec.csv.window.heldout_fraction =
                get_or(w, "dataset.window", "heldout_fraction", spec.csv.window.heldout_fraction);
        }
    } else {
        throw ConfigError("dataset.type: expected \"sine\" or \"csv\", got \"" + type + "\"");
    }
    return spec;
}

ScheduleSpec parse_schedule(const json& j) {
    expect_object(j, "schedule");
    reject_unknown(j, "schedule", {"type", "num_steps", "offset", "sigma_policy"});
    ScheduleSpec spec;
    spec.type = get_or<std::string>(j, "schedule", "type", spec.type);
    if (spec.type != "cosine") {
        throw ConfigError("schedule.type: only \"cosine\" is supported, got \"" + spec.type + "\"");
    }
    spec.num_steps = get_or(j, "schedule", "num_steps", spec.num_steps);
    spec.offset = get_or(j, "schedule", "offset", spec.offset);
    spec.sigma_policy =
        sigma_policy_from_string(get_or<std::string>(j, "schedule", "sigma_policy", "beta"));
    return spec;
}

DenoiserSpec parse_denoiser(const json& j) {
    expect_object(j, "denoiser");
    reject_unknown(j, "denoiser",
                   {"backbone", "hidden_dim", "num_layers", "num_heads", "feedforward_dim", "dropout"});
    DenoiserSpec spec;
    spec.backbone = backbone_from_string(get_or<std::string>(j, "denoiser", "backbone", "transformer"));
    spec.hidden_dim = get_or(j, "denoiser", "hidden_dim", spec.hidden_dim);
    spec.num_layers = get_or(j, "denoiser", "num_layers", spec.num_layers);
    spec.num_heads = get_or(j, "denoiser", "num_heads", spec.num_heads);
    spec.feedforward_dim = get_or(j, "denoiser", "feedforward_dim", spec.feedforward_dim);
    spec.dropout = get_or(j, "denoiser", "dropout", spec.dropout);
    return spec;
}

TrainConfig parse_train(const json& j) {
    expect_object(j, "train");
    reject_unknown(j, "train",
                   {"epochs", "batch_size", "learning_rate", "adam_beta1", "adam_beta2", "adam_eps",
                    "grad_clip", "checkpoint_interval", "divergence_limit"});
    TrainConfig cfg;
    cfg.epochs = get_or(j, "train", "epochs", cfg.epochs);
    cfg.batch_size = get_or(j, "train", "batch_size", cfg.batch_size);
    cfg.learning_rate = get_or(j, "train", "learning_rate", cfg.learning_rate);
    cfg.adam_beta1 = get_or(j, "train", "adam_beta1", cfg.adam_beta1);
    cfg.adam_beta2 = get_or(j, "train", "adam_beta2", cfg.adam_beta2);
    cfg.adam_eps = get_or(j, "train", "adam_eps", cfg.adam_eps);
    cfg.grad_clip = get_or(j, "train", "grad_clip", cfg.grad_clip);
    cfg.checkpoint_interval = get_or(j, "train", "checkpoint_interval", cfg.checkpoint_interval);
    cfg.divergence_limit = get_or(j, "train", "divergence_limit", cfg.divergence_limit);
    cfg.validate();
    return cfg;
}

MetricConfig parse_metrics(const json& j, std::uint64_t seed) {
    expect_object(j, "metrics");
    reject_unknown(j, "metrics",
                   {"repetitions", "hidden_dim", "num_layers", "num_heads", "epochs", "batch_size",
                    "learning_rate", "jsd_bins", "coverage_k", "alpha_grid", "parallelism"});
    MetricConfig cfg;
    cfg.repetitions = get_or(j, "metrics", "repetitions", cfg.repetitions);
    cfg.hidden_dim = get_or(j, "metrics", "hidden_dim", cfg.hidden_dim);
    cfg.num_layers = get_or(j, "metrics", "num_layers", cfg.num_layers);
    cfg.num_heads = get_or(j, "metrics", "num_heads", cfg.num_heads);
    cfg.epochs = get_or(j, "metrics", "epochs", cfg.epochs);
    cfg.batch_size = get_or(j, "metrics", "batch_size", cfg.batch_size);
    cfg.learning_rate = get_or(j, "metrics", "learning_rate", cfg.learning_rate);
    cfg.jsd_bins = get_or(j, "metrics", "jsd_bins", cfg.jsd_bins);
    cfg.coverage_k = get_or(j, "metrics", "coverage_k", cfg.coverage_k);
    cfg.alpha_grid = get_or(j, "metrics", "alpha_grid", cfg.alpha_grid);
    cfg.parallelism = get_or(j, "metrics", "parallelism", cfg.parallelism);
    cfg.seed = seed;
    cfg.validate();
    return cfg;
}

SampleSpec parse_sample(const json& j) {
    expect_object(j, "sample");
    reject_unknown(j, "sample", {"count", "chunk"});
    SampleSpec spec;
    spec.count = get_or(j, "sample", "count", spec.count);
    spec.chunk = get_or(j, "sample", "chunk", spec.chunk);
    return spec;
}

}  // namespace

RunConfig parse_run_config(const json& j) {
    expect_object(j, "config");
    reject_unknown(j, "config",
                   {"seed", "output_dir", "dataset", "schedule", "denoiser", "train", "metrics",
                    "sample"});
    RunConfig cfg;
    cfg.seed = get_or<std::uint64_t>(j, "config", "seed", cfg.seed);
    cfg.output_dir = get_or<std::string>(j, "config", "output_dir", cfg.output_dir);
    if (j.contains("dataset")) cfg.dataset = parse_dataset(j.at("dataset"));
    if (j.contains("schedule")) cfg.schedule = parse_schedule(j.at("schedule"));
    if (j.contains("train")) cfg.train = parse_train(j.at("train"));
    if (j.contains("denoiser")) cfg.denoiser = parse_denoiser(j.at("denoiser"));
    cfg.metrics = j.contains("metrics") ? parse_metrics(j.at("metrics"), cfg.seed) : MetricConfig{};
    cfg.metrics.seed = cfg.seed;
    if (j.contains("sample")) cfg.sample = parse_sample(j.at("sample"));
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open \"" + path + "\"");
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw ConfigError("config: \"" + path + "\" is not valid JSON");
    return parse_run_config(j);
}

json to_json(const RunConfig& config) {
    json j;
    j["seed"] = config.seed;
    if (!config.output_dir.empty()) j["output_dir"] = config.output_dir;
    if (config.dataset) {
        json d;
        if (config.dataset->type == DatasetSpec::Type::sine) {
            d["type"] = "sine";
            d["num_sequences"] = config.dataset->sine.num_sequences;
            d["seq_len"] = config.dataset->sine.seq_len;
            d["dims"] = config.dataset->sine.dims;
            d["heldout_fraction"] = config.dataset->sine.heldout_fraction;
        } else {
            d["type"] = "csv";
            d["path"] = config.dataset->csv.path;
            d["columns"] = config.dataset->csv.columns;
            d["window"] = {{"length", config.dataset->csv.window.length},
                           {"stride", config.dataset->csv.window.stride},
                           {"heldout_fraction", config.dataset->csv.window.heldout_fraction}};
        }
        j["dataset"] = d;
    }
    j["schedule"] = {{"type", config.schedule.type},
                     {"num_steps", config.schedule.num_steps},
                     {"offset", config.schedule.offset},
                     {"sigma_policy", to_string(config.schedule.sigma_policy)}};
    j["denoiser"] = {{"backbone", to_string(config.denoiser.backbone)},
                     {"hidden_dim", config.denoiser.hidden_dim},
                     {"num_layers", config.denoiser.num_layers},
                     {"num_heads", config.denoiser.num_heads},
                     {"feedforward_dim", config.denoiser.feedforward_dim},
                     {"dropout", config.denoiser.dropout}};
    j["train"] = {{"epochs", config.train.epochs},
                  {"batch_size", config.train.batch_size},
                  {"learning_rate", config.train.learning_rate},
                  {"adam_beta1", config.train.adam_beta1},
                  {"adam_beta2", config.train.adam_beta2},
                  {"adam_eps", config.train.adam_eps},
                  {"grad_clip", config.train.grad_clip},
                  {"checkpoint_interval", config.train.checkpoint_interval},
                  {"divergence_limit", config.train.divergence_limit}};
    j["metrics"] = {{"repetitions", config.metrics.repetitions},
                    {"hidden_dim", config.metrics.hidden_dim},
                    {"num_layers", config.metrics.num_layers},
                    {"num_heads", config.metrics.num_heads},
                    {"epochs", config.metrics.epochs},
                    {"batch_size", config.metrics.batch_size},
                    {"learning_rate", config.metrics.learning_rate},
                    {"jsd_bins", config.metrics.jsd_bins},
                    {"coverage_k", config.metrics.coverage_k},
                    {"alpha_grid", config.metrics.alpha_grid},
                    {"parallelism", config.metrics.parallelism}};
    j["sample"] = {{"count", config.sample.count}, {"chunk", config.sample.chunk}};
    return j;
}

DenoiserConfig make_denoiser_config(const RunConfig& config, int seq_len, int feature_dim) {
    DenoiserConfig d;
    d.backbone = config.denoiser.backbone;
    d.seq_len = seq_len;
    d.feature_dim = feature_dim;
    d.hidden_dim = config.denoiser.hidden_dim;
    d.num_layers = config.denoiser.num_layers;
    d.num_heads = config.denoiser.num_heads;
    d.feedforward_dim = config.denoiser.feedforward_dim;
    d.dropout = config.denoiser.dropout;
    d.max_diffusion_steps = config.schedule.num_steps;
    d.validate();
    return d;
}

NoiseSchedule build_schedule(const ScheduleSpec& spec) {
    return posterior_sigma_policy(cosine_schedule(spec.num_steps, spec.offset), spec.sigma_policy);
}

}  // namespace tsdiff
