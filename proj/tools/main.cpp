#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "tsdiff/checkpoint.hpp"
#include "tsdiff/config.hpp"
#include "tsdiff/data.hpp"
#include "tsdiff/diffusion.hpp"
#include "tsdiff/errors.hpp"
#include "tsdiff/metrics.hpp"
#include "tsdiff/projection.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace tsdiff;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

std::string timestamp_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y%m%d-%H%M%S", &tm);
    return buf;
}

// --out wins; otherwise <output_dir | $TSDIFF_OUT_ROOT | runs>/<stamp>-<cmd>.
fs::path make_run_dir(const std::string& out_flag, const std::string& config_dir,
                      const std::string& cmd) {
    fs::path dir;
    if (!out_flag.empty()) {
        dir = out_flag;
    } else {
        std::string root = config_dir;
        if (root.empty()) {
            const char* env = std::getenv("TSDIFF_OUT_ROOT");
            root = env != nullptr ? env : "runs";
        }
        dir = fs::path(root) / (timestamp_now() + "-" + cmd);
    }
    fs::create_directories(dir);
    return dir;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write \"" + path.string() + "\"");
    out << text;
}

json scaler_to_json(const ScalerState& s) {
    return {{"feature_min", s.feature_min},
            {"feature_max", s.feature_max},
            {"lo", s.lo},
            {"hi", s.hi}};
}

ScalerState scaler_from_json(const json& j) {
    ScalerState s;
    s.feature_min = j.at("feature_min").get<std::vector<double>>();
    s.feature_max = j.at("feature_max").get<std::vector<double>>();
    s.lo = j.at("lo").get<double>();
    s.hi = j.at("hi").get<double>();
    return s;
}

std::string format_loss_csv(const std::vector<double>& epoch_losses) {
    std::string text = "epoch,loss\n";
    char buf[64];
    for (std::size_t i = 0; i < epoch_losses.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%zu,%.17g\n", i + 1, epoch_losses[i]);
        text += buf;
    }
    return text;
}

json denoiser_config_to_json(const DenoiserConfig& d) {
    return {{"backbone", to_string(d.backbone)},
            {"seq_len", d.seq_len},
            {"feature_dim", d.feature_dim},
            {"hidden_dim", d.hidden_dim},
            {"num_layers", d.num_layers},
            {"num_heads", d.num_heads},
            {"feedforward_dim", d.feedforward_dim},
            {"dropout", d.dropout},
            {"max_diffusion_steps", d.max_diffusion_steps}};
}

DenoiserConfig denoiser_config_from_json(const json& j) {
    DenoiserConfig d;
    d.backbone = backbone_from_string(j.at("backbone").get<std::string>());
    d.seq_len = j.at("seq_len").get<int>();
    d.feature_dim = j.at("feature_dim").get<int>();
    d.hidden_dim = j.at("hidden_dim").get<int>();
    d.num_layers = j.at("num_layers").get<int>();
    d.num_heads = j.at("num_heads").get<int>();
    d.feedforward_dim = j.at("feedforward_dim").get<int>();
    d.dropout = j.at("dropout").get<double>();
    d.max_diffusion_steps = j.at("max_diffusion_steps").get<int>();
    return d;
}

struct TrainArgs {
    std::string config_path;
    std::string out;
    std::optional<std::uint64_t> seed;
};

int cmd_train(const TrainArgs& args) {
    RunConfig cfg = load_run_config(args.config_path);
    if (args.seed) cfg.seed = *args.seed;
    if (!cfg.dataset) throw ConfigError("dataset: section required for train");

    LoadedDataset ds;
    WindowSpec window;
    if (cfg.dataset->type == DatasetSpec::Type::sine) {
        const auto& sine = cfg.dataset->sine;
        Rng data_rng(derive_seed(cfg.seed, "dataset"));
        SequenceBatch all = generate_sine(sine.num_sequences, sine.seq_len, sine.dims, data_rng);
        ds = split_batch(std::move(all), sine.heldout_fraction);
        window.length = sine.seq_len;
        window.stride = 1;
        window.heldout_fraction = sine.heldout_fraction;
    } else {
        window = cfg.dataset->csv.window;
        ds = load_csv(cfg.dataset->csv.path, cfg.dataset->csv.columns, window);
        if (ds.dropped_rows > 0) {
            std::cout << "dropped " << ds.dropped_rows << " rows with missing/non-numeric fields\n";
        }
    }

    const NoiseSchedule schedule = build_schedule(cfg.schedule);
    const DenoiserConfig dcfg = make_denoiser_config(cfg, ds.train.seq_len, ds.train.feature_dim);
    Rng init_rng(derive_seed(cfg.seed, "model_init"));
    DenoiserModel model = DenoiserModel::init(dcfg, init_rng);

    const fs::path run_dir = make_run_dir(args.out, cfg.output_dir, "train");
    write_text(run_dir / "config.json", to_json(cfg).dump(2) + "\n");

    json meta;
    meta["format_version"] = 1;
    meta["config"] = to_json(cfg);
    meta["denoiser_config"] = denoiser_config_to_json(dcfg);
    meta["schedule"] = {{"type", cfg.schedule.type},
                        {"num_steps", cfg.schedule.num_steps},
                        {"offset", cfg.schedule.offset},
                        {"sigma_policy", to_string(cfg.schedule.sigma_policy)}};
    meta["scaler"] = scaler_to_json(ds.scaler);
    meta["window"] = {{"length", window.length},
                      {"stride", window.stride},
                      {"heldout_fraction", window.heldout_fraction}};
    meta["seed"] = cfg.seed;

    const SequenceBatch train_scaled = scale(ds.train, ds.scaler);
    Rng train_rng(derive_seed(cfg.seed, "train"));
    const CheckpointCallback on_ckpt = [&](int epoch, DenoiserModel& m) {
        json ckpt_meta = meta;
        ckpt_meta["epoch"] = epoch;
        char name[64];
        std::snprintf(name, sizeof(name), "checkpoint_epoch%06d.bin", epoch);
        save_checkpoint((run_dir / name).string(), ckpt_meta, m);
    };
    const TrainResult result = train(model, train_scaled, schedule, cfg.train, train_rng, on_ckpt);

    meta["epoch"] = cfg.train.epochs;
    save_checkpoint((run_dir / "checkpoint.bin").string(), meta, model);
    write_text(run_dir / "loss.csv", format_loss_csv(result.epoch_losses));
    write_sequence_csv((run_dir / "heldout.csv").string(), ds.heldout);
    write_sidecar((run_dir / "heldout.meta.json").string(), ds.scaler, window, cfg.seed, ds.heldout);

    const double final_loss = result.epoch_losses.empty() ? 0.0 : result.epoch_losses.back();
    std::printf("trained %d epochs (%d steps), final epoch loss %.6f\n", cfg.train.epochs,
                result.steps, final_loss);
    std::cout << "run directory: " << run_dir.string() << "\n";
    return 0;
}

struct SampleArgs {
    std::string checkpoint;
    std::string out;
    int count = 256;
    int chunk = 64;
    std::optional<std::uint64_t> seed;
    std::optional<int> seq_len;  // validated against the checkpoint
};

int cmd_sample(const SampleArgs& args) {
    const Checkpoint ckpt = load_checkpoint(args.checkpoint);
    const DenoiserConfig dcfg = denoiser_config_from_json(ckpt.meta.at("denoiser_config"));
    if (args.seq_len && *args.seq_len != dcfg.seq_len) {
        throw ConfigError("--seq-len " + std::to_string(*args.seq_len) +
                          " does not match checkpoint seq_len " + std::to_string(dcfg.seq_len));
    }

    ScheduleSpec sspec;
    sspec.type = ckpt.meta.at("schedule").at("type").get<std::string>();
    sspec.num_steps = ckpt.meta.at("schedule").at("num_steps").get<int>();
    sspec.offset = ckpt.meta.at("schedule").at("offset").get<double>();
    sspec.sigma_policy =
        sigma_policy_from_string(ckpt.meta.at("schedule").at("sigma_policy").get<std::string>());
    const NoiseSchedule schedule = build_schedule(sspec);
    const ScalerState scaler = scaler_from_json(ckpt.meta.at("scaler"));

    Rng init_rng(0);
    DenoiserModel model = DenoiserModel::init(dcfg, init_rng);
    apply_parameters(model, ckpt);

    const std::uint64_t seed = args.seed ? *args.seed : ckpt.meta.at("seed").get<std::uint64_t>();
    Rng rng(derive_seed(seed, "sample"));
    SampleConfig scfg;
    scfg.count = args.count;
    scfg.chunk = args.chunk;
    const SequenceBatch scaled = sample(model, schedule, scfg, rng);
    const SequenceBatch raw = inverse_scale(scaled, scaler);

    const fs::path run_dir = make_run_dir(args.out, "", "sample");
    WindowSpec window;
    window.length = ckpt.meta.at("window").at("length").get<int>();
    window.stride = ckpt.meta.at("window").at("stride").get<int>();
    window.heldout_fraction = ckpt.meta.at("window").at("heldout_fraction").get<double>();
    write_sequence_csv((run_dir / "samples.csv").string(), raw);
    write_sidecar((run_dir / "samples.meta.json").string(), scaler, window, seed, raw);
    std::printf("sampled %d sequences of length %d x %d features\n", raw.batch, raw.seq_len,
                raw.feature_dim);
    std::cout << "run directory: " << run_dir.string() << "\n";
    return 0;
}

struct EvaluateArgs {
    std::string real_path, synthetic_path;
    std::string config_path;
    std::string out;
    std::optional<std::uint64_t> seed;
};

int cmd_evaluate(const EvaluateArgs& args) {
    RunConfig cfg;
    if (!args.config_path.empty()) cfg = load_run_config(args.config_path);
    if (args.seed) {
        cfg.seed = *args.seed;
        cfg.metrics.seed = *args.seed;
    }

    EvalPair pair;
    pair.real = read_sequence_csv(args.real_path);
    pair.synthetic = read_sequence_csv(args.synthetic_path);

    const EvaluationSuite suite = evaluate_all(pair, cfg.metrics);
    const std::string table = render_table(suite);

    const fs::path run_dir = make_run_dir(args.out, cfg.output_dir, "evaluate");
    write_text(run_dir / "metrics.json", suite_to_json(suite, cfg.metrics).dump(2) + "\n");
    write_text(run_dir / "metrics.txt", table);
    std::cout << table;
    std::cout << "run directory: " << run_dir.string() << "\n";
    return 0;
}

struct ProjectArgs {
    std::string real_path, synthetic_path;
    std::string method = "pca";
    std::string out;
    double perplexity = 30.0;
    int iterations = 1000;
    int max_points = 1000;
    std::optional<std::uint64_t> seed;
};

SequenceBatch subsample(const SequenceBatch& batch, int max_points, Rng& rng) {
    if (batch.batch <= max_points) return batch;
    std::vector<int> idx(static_cast<std::size_t>(batch.batch));
    std::iota(idx.begin(), idx.end(), 0);
    rng.shuffle(idx);
    idx.resize(static_cast<std::size_t>(max_points));
    std::sort(idx.begin(), idx.end());
    SequenceBatch out = make_batch(max_points, batch.seq_len, batch.feature_dim);
    const std::size_t per_seq = static_cast<std::size_t>(batch.seq_len) * batch.feature_dim;
    for (int i = 0; i < max_points; ++i) {
        std::copy_n(batch.values.begin() + static_cast<std::ptrdiff_t>(per_seq) * idx[static_cast<std::size_t>(i)],
                    per_seq, out.values.begin() + static_cast<std::ptrdiff_t>(per_seq) * i);
    }
    return out;
}

int cmd_project(const ProjectArgs& args) {
    if (args.method != "pca" && args.method != "tsne") {
        throw ConfigError("--method: expected \"pca\" or \"tsne\", got \"" + args.method + "\"");
    }
    if (args.max_points < 2) throw ConfigError("--max-points: must be >= 2");

    const std::uint64_t seed = args.seed ? *args.seed : 42;
    SequenceBatch real = read_sequence_csv(args.real_path);
    SequenceBatch synthetic = read_sequence_csv(args.synthetic_path);
    {
        Rng sub_real(derive_seed(seed, "subsample:real"));
        real = subsample(real, args.max_points, sub_real);
        Rng sub_syn(derive_seed(seed, "subsample:synthetic"));
        synthetic = subsample(synthetic, args.max_points, sub_syn);
    }

    EmbeddingProjection proj;
    if (args.method == "pca") {
        proj = pca_project(real, synthetic);
    } else {
        TsneConfig tcfg;
        tcfg.perplexity = args.perplexity;
        tcfg.iterations = args.iterations;
        Rng rng(derive_seed(seed, "tsne"));
        proj = tsne_project(real, synthetic, tcfg, rng);
    }

    const fs::path run_dir = make_run_dir(args.out, "", "project");
    write_projection_csv((run_dir / "embedding.csv").string(), proj);
    write_projection_meta((run_dir / "embedding.meta.json").string(), proj, seed);
    if (proj.method == ProjectionMethod::pca) {
        std::printf("pca: %lld points, explained variance %.4f / %.4f\n",
                    static_cast<long long>(proj.coords.rows()), proj.explained_variance[0],
                    proj.explained_variance[1]);
    } else {
        std::printf("tsne: %lld points, final KL %.4f%s\n",
                    static_cast<long long>(proj.coords.rows()), proj.final_kl,
                    proj.kl_increase_flagged ? " (KL increase flagged)" : "");
    }
    std::cout << "run directory: " << run_dir.string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"diffusion-based long-sequence time-series generator and evaluation suite"};
    app.require_subcommand(1);

    TrainArgs train_args;
    auto* train_cmd = app.add_subcommand("train", "train a denoiser from a run config");
    train_cmd->add_option("--config", train_args.config_path, "run config JSON")->required();
    train_cmd->add_option("--seed", train_args.seed, "override the root seed");
    train_cmd->add_option("--out", train_args.out, "exact output directory");

    SampleArgs sample_args;
    auto* sample_cmd = app.add_subcommand("sample", "generate sequences from a checkpoint");
    sample_cmd->add_option("--checkpoint", sample_args.checkpoint, "checkpoint file")->required();
    sample_cmd->add_option("--count", sample_args.count, "number of sequences");
    sample_cmd->add_option("--chunk", sample_args.chunk, "sequences per reverse pass");
    sample_cmd->add_option("--seed", sample_args.seed, "sampling seed (default: checkpoint seed)");
    sample_cmd->add_option("--seq-len", sample_args.seq_len, "expected sequence length (validated)");
    sample_cmd->add_option("--out", sample_args.out, "exact output directory");

    EvaluateArgs eval_args;
    auto* eval_cmd = app.add_subcommand("evaluate", "run the metric suite on real vs synthetic CSVs");
    eval_cmd->add_option("--real", eval_args.real_path, "real sequences CSV")->required();
    eval_cmd->add_option("--synthetic", eval_args.synthetic_path, "synthetic sequences CSV")->required();
    eval_cmd->add_option("--config", eval_args.config_path, "run config JSON (metrics section)");
    eval_cmd->add_option("--seed", eval_args.seed, "override the root seed");
    eval_cmd->add_option("--out", eval_args.out, "exact output directory");

    ProjectArgs project_args;
    auto* project_cmd = app.add_subcommand("project", "2-D PCA / t-SNE embedding export");
    project_cmd->add_option("--real", project_args.real_path, "real sequences CSV")->required();
    project_cmd->add_option("--synthetic", project_args.synthetic_path, "synthetic sequences CSV")
        ->required();
    project_cmd->add_option("--method", project_args.method, "pca or tsne");
    project_cmd->add_option("--perplexity", project_args.perplexity, "t-SNE perplexity");
    project_cmd->add_option("--iterations", project_args.iterations, "t-SNE iterations");
    project_cmd->add_option("--max-points", project_args.max_points, "per-side sequence cap");
    project_cmd->add_option("--seed", project_args.seed, "root seed");
    project_cmd->add_option("--out", project_args.out, "exact output directory");

    try {
        app.parse(argc, argv);
        if (train_cmd->parsed()) return cmd_train(train_args);
        if (sample_cmd->parsed()) return cmd_sample(sample_args);
        if (eval_cmd->parsed()) return cmd_evaluate(eval_args);
        if (project_cmd->parsed()) return cmd_project(project_args);
        return 0;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const NumericError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
