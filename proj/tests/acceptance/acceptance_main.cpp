// Acceptance suite: one criterion per section, one PASS/FAIL line each.
// Exit code is the number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <string>
#include <vector>

#include "tsdiff/data.hpp"
#include "tsdiff/diffusion.hpp"
#include "tsdiff/metrics.hpp"
#include "tsdiff/schedule.hpp"

using namespace tsdiff;
using nn::Mat;

namespace {

struct Criterion {
    std::string name;
    bool pass = true;
    std::string detail;

    void expect(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
    void note(const std::string& what) {
        if (!detail.empty()) detail += "; ";
        detail += what;
    }
};

double now_seconds() {
    using clock = std::chrono::steady_clock;
    static const clock::time_point start = clock::now();
    return std::chrono::duration<double>(clock::now() - start).count();
}

SequenceBatch random_uniform_batch(int b, int n, int d, std::uint64_t seed) {
    Rng rng(seed);
    SequenceBatch x = make_batch(b, n, d);
    for (auto& v : x.values) v = rng.uniform(-1.0, 1.0);
    return x;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// criterion 1: schedule oracle
// ---------------------------------------------------------------------------
Criterion criterion_schedule_oracle() {
    Criterion c{"1. schedule oracle (closed form, 1e-6; recurrence, 1e-12)"};
    for (int t_total : {10, 100, 1000}) {
        const NoiseSchedule s = cosine_schedule(t_total, 0.008);
        auto f = [](double frac) {
            const double v = std::cos((frac + 0.008) / 1.008 * M_PI / 2.0);
            return v * v;
        };
        double abar = 1.0;
        double max_beta_err = 0.0, max_abar_err = 0.0, max_rec_err = 0.0;
        for (int t = 1; t <= t_total; ++t) {
            const double ratio =
                f(static_cast<double>(t) / t_total) / f(static_cast<double>(t - 1) / t_total);
            const double beta = std::min(1.0 - ratio, 0.999);
            abar *= 1.0 - beta;
            max_beta_err = std::max(max_beta_err, std::abs(s.beta(t) - beta));
            max_abar_err = std::max(max_abar_err, std::abs(s.alpha_bar(t) - abar));
            if (t > 1) {
                max_rec_err = std::max(
                    max_rec_err, std::abs(s.alpha_bar(t) - s.alpha_bar(t - 1) * s.alpha(t)));
            }
        }
        c.expect(max_beta_err < 1e-6, "T=" + std::to_string(t_total) + " beta err " + fmt(max_beta_err));
        c.expect(max_abar_err < 1e-6, "T=" + std::to_string(t_total) + " abar err " + fmt(max_abar_err));
        c.expect(max_rec_err < 1e-12, "T=" + std::to_string(t_total) + " recurrence err " + fmt(max_rec_err));
    }
    return c;
}

// ---------------------------------------------------------------------------
// criterion 2: forward-process moments
// ---------------------------------------------------------------------------
Criterion criterion_forward_moments() {
    Criterion c{"2. forward-process moments (10k draws, 4 SE mean, 10% variance)"};
    const int t_total = 1000;
    const NoiseSchedule s = cosine_schedule(t_total);
    SequenceBatch x0 = make_batch(1, 4, 2);
    const double pattern[8] = {0.9, -0.7, 0.3, 0.5, -0.2, 0.8, -0.9, 0.1};
    for (int i = 0; i < 8; ++i) x0.values[static_cast<std::size_t>(i)] = pattern[i];

    const int draws = 10000;
    Rng rng(20250817);
    for (int t : {1, t_total / 2, t_total}) {
        const double abar = s.alpha_bar(t);
        std::vector<double> sum(8, 0.0), sumsq(8, 0.0);
        for (int k = 0; k < draws; ++k) {
            const DiffusionStepSample step = forward_diffuse(x0, {t}, s, rng);
            for (int i = 0; i < 8; ++i) {
                const double v = step.x_t.values[static_cast<std::size_t>(i)];
                sum[static_cast<std::size_t>(i)] += v;
                sumsq[static_cast<std::size_t>(i)] += v * v;
            }
        }
        const double se = std::sqrt((1.0 - abar) / draws);
        for (int i = 0; i < 8; ++i) {
            const double mean = sum[static_cast<std::size_t>(i)] / draws;
            const double var = sumsq[static_cast<std::size_t>(i)] / draws - mean * mean;
            const double mean_err = std::abs(mean - std::sqrt(abar) * pattern[i]);
            const double var_err = std::abs(var - (1.0 - abar));
            c.expect(mean_err < 4.0 * se, "t=" + std::to_string(t) + " elem " + std::to_string(i) +
                                              " mean err " + fmt(mean_err) + " > 4se " + fmt(4 * se));
            c.expect(var_err < 0.10 * (1.0 - abar),
                     "t=" + std::to_string(t) + " elem " + std::to_string(i) + " var err " + fmt(var_err));
        }
    }
    return c;
}

// ---------------------------------------------------------------------------
// criterion 3: gradient correctness
// ---------------------------------------------------------------------------
Criterion criterion_gradients() {
    Criterion c{"3. gradient correctness (tiny transformer, rel err < 1e-4, >= 20 params)"};
    DenoiserConfig cfg;
    cfg.seq_len = 6;
    cfg.feature_dim = 2;
    cfg.hidden_dim = 8;
    cfg.num_layers = 1;
    cfg.num_heads = 1;
    cfg.max_diffusion_steps = 10;

    const NoiseSchedule s = cosine_schedule(10);
    const SequenceBatch x0 = random_uniform_batch(3, 6, 2, 33);
    Rng init_rng(34);
    DenoiserModel model = DenoiserModel::init(cfg, init_rng);

    auto loss_value = [&] {
        Rng r(35);
        return diffusion_loss(
            [&](const Mat& xt, const std::vector<int>& t) { return model.predict(xt, t); }, x0, s, r);
    };

    model.zero_grads();
    {
        Rng r(35);
        training_loss(model, x0, s, r);
    }

    auto params = model.params();
    Rng pick(36);
    double worst = 0.0;
    for (int k = 0; k < 25; ++k) {
        const auto pi = pick.uniform_int(params.size());
        const auto idx = static_cast<Eigen::Index>(
            pick.uniform_int(static_cast<std::uint64_t>(params[pi].value->size())));
        double& entry = params[pi].value->data()[idx];
        const double analytic = params[pi].grad->data()[idx];
        const double h = 1e-5 * std::max(1.0, std::abs(entry));
        const double orig = entry;
        entry = orig + h;
        const double lp = loss_value();
        entry = orig - h;
        const double lm = loss_value();
        entry = orig;
        const double fd = (lp - lm) / (2.0 * h);
        const double err = std::abs(analytic - fd) / std::max({std::abs(analytic), std::abs(fd), 1e-8});
        worst = std::max(worst, err);
        c.expect(err < 1e-4, params[pi].name + "[" + std::to_string(idx) + "] rel err " + fmt(err));
    }
    c.note("25 params sampled, worst rel err " + fmt(worst));
    return c;
}

// ---------------------------------------------------------------------------
// criterion 4: metric sanity suite
// ---------------------------------------------------------------------------
Criterion criterion_metric_sanity() {
    Criterion c{"4. metric sanity (JSD, LDS arithmetic, coverage oracle, real-vs-real)"};

    // JSD(P, P) and disjoint supports
    const SequenceBatch same = random_uniform_batch(8, 6, 3, 44);
    c.expect(jsd_value(EvalPair{same, same}, 50) < 1e-12, "JSD(P,P) not < 1e-12");
    SequenceBatch zeros = make_batch(2, 5, 1);
    SequenceBatch ones = make_batch(2, 5, 1);
    for (auto& v : ones.values) v = 1.0;
    c.expect(std::abs(jsd_value(EvalPair{zeros, ones}, 2) - 1.0) < 1e-12, "disjoint JSD != 1.0");

    // LDS arithmetic
    c.expect(lds_score_from_accuracy(0.5) == 0.0, "|0.5-0.5| != 0");
    c.expect(std::abs(lds_score_from_accuracy(0.9) - 0.4) < 1e-15, "|0.5-0.9| != 0.4");
    c.expect(lds_score_from_accuracy(1.0) == 0.5, "|0.5-1.0| != 0.5");

    // coverage against a brute-force oracle on a fixed fixture
    const std::vector<double> real_pts = {0.0, 0.0, 1.0, 0.0, 0.0, 1.0,
                                          1.0, 1.0, 2.0, 2.0, -1.0, 0.5};
    const std::vector<double> syn_pts = {0.1, 0.1, 1.9, 2.1, 5.0, 5.0, -0.9, 0.4};
    SequenceBatch real6 = make_batch(6, 2, 1);
    real6.values = real_pts;
    SequenceBatch syn4 = make_batch(4, 2, 1);
    syn4.values = syn_pts;
    MetricConfig prc_cfg;
    prc_cfg.coverage_k = 2;
    prc_cfg.repetitions = 1;
    const PrcScores prc = precision_recall_coverage(EvalPair{real6, syn4}, prc_cfg);
    {
        const ScalerState scaler = pooled_scaler(EvalPair{real6, syn4});
        const SequenceBatch rs = scale(real6, scaler);
        const SequenceBatch ss = scale(syn4, scaler);
        auto dist = [&](const SequenceBatch& a, int i, const SequenceBatch& b, int j) {
            double sq = 0.0;
            for (int n = 0; n < 2; ++n) {
                const double diff = a.at(i, n, 0) - b.at(j, n, 0);
                sq += diff * diff;
            }
            return std::sqrt(sq);
        };
        int covered = 0;
        for (int i = 0; i < 6; ++i) {
            std::vector<double> dists;
            for (int j = 0; j < 6; ++j) {
                if (j != i) dists.push_back(dist(rs, i, rs, j));
            }
            std::sort(dists.begin(), dists.end());
            bool hit = false;
            for (int j = 0; j < 4; ++j) {
                if (dist(rs, i, ss, j) <= dists[1]) hit = true;
            }
            if (hit) ++covered;
        }
        c.expect(prc.coverage.mean == covered / 6.0, "coverage != brute-force oracle");
    }

    // real-vs-real on sine fixtures: indistinguishable halves
    Rng data_rng(45);
    const SequenceBatch sine = generate_sine(512, 24, 5, data_rng);
    SequenceBatch half_a = make_batch(256, 24, 5);
    SequenceBatch half_b = make_batch(256, 24, 5);
    const std::size_t per_seq = 24 * 5;
    std::copy_n(sine.values.begin(), per_seq * 256, half_a.values.begin());
    std::copy_n(sine.values.begin() + static_cast<std::ptrdiff_t>(per_seq * 256), per_seq * 256,
                half_b.values.begin());

    MetricConfig mcfg;
    mcfg.repetitions = 10;
    mcfg.epochs = 25;
    mcfg.batch_size = 128;
    mcfg.parallelism = 2;
    mcfg.seed = 46;
    const MetricReport rvr = lds(EvalPair{half_a, half_b}, mcfg);
    c.expect(rvr.mean <= 0.15, "real-vs-real LDS " + fmt(rvr.mean) + " > 0.15");
    c.note("real-vs-real LDS " + fmt(rvr.mean) + " +/- " + fmt(rvr.stddev));

    const PrcScores rvr_prc = precision_recall_coverage(EvalPair{half_a, half_b}, mcfg);
    c.expect(rvr_prc.coverage.mean >= 0.9,
             "real-vs-real coverage " + fmt(rvr_prc.coverage.mean) + " < 0.9");
    c.note("real-vs-real coverage " + fmt(rvr_prc.coverage.mean));
    return c;
}

// ---------------------------------------------------------------------------
// criteria 5 and 6: desk-scale end-to-end run and the backbone ablation
// ---------------------------------------------------------------------------
struct DeskScaleArm {
    double lds_mean = 0.0;
    double jsd_mean = 0.0;
    double coverage = 0.0;
    bool range_ok = true;
    std::string range_detail;
    double final_loss = 0.0;
};

struct DeskScaleContext {
    SequenceBatch train_raw, heldout_raw;
    ScalerState scaler;
    NoiseSchedule schedule;
    MetricConfig mcfg;
    TrainConfig tcfg;
};

DeskScaleContext make_desk_context() {
    DeskScaleContext ctx;
    Rng data_rng(500);
    SequenceBatch all = generate_sine(2560, 24, 5, data_rng);
    LoadedDataset ds = split_batch(std::move(all), 0.2);
    ctx.train_raw = std::move(ds.train);
    ctx.heldout_raw = std::move(ds.heldout);
    ctx.scaler = ds.scaler;
    ctx.schedule = posterior_sigma_policy(cosine_schedule(100), SigmaPolicy::beta);

    ctx.tcfg.epochs = 63;  // 2048 / 64 = 32 steps per epoch -> 2016 steps
    ctx.tcfg.batch_size = 64;
    ctx.tcfg.learning_rate = 1e-3;

    ctx.mcfg.repetitions = 10;
    ctx.mcfg.hidden_dim = 64;
    ctx.mcfg.num_layers = 2;
    ctx.mcfg.num_heads = 2;
    ctx.mcfg.epochs = 25;
    ctx.mcfg.batch_size = 128;
    ctx.mcfg.learning_rate = 1e-3;
    ctx.mcfg.parallelism = 2;
    ctx.mcfg.seed = 501;
    return ctx;
}

DenoiserConfig desk_model_config(Backbone backbone) {
    DenoiserConfig cfg;
    cfg.backbone = backbone;
    cfg.seq_len = 24;
    cfg.feature_dim = 5;
    cfg.hidden_dim = 64;
    cfg.num_layers = 2;
    cfg.num_heads = 2;
    cfg.max_diffusion_steps = 100;
    return cfg;
}

DeskScaleArm run_desk_arm(const DeskScaleContext& ctx, DenoiserModel& model, bool do_train,
                          std::uint64_t seed) {
    DeskScaleArm arm;
    if (do_train) {
        const SequenceBatch train_scaled = scale(ctx.train_raw, ctx.scaler);
        Rng train_rng(derive_seed(seed, "train"));
        const TrainResult res = train(model, train_scaled, ctx.schedule, ctx.tcfg, train_rng);
        arm.final_loss = res.epoch_losses.back();
    }

    SampleConfig scfg;
    scfg.count = ctx.heldout_raw.batch;
    scfg.chunk = 64;
    Rng sample_rng(derive_seed(seed, "sample"));
    const SequenceBatch samples_scaled = sample(model, ctx.schedule, scfg, sample_rng);
    const SequenceBatch samples_raw = inverse_scale(samples_scaled, ctx.scaler);

    // per-feature sample range within the training range +/- 20% of its span
    for (int d = 0; d < 5; ++d) {
        double lo = 1e300, hi = -1e300, tlo = 1e300, thi = -1e300;
        for (int b = 0; b < samples_raw.batch; ++b) {
            for (int n = 0; n < samples_raw.seq_len; ++n) {
                lo = std::min(lo, samples_raw.at(b, n, d));
                hi = std::max(hi, samples_raw.at(b, n, d));
            }
        }
        for (int b = 0; b < ctx.train_raw.batch; ++b) {
            for (int n = 0; n < ctx.train_raw.seq_len; ++n) {
                tlo = std::min(tlo, ctx.train_raw.at(b, n, d));
                thi = std::max(thi, ctx.train_raw.at(b, n, d));
            }
        }
        const double slack = 0.2 * (thi - tlo);
        if (lo < tlo - slack || hi > thi + slack) {
            arm.range_ok = false;
            arm.range_detail = "feature " + std::to_string(d) + " sample range [" + fmt(lo) + ", " +
                               fmt(hi) + "] vs train [" + fmt(tlo) + ", " + fmt(thi) + "] +/- 20%";
        }
    }

    const EvalPair pair{ctx.heldout_raw, samples_raw};
    arm.lds_mean = lds(pair, ctx.mcfg).mean;
    arm.jsd_mean = jsd_value(pair, ctx.mcfg.jsd_bins);
    arm.coverage = precision_recall_coverage(pair, ctx.mcfg).coverage.mean;
    return arm;
}

void criteria_desk_scale(Criterion& c5, Criterion& c6) {
    const DeskScaleContext ctx = make_desk_context();

    Rng init_tf(502);
    DenoiserModel transformer = DenoiserModel::init(desk_model_config(Backbone::transformer), init_tf);
    const DeskScaleArm trained = run_desk_arm(ctx, transformer, true, 503);

    Rng init_untrained(504);
    DenoiserModel untrained = DenoiserModel::init(desk_model_config(Backbone::transformer), init_untrained);
    const DeskScaleArm baseline = run_desk_arm(ctx, untrained, false, 505);

    c5.expect(trained.lds_mean <= 0.30, "LDS " + fmt(trained.lds_mean) + " > 0.30");
    c5.expect(trained.jsd_mean <= 0.10, "JSD " + fmt(trained.jsd_mean) + " > 0.10");
    c5.expect(trained.coverage >= 0.7, "coverage " + fmt(trained.coverage) + " < 0.7");
    c5.expect(baseline.lds_mean - trained.lds_mean >= 0.15,
              "untrained LDS " + fmt(baseline.lds_mean) + " - trained " + fmt(trained.lds_mean) +
                  " < 0.15");
    c5.expect(trained.range_ok, trained.range_detail);
    c5.note("trained: LDS " + fmt(trained.lds_mean) + ", JSD " + fmt(trained.jsd_mean) +
            ", coverage " + fmt(trained.coverage) + ", final loss " + fmt(trained.final_loss) +
            "; untrained LDS " + fmt(baseline.lds_mean));

    Rng init_gru(506);
    DenoiserModel gru = DenoiserModel::init(desk_model_config(Backbone::gru), init_gru);
    const DeskScaleArm gru_arm = run_desk_arm(ctx, gru, true, 507);

    c6.expect(trained.lds_mean <= gru_arm.lds_mean,
              "transformer LDS " + fmt(trained.lds_mean) + " worse than GRU " + fmt(gru_arm.lds_mean));
    c6.expect(trained.jsd_mean <= gru_arm.jsd_mean,
              "transformer JSD " + fmt(trained.jsd_mean) + " worse than GRU " + fmt(gru_arm.jsd_mean));
    c6.note("transformer LDS/JSD " + fmt(trained.lds_mean) + "/" + fmt(trained.jsd_mean) +
            " vs GRU " + fmt(gru_arm.lds_mean) + "/" + fmt(gru_arm.jsd_mean));
}

// ---------------------------------------------------------------------------
// criterion 7: long-sequence capability at N = 384
// ---------------------------------------------------------------------------
Criterion criterion_long_sequence() {
    Criterion c{"7. long-sequence capability (N=384 train + sample smoke)"};
    Rng data_rng(700);
    SequenceBatch all = generate_sine(160, 384, 5, data_rng);
    LoadedDataset ds = split_batch(std::move(all), 0.2);
    const SequenceBatch train_scaled = scale(ds.train, ds.scaler);

    DenoiserConfig cfg;
    cfg.seq_len = 384;
    cfg.feature_dim = 5;
    cfg.hidden_dim = 32;
    cfg.num_layers = 1;
    cfg.num_heads = 2;
    cfg.max_diffusion_steps = 50;
    const NoiseSchedule schedule = cosine_schedule(50);

    Rng init_rng(701);
    DenoiserModel model = DenoiserModel::init(cfg, init_rng);
    TrainConfig tcfg;
    tcfg.epochs = 40;  // 128/32 = 4 steps per epoch -> 160 steps
    tcfg.batch_size = 32;
    tcfg.learning_rate = 1e-3;
    Rng train_rng(702);
    const TrainResult res = train(model, train_scaled, schedule, tcfg, train_rng);
    c.expect(res.steps == 160, "expected 160 optimizer steps, got " + std::to_string(res.steps));
    c.expect(std::isfinite(res.epoch_losses.back()), "non-finite final loss");
    c.expect(res.epoch_losses.back() < res.epoch_losses.front(), "loss did not improve");

    SampleConfig scfg;
    scfg.count = 8;
    scfg.chunk = 8;
    Rng sample_rng(703);
    const SequenceBatch samples_scaled = sample(model, schedule, scfg, sample_rng);
    c.expect(samples_scaled.batch == 8 && samples_scaled.seq_len == 384 &&
                 samples_scaled.feature_dim == 5,
             "sample shape mismatch");

    const SequenceBatch samples_raw = inverse_scale(samples_scaled, ds.scaler);
    bool finite = true;
    for (double v : samples_raw.values) finite = finite && std::isfinite(v);
    c.expect(finite, "non-finite sample values");

    // smoke-depth range envelope: training range +/- one full span per feature
    for (int d = 0; d < 5; ++d) {
        double lo = 1e300, hi = -1e300, tlo = 1e300, thi = -1e300;
        for (int b = 0; b < samples_raw.batch; ++b) {
            for (int n = 0; n < samples_raw.seq_len; ++n) {
                lo = std::min(lo, samples_raw.at(b, n, d));
                hi = std::max(hi, samples_raw.at(b, n, d));
            }
        }
        for (int b = 0; b < ds.train.batch; ++b) {
            for (int n = 0; n < ds.train.seq_len; ++n) {
                tlo = std::min(tlo, ds.train.at(b, n, d));
                thi = std::max(thi, ds.train.at(b, n, d));
            }
        }
        const double span = thi - tlo;
        c.expect(lo >= tlo - span && hi <= thi + span,
                 "feature " + std::to_string(d) + " sample range [" + fmt(lo) + ", " + fmt(hi) +
                     "] outside smoke envelope");
    }
    c.note("final loss " + fmt(res.epoch_losses.back()));
    return c;
}

// ---------------------------------------------------------------------------
// criterion 8: determinism at parallelism 1
// ---------------------------------------------------------------------------
Criterion criterion_determinism() {
    Criterion c{"8. determinism (loss history, samples, metric reports)"};

    auto run_train = [] {
        Rng data_rng(800);
        const SequenceBatch data = generate_sine(64, 8, 2, data_rng);
        DenoiserConfig cfg;
        cfg.seq_len = 8;
        cfg.feature_dim = 2;
        cfg.hidden_dim = 8;
        cfg.num_layers = 1;
        cfg.num_heads = 1;
        cfg.max_diffusion_steps = 10;
        Rng init_rng(801);
        DenoiserModel model = DenoiserModel::init(cfg, init_rng);
        const NoiseSchedule s = cosine_schedule(10);
        TrainConfig tcfg;
        tcfg.epochs = 3;
        tcfg.batch_size = 16;
        tcfg.learning_rate = 1e-3;
        Rng train_rng(802);
        TrainResult res = train(model, data, s, tcfg, train_rng);

        SampleConfig scfg;
        scfg.count = 5;
        Rng sample_rng(803);
        const SequenceBatch samples = sample(model, s, scfg, sample_rng);
        return std::make_pair(res, samples);
    };

    const auto [res_a, samples_a] = run_train();
    const auto [res_b, samples_b] = run_train();
    c.expect(res_a.step_losses == res_b.step_losses, "step losses differ between identical runs");
    c.expect(res_a.epoch_losses == res_b.epoch_losses, "epoch losses differ between identical runs");
    c.expect(samples_a.values == samples_b.values, "samples differ between identical runs");

    Rng pr(804);
    const SequenceBatch real = generate_sine(40, 8, 2, pr);
    const SequenceBatch syn = generate_sine(40, 8, 2, pr);
    MetricConfig mcfg;
    mcfg.repetitions = 3;
    mcfg.hidden_dim = 8;
    mcfg.num_layers = 1;
    mcfg.num_heads = 1;
    mcfg.epochs = 2;
    mcfg.batch_size = 8;
    mcfg.coverage_k = 5;
    mcfg.parallelism = 1;
    mcfg.seed = 805;
    const std::string report_a = suite_to_json(evaluate_all(EvalPair{real, syn}, mcfg), mcfg).dump();
    const std::string report_b = suite_to_json(evaluate_all(EvalPair{real, syn}, mcfg), mcfg).dump();
    c.expect(report_a == report_b, "metric reports differ between identical runs");
    return c;
}

void report(const Criterion& c, double seconds, int& failures) {
    if (!c.pass) ++failures;
    std::printf("[%s] %s (%.1fs)%s%s\n", c.pass ? "PASS" : "FAIL", c.name.c_str(), seconds,
                c.detail.empty() ? "" : " -- ", c.detail.c_str());
    std::fflush(stdout);
}

}  // namespace

int main() {
    int failures = 0;
    double t0 = now_seconds();

    Criterion c1 = criterion_schedule_oracle();
    report(c1, now_seconds() - t0, failures);

    t0 = now_seconds();
    Criterion c2 = criterion_forward_moments();
    report(c2, now_seconds() - t0, failures);

    t0 = now_seconds();
    Criterion c3 = criterion_gradients();
    report(c3, now_seconds() - t0, failures);

    t0 = now_seconds();
    Criterion c4 = criterion_metric_sanity();
    report(c4, now_seconds() - t0, failures);

    t0 = now_seconds();
    Criterion c5{"5. desk-scale end-to-end (sine, 2016 steps, LDS/JSD/coverage gates)"};
    Criterion c6{"6. ablation direction (transformer no worse than GRU on LDS and JSD)"};
    criteria_desk_scale(c5, c6);
    const double desk_seconds = now_seconds() - t0;
    report(c5, desk_seconds, failures);
    report(c6, desk_seconds, failures);

    t0 = now_seconds();
    Criterion c7 = criterion_long_sequence();
    report(c7, now_seconds() - t0, failures);

    t0 = now_seconds();
    Criterion c8 = criterion_determinism();
    report(c8, now_seconds() - t0, failures);

    std::printf("%d of 8 criteria passed\n", 8 - failures);
    return failures;
}
