#include "tsdiff/metrics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <thread>

#include "tsdiff/errors.hpp"

namespace tsdiff {

namespace {

using nn::Mat;

struct RepOutcome {
    double score = 0.0;
    std::map<std::string, double> aux;
};

template <typename Fn>
std::vector<RepOutcome> run_reps(int reps, int parallelism, Fn fn) {
    std::vector<RepOutcome> out(static_cast<std::size_t>(reps));
    if (parallelism <= 1 || reps <= 1) {
        for (int i = 0; i < reps; ++i) out[static_cast<std::size_t>(i)] = fn(i);
        return out;
    }
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int i = next.fetch_add(1); i < reps; i = next.fetch_add(1)) {
            out[static_cast<std::size_t>(i)] = fn(i);
        }
    };
    std::vector<std::thread> pool;
    const int threads = std::min(parallelism, reps);
    pool.reserve(static_cast<std::size_t>(threads));
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    return out;
}

// Tokens [count*seq_len, D] for the selected sequences of a batch.
Mat gather_tokens(const SequenceBatch& batch, const std::vector<int>& idx, int seq_from,
                  int seq_to) {
    const int span = seq_to - seq_from;
    Mat x(static_cast<Eigen::Index>(idx.size()) * span, batch.feature_dim);
    Eigen::Index row = 0;
    for (int b : idx) {
        for (int n = seq_from; n < seq_to; ++n) {
            for (int d = 0; d < batch.feature_dim; ++d) x(row, d) = batch.at(b, n, d);
            ++row;
        }
    }
    return x;
}

// Flat targets [count, span*D] for the tail steps of the selected sequences.
Mat gather_targets(const SequenceBatch& batch, const std::vector<int>& idx, int seq_from) {
    const int span = batch.seq_len - seq_from;
    Mat y(static_cast<Eigen::Index>(idx.size()), static_cast<Eigen::Index>(span) * batch.feature_dim);
    for (std::size_t i = 0; i < idx.size(); ++i) {
        Eigen::Index col = 0;
        for (int n = seq_from; n < batch.seq_len; ++n) {
            for (int d = 0; d < batch.feature_dim; ++d) {
                y(static_cast<Eigen::Index>(i), col++) = batch.at(idx[i], n, d);
            }
        }
    }
    return y;
}

std::vector<int> identity_perm(int n) {
    std::vector<int> v(static_cast<std::size_t>(n));
    std::iota(v.begin(), v.end(), 0);
    return v;
}

// Classifier / predictor share this shape: encoder trunk, mean pool, linear
// head. The head starts at zero.
struct PooledNet {
    nn::EncoderTrunk trunk;
    nn::Linear head;
    int seq_len = 0;

    void init(int seq_len_in, int in_dim, int out_dim, const MetricConfig& cfg, Rng& rng) {
        seq_len = seq_len_in;
        trunk.init(seq_len_in, in_dim, cfg.hidden_dim, cfg.num_layers, cfg.num_heads,
                   4 * cfg.hidden_dim, 0.0, rng);
        head.init_zero(cfg.hidden_dim, out_dim);
    }

    Mat forward(const Mat& x, int batch, nn::TrunkCache* cache, Mat* pooled_out) const {
        Mat tokens = trunk.forward(x, batch, Mat(), cache, nullptr);
        Mat pooled = nn::mean_pool(tokens, batch, seq_len);
        Mat logits = head.forward(pooled);
        if (pooled_out) *pooled_out = std::move(pooled);
        return logits;
    }

    void backward(const Mat& dlogits, const Mat& pooled, int batch, nn::TrunkCache& cache) {
        Mat dpooled = head.backward(pooled, dlogits);
        Mat dtokens = nn::mean_pool_backward(dpooled, batch, seq_len);
        trunk.backward(dtokens, batch, cache, nullptr);
    }

    std::vector<nn::ParamRef> params() {
        std::vector<nn::ParamRef> out;
        trunk.collect("trunk", out);
        head.collect("head", out);
        return out;
    }
};

// Cross-entropy on 2 logits against a constant label for the whole block.
// Returns the summed loss; writes dlogits scaled by inv_count.
double ce_block(const Mat& logits, int label, double inv_count, Mat& dlogits) {
    double loss = 0.0;
    dlogits.resize(logits.rows(), 2);
    for (Eigen::Index r = 0; r < logits.rows(); ++r) {
        const double mx = std::max(logits(r, 0), logits(r, 1));
        const double e0 = std::exp(logits(r, 0) - mx);
        const double e1 = std::exp(logits(r, 1) - mx);
        const double z = e0 + e1;
        const double p0 = e0 / z;
        const double p1 = e1 / z;
        loss -= std::log(label == 1 ? p1 : p0);
        dlogits(r, 0) = (p0 - (label == 0 ? 1.0 : 0.0)) * inv_count;
        dlogits(r, 1) = (p1 - (label == 1 ? 1.0 : 0.0)) * inv_count;
    }
    return loss;
}

}  // namespace

void EvalPair::validate() const {
    if (real.empty() || synthetic.empty()) throw DataError("evaluation pair: both sides must be non-empty");
    if (real.seq_len != synthetic.seq_len || real.feature_dim != synthetic.feature_dim) {
        throw DataError("evaluation pair: shape mismatch (real [N=" + std::to_string(real.seq_len) +
                        ", D=" + std::to_string(real.feature_dim) + "], synthetic [N=" +
                        std::to_string(synthetic.seq_len) + ", D=" +
                        std::to_string(synthetic.feature_dim) + "])");
    }
    for (double v : real.values) {
        if (!std::isfinite(v)) throw DataError("evaluation pair: non-finite value in real data");
    }
    for (double v : synthetic.values) {
        if (!std::isfinite(v)) throw DataError("evaluation pair: non-finite value in synthetic data");
    }
}

void MetricConfig::validate() const {
    if (repetitions < 1) throw ConfigError("metrics.repetitions: must be >= 1");
    if (hidden_dim < 1) throw ConfigError("metrics.hidden_dim: must be >= 1");
    if (num_layers < 1) throw ConfigError("metrics.num_layers: must be >= 1");
    if (num_heads < 1 || hidden_dim % num_heads != 0) {
        throw ConfigError("metrics.num_heads: hidden_dim " + std::to_string(hidden_dim) +
                          " must be divisible by num_heads " + std::to_string(num_heads));
    }
    if (epochs < 0) throw ConfigError("metrics.epochs: must be >= 0");
    if (batch_size < 2) throw ConfigError("metrics.batch_size: must be >= 2");
    if (!(learning_rate > 0.0)) throw ConfigError("metrics.learning_rate: must be > 0");
    if (jsd_bins < 2) throw ConfigError("metrics.jsd_bins: must be >= 2");
    if (coverage_k < 1) throw ConfigError("metrics.coverage_k: must be >= 1");
    if (alpha_grid.empty()) throw ConfigError("metrics.alpha_grid: must be non-empty");
    for (double a : alpha_grid) {
        if (!(a > 0.0 && a < 1.0)) throw ConfigError("metrics.alpha_grid: values must lie in (0, 1)");
    }
    if (parallelism < 1) throw ConfigError("metrics.parallelism: must be >= 1");
}

MetricReport MetricReport::from_runs(std::string name, std::vector<double> runs) {
    MetricReport r;
    r.name = std::move(name);
    r.runs = std::move(runs);
    r.run_count = static_cast<int>(r.runs.size());
    if (r.run_count > 0) {
        r.mean = std::accumulate(r.runs.begin(), r.runs.end(), 0.0) / r.run_count;
        if (r.run_count > 1) {
            double sq = 0.0;
            for (double v : r.runs) sq += (v - r.mean) * (v - r.mean);
            r.stddev = std::sqrt(sq / (r.run_count - 1));
        }
    }
    return r;
}

double lds_score_from_accuracy(double accuracy) { return std::abs(0.5 - accuracy); }

ScalerState pooled_scaler(const EvalPair& pair) {
    ScalerState s = fit_scaler(pair.real);
    const ScalerState syn = fit_scaler(pair.synthetic);
    for (int d = 0; d < pair.real.feature_dim; ++d) {
        const auto di = static_cast<std::size_t>(d);
        s.feature_min[di] = std::min(s.feature_min[di], syn.feature_min[di]);
        s.feature_max[di] = std::max(s.feature_max[di], syn.feature_max[di]);
    }
    return s;
}

MetricReport lds(const EvalPair& pair, const MetricConfig& config) {
    pair.validate();
    config.validate();
    if (pair.real.batch < 32 || pair.synthetic.batch < 32) {
        throw DataError("lds: need >= 32 sequences per side, got " + std::to_string(pair.real.batch) +
                        " real / " + std::to_string(pair.synthetic.batch) + " synthetic");
    }

    const ScalerState scaler = pooled_scaler(pair);
    const SequenceBatch real_s = scale(pair.real, scaler);
    const SequenceBatch syn_s = scale(pair.synthetic, scaler);
    const int n = real_s.seq_len;
    const int m = std::min(real_s.batch, syn_s.batch);
    const int train_m = static_cast<int>(std::llround(0.8 * m));
    const int test_m = m - train_m;
    if (train_m < 1 || test_m < 1) throw DataError("lds: split leaves an empty train or test set");

    // Every rep draws train_m/test_m sequences from each side, so the splits
    // are balanced by construction; reject if that ever stops holding.
    auto imbalance = [](int a, int b) {
        return std::abs(a - b) / static_cast<double>(a + b);
    };
    if (imbalance(train_m, train_m) > 0.10 || imbalance(test_m, test_m) > 0.10) {
        throw DataError("lds: class imbalance above 10% after splitting");
    }

    const int half = std::max(1, config.batch_size / 2);

    auto run = [&](int rep) -> RepOutcome {
        const std::uint64_t rep_seed = derive_seed(config.seed, "metric:lds:rep" + std::to_string(rep));
        // Identical permutation seeds per side keep the score exactly
        // symmetric under swapping real and synthetic.
        std::vector<int> perm_real = identity_perm(real_s.batch);
        std::vector<int> perm_syn = identity_perm(syn_s.batch);
        {
            Rng pr(derive_seed(rep_seed, "perm"));
            pr.shuffle(perm_real);
        }
        {
            Rng ps(derive_seed(rep_seed, "perm"));
            ps.shuffle(perm_syn);
        }
        std::vector<int> train_real(perm_real.begin(), perm_real.begin() + train_m);
        std::vector<int> test_real(perm_real.begin() + train_m, perm_real.begin() + m);
        std::vector<int> train_syn(perm_syn.begin(), perm_syn.begin() + train_m);
        std::vector<int> test_syn(perm_syn.begin() + train_m, perm_syn.begin() + m);

        Rng model_rng(derive_seed(rep_seed, "model"));
        PooledNet net;
        net.init(n, real_s.feature_dim, 2, config, model_rng);
        auto params = net.params();
        nn::AdamConfig adam_cfg;
        adam_cfg.learning_rate = config.learning_rate;
        nn::Adam opt(adam_cfg);

        Rng order_real(derive_seed(rep_seed, "order"));
        Rng order_syn(derive_seed(rep_seed, "order"));
        const int steps_per_epoch = train_m / half;
        for (int epoch = 0; epoch < config.epochs; ++epoch) {
            order_real.shuffle(train_real);
            order_syn.shuffle(train_syn);
            for (int s = 0; s < steps_per_epoch; ++s) {
                nn::zero_grads(params);
                const double inv_count = 1.0 / static_cast<double>(2 * half);
                for (int cls = 0; cls < 2; ++cls) {
                    const auto& src = cls == 0 ? train_real : train_syn;
                    const auto& side = cls == 0 ? real_s : syn_s;
                    const int label = cls == 0 ? 1 : 0;
                    std::vector<int> block(src.begin() + static_cast<std::ptrdiff_t>(s) * half,
                                           src.begin() + static_cast<std::ptrdiff_t>(s + 1) * half);
                    const Mat x = gather_tokens(side, block, 0, n);
                    nn::TrunkCache cache;
                    Mat pooled;
                    const Mat logits = net.forward(x, half, &cache, &pooled);
                    Mat dlogits;
                    ce_block(logits, label, inv_count, dlogits);
                    net.backward(dlogits, pooled, half, cache);
                }
                opt.step(params);
            }
        }

        // test accuracy + per-class F1 (class 1 = real, class 0 = synthetic)
        long long tp1 = 0, fp1 = 0, fn1 = 0, tp0 = 0, fp0 = 0, fn0 = 0, correct = 0;
        auto eval_block = [&](const SequenceBatch& side, const std::vector<int>& idx, int label) {
            const Mat x = gather_tokens(side, idx, 0, n);
            const Mat logits = net.forward(x, static_cast<int>(idx.size()), nullptr, nullptr);
            for (Eigen::Index r = 0; r < logits.rows(); ++r) {
                const int pred = logits(r, 1) > logits(r, 0) ? 1 : 0;
                if (pred == label) ++correct;
                if (label == 1 && pred == 1) ++tp1;
                if (label == 0 && pred == 1) ++fp1;
                if (label == 1 && pred == 0) ++fn1;
                if (label == 0 && pred == 0) ++tp0;
                if (label == 1 && pred == 0) ++fp0;
                if (label == 0 && pred == 1) ++fn0;
            }
        };
        eval_block(real_s, test_real, 1);
        eval_block(syn_s, test_syn, 0);

        const double acc = static_cast<double>(correct) / static_cast<double>(2 * test_m);
        auto f1 = [](long long tp, long long fp, long long fn) {
            const double denom = static_cast<double>(2 * tp + fp + fn);
            return denom > 0.0 ? 2.0 * static_cast<double>(tp) / denom : 0.0;
        };
        RepOutcome out;
        out.score = lds_score_from_accuracy(acc);
        out.aux["f1_real"] = f1(tp1, fp1, fn1);
        out.aux["f1_synthetic"] = f1(tp0, fp0, fn0);
        return out;
    };

    const auto outcomes = run_reps(config.repetitions, config.parallelism, run);
    std::vector<double> scores;
    double f1r = 0.0, f1s = 0.0;
    for (const auto& o : outcomes) {
        scores.push_back(o.score);
        f1r += o.aux.at("f1_real");
        f1s += o.aux.at("f1_synthetic");
    }
    MetricReport report = MetricReport::from_runs("lds", std::move(scores));
    report.aux["f1_real"] = f1r / config.repetitions;
    report.aux["f1_synthetic"] = f1s / config.repetitions;
    return report;
}

double evaluate_predictor_mae(const std::function<Mat(const Mat&, int batch)>& predict,
                              const SequenceBatch& real_scaled, int horizon) {
    const int n = real_scaled.seq_len;
    const int input_len = n - horizon;
    if (input_len < 1) throw ConfigError("lps: horizon " + std::to_string(horizon) +
                                         " must be smaller than sequence length " + std::to_string(n));
    const std::vector<int> all = identity_perm(real_scaled.batch);
    const Mat x = gather_tokens(real_scaled, all, 0, input_len);
    const Mat target = gather_targets(real_scaled, all, input_len);
    const Mat pred = predict(x, real_scaled.batch);
    if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
        throw ConfigError("lps: predictor output shape mismatch");
    }
    return (pred - target).cwiseAbs().sum() / static_cast<double>(target.size());
}

MetricReport lps(const EvalPair& pair, int horizon, const MetricConfig& config) {
    pair.validate();
    config.validate();
    const int n = pair.real.seq_len;
    if (horizon < 1 || horizon >= n) {
        throw ConfigError("lps: horizon must satisfy 1 <= horizon < N, got horizon=" +
                          std::to_string(horizon) + ", N=" + std::to_string(n));
    }
    const ScalerState scaler = pooled_scaler(pair);
    const SequenceBatch real_s = scale(pair.real, scaler);
    const SequenceBatch syn_s = scale(pair.synthetic, scaler);
    const int input_len = n - horizon;
    const int out_dim = horizon * real_s.feature_dim;

    auto run = [&](int rep) -> RepOutcome {
        const std::uint64_t rep_seed =
            derive_seed(config.seed, "metric:lps" + std::to_string(horizon) + ":rep" + std::to_string(rep));
        Rng model_rng(derive_seed(rep_seed, "model"));
        PooledNet net;
        net.init(input_len, syn_s.feature_dim, out_dim, config, model_rng);
        auto params = net.params();
        nn::AdamConfig adam_cfg;
        adam_cfg.learning_rate = config.learning_rate;
        nn::Adam opt(adam_cfg);

        std::vector<int> order = identity_perm(syn_s.batch);
        Rng order_rng(derive_seed(rep_seed, "order"));
        for (int epoch = 0; epoch < config.epochs; ++epoch) {
            order_rng.shuffle(order);
            for (int start = 0; start + config.batch_size <= syn_s.batch || start == 0;
                 start += config.batch_size) {
                const int bsize = std::min(config.batch_size, syn_s.batch - start);
                if (bsize < 1) break;
                std::vector<int> block(order.begin() + start, order.begin() + start + bsize);
                const Mat x = gather_tokens(syn_s, block, 0, input_len);
                const Mat target = gather_targets(syn_s, block, input_len);
                nn::zero_grads(params);
                nn::TrunkCache cache;
                Mat pooled;
                const Mat pred = net.forward(x, bsize, &cache, &pooled);
                const Mat dpred = 2.0 * (pred - target) / static_cast<double>(pred.size());
                net.backward(dpred, pooled, bsize, cache);
                opt.step(params);
            }
        }

        RepOutcome out;
        out.score = evaluate_predictor_mae(
            [&](const Mat& x, int batch) { return net.forward(x, batch, nullptr, nullptr); }, real_s,
            horizon);
        return out;
    };

    const auto outcomes = run_reps(config.repetitions, config.parallelism, run);
    std::vector<double> scores;
    for (const auto& o : outcomes) scores.push_back(o.score);
    return MetricReport::from_runs(horizon == 1 ? "lps" : "plus_" + std::to_string(horizon) + "_steps",
                                   std::move(scores));
}

double jsd_value(const EvalPair& pair, int bins) {
    pair.validate();
    if (bins < 2) throw ConfigError("jsd: bins must be >= 2");
    const int dims = pair.real.feature_dim;
    double total = 0.0;
    std::vector<double> p(static_cast<std::size_t>(bins));
    std::vector<double> q(static_cast<std::size_t>(bins));
    for (int d = 0; d < dims; ++d) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        auto scan = [&](const SequenceBatch& sb) {
            for (int b = 0; b < sb.batch; ++b) {
                for (int n = 0; n < sb.seq_len; ++n) {
                    lo = std::min(lo, sb.at(b, n, d));
                    hi = std::max(hi, sb.at(b, n, d));
                }
            }
        };
        scan(pair.real);
        scan(pair.synthetic);
        if (hi == lo) continue;  // single shared value: identical point masses

        std::fill(p.begin(), p.end(), 0.0);
        std::fill(q.begin(), q.end(), 0.0);
        const double width = (hi - lo) / bins;
        auto fill_hist = [&](const SequenceBatch& sb, std::vector<double>& h) {
            for (int b = 0; b < sb.batch; ++b) {
                for (int n = 0; n < sb.seq_len; ++n) {
                    int idx = static_cast<int>((sb.at(b, n, d) - lo) / width);
                    idx = std::clamp(idx, 0, bins - 1);
                    h[static_cast<std::size_t>(idx)] += 1.0;
                }
            }
            const double total_mass = std::accumulate(h.begin(), h.end(), 0.0);
            for (double& v : h) v /= total_mass;
        };
        fill_hist(pair.real, p);
        fill_hist(pair.synthetic, q);

        double div = 0.0;
        for (int i = 0; i < bins; ++i) {
            const auto ii = static_cast<std::size_t>(i);
            const double m = 0.5 * (p[ii] + q[ii]);
            if (p[ii] > 0.0) div += 0.5 * p[ii] * std::log2(p[ii] / m);
            if (q[ii] > 0.0) div += 0.5 * q[ii] * std::log2(q[ii] / m);
        }
        total += div;
    }
    return total / dims;
}

MetricReport jsd(const EvalPair& pair, const MetricConfig& config) {
    config.validate();
    const double v = jsd_value(pair, config.jsd_bins);
    return MetricReport::from_runs("jsd",
                                   std::vector<double>(static_cast<std::size_t>(config.repetitions), v));
}

namespace {

// Flattened [N*D] embeddings, one row per sequence (scaled space).
Mat flatten_embeddings(const SequenceBatch& sb) {
    return Eigen::Map<const Mat>(sb.values.data(), sb.batch,
                                 static_cast<Eigen::Index>(sb.seq_len) * sb.feature_dim);
}

// Mean over the alpha grid of the fraction of `points` inside the
// alpha-quantile ball of `ref` distances around the ref mean.
double quantile_support_score(const Mat& ref, const Mat& points, const std::vector<double>& grid) {
    const Eigen::RowVectorXd center = ref.colwise().mean();
    std::vector<double> ref_dist(static_cast<std::size_t>(ref.rows()));
    for (Eigen::Index i = 0; i < ref.rows(); ++i) {
        ref_dist[static_cast<std::size_t>(i)] = (ref.row(i) - center).norm();
    }
    std::sort(ref_dist.begin(), ref_dist.end());

    std::vector<double> pt_dist(static_cast<std::size_t>(points.rows()));
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        pt_dist[static_cast<std::size_t>(i)] = (points.row(i) - center).norm();
    }

    const auto n_ref = static_cast<double>(ref_dist.size());
    double acc = 0.0;
    for (double alpha : grid) {
        const auto k = static_cast<std::size_t>(
            std::clamp<long long>(static_cast<long long>(std::ceil(alpha * n_ref)), 1,
                                  static_cast<long long>(ref_dist.size())));
        const double radius = ref_dist[k - 1];
        long long inside = 0;
        for (double dv : pt_dist) {
            if (dv <= radius) ++inside;
        }
        acc += static_cast<double>(inside) / static_cast<double>(pt_dist.size());
    }
    return acc / static_cast<double>(grid.size());
}

}  // namespace

PrcScores precision_recall_coverage(const EvalPair& pair, const MetricConfig& config) {
    pair.validate();
    config.validate();
    if (config.coverage_k >= pair.real.batch) {
        throw ConfigError("metrics.coverage_k: k=" + std::to_string(config.coverage_k) +
                          " must be smaller than the number of real sequences (" +
                          std::to_string(pair.real.batch) + ")");
    }

    const ScalerState scaler = pooled_scaler(pair);
    const SequenceBatch real_s = scale(pair.real, scaler);
    const SequenceBatch syn_s = scale(pair.synthetic, scaler);
    const Mat er = flatten_embeddings(real_s);
    const Mat es = flatten_embeddings(syn_s);

    const double precision = quantile_support_score(er, es, config.alpha_grid);
    const double recall = quantile_support_score(es, er, config.alpha_grid);

    // coverage: real i is covered when a synthetic point falls inside its
    // k-th-nearest-real-neighbor ball
    const auto n_real = er.rows();
    long long covered = 0;
    std::vector<double> dist_buf(static_cast<std::size_t>(n_real - 1));
    for (Eigen::Index i = 0; i < n_real; ++i) {
        std::size_t w = 0;
        for (Eigen::Index j = 0; j < n_real; ++j) {
            if (j == i) continue;
            dist_buf[w++] = (er.row(i) - er.row(j)).norm();
        }
        std::nth_element(dist_buf.begin(), dist_buf.begin() + (config.coverage_k - 1), dist_buf.end());
        const double radius = dist_buf[static_cast<std::size_t>(config.coverage_k - 1)];
        for (Eigen::Index j = 0; j < es.rows(); ++j) {
            if ((er.row(i) - es.row(j)).norm() <= radius) {
                ++covered;
                break;
            }
        }
    }
    const double coverage = static_cast<double>(covered) / static_cast<double>(n_real);

    const auto reps = static_cast<std::size_t>(config.repetitions);
    PrcScores out;
    out.alpha_precision = MetricReport::from_runs("alpha_precision", std::vector<double>(reps, precision));
    out.beta_recall = MetricReport::from_runs("beta_recall", std::vector<double>(reps, recall));
    out.coverage = MetricReport::from_runs("coverage", std::vector<double>(reps, coverage));
    return out;
}

EvaluationSuite evaluate_all(const EvalPair& pair, const MetricConfig& config) {
    pair.validate();
    config.validate();
    EvaluationSuite suite;
    suite.reports.push_back(lds(pair, config));
    suite.reports.push_back(lps(pair, 1, config));
    suite.reports.push_back(jsd(pair, config));
    PrcScores prc = precision_recall_coverage(pair, config);
    suite.reports.push_back(std::move(prc.alpha_precision));
    suite.reports.push_back(std::move(prc.beta_recall));
    suite.reports.push_back(std::move(prc.coverage));
    if (pair.real.seq_len > 5) suite.reports.push_back(lps(pair, 5, config));
    return suite;
}

std::uint64_t metric_config_digest(const MetricConfig& config) {
    nlohmann::json j;
    j["repetitions"] = config.repetitions;
    j["hidden_dim"] = config.hidden_dim;
    j["num_layers"] = config.num_layers;
    j["num_heads"] = config.num_heads;
    j["epochs"] = config.epochs;
    j["batch_size"] = config.batch_size;
    j["learning_rate"] = config.learning_rate;
    j["jsd_bins"] = config.jsd_bins;
    j["coverage_k"] = config.coverage_k;
    j["alpha_grid"] = config.alpha_grid;
    return detail::fnv1a64(j.dump());
}

nlohmann::json report_to_json(const MetricReport& report, const MetricConfig& config) {
    char digest[32];
    std::snprintf(digest, sizeof(digest), "%016llx",
                  static_cast<unsigned long long>(metric_config_digest(config)));
    nlohmann::json j;
    j["metric"] = report.name;
    j["runs"] = report.runs;
    j["mean"] = report.mean;
    j["std"] = report.stddev;
    j["run_count"] = report.run_count;
    if (!report.aux.empty()) j["aux"] = report.aux;
    j["config_digest"] = digest;
    j["seed"] = config.seed;
    return j;
}

nlohmann::json suite_to_json(const EvaluationSuite& suite, const MetricConfig& config) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& r : suite.reports) j.push_back(report_to_json(r, config));
    return j;
}

std::string render_table(const EvaluationSuite& suite) {
    std::string out;
    char line[128];
    std::snprintf(line, sizeof(line), "%-18s %12s %12s %6s\n", "metric", "mean", "std", "runs");
    out += line;
    out += std::string(50, '-') + "\n";
    for (const auto& r : suite.reports) {
        std::snprintf(line, sizeof(line), "%-18s %12.4f %12.4f %6d\n", r.name.c_str(), r.mean,
                      r.stddev, r.run_count);
        out += line;
    }
    return out;
}

}  // namespace tsdiff
