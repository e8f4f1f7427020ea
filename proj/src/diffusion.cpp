#include "tsdiff/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "tsdiff/errors.hpp"

namespace tsdiff {

DiffusionStepSample forward_diffuse(const SequenceBatch& x0, const std::vector<int>& t,
                                    const NoiseSchedule& schedule, Rng& rng) {
    if (static_cast<int>(t.size()) != x0.batch) {
        throw ConfigError("forward_diffuse: t has " + std::to_string(t.size()) +
                          " entries for batch " + std::to_string(x0.batch));
    }
    for (int ti : t) {
        if (ti < 1 || ti > schedule.num_steps) {
            throw ConfigError("forward_diffuse: timestep " + std::to_string(ti) + " outside {1.." +
                              std::to_string(schedule.num_steps) + "}");
        }
    }

    DiffusionStepSample s;
    s.t = t;
    s.x_t = make_batch(x0.batch, x0.seq_len, x0.feature_dim);
    s.epsilon = make_batch(x0.batch, x0.seq_len, x0.feature_dim);
    for (int b = 0; b < x0.batch; ++b) {
        const double abar = schedule.alpha_bar(t[static_cast<std::size_t>(b)]);
        const double signal = std::sqrt(abar);
        const double noise = std::sqrt(1.0 - abar);
        for (int n = 0; n < x0.seq_len; ++n) {
            for (int d = 0; d < x0.feature_dim; ++d) {
                const double eps = rng.gaussian();
                s.epsilon.at(b, n, d) = eps;
                s.x_t.at(b, n, d) = signal * x0.at(b, n, d) + noise * eps;
            }
        }
    }
    return s;
}

double noise_mse(const nn::Mat& predicted, const nn::Mat& target) {
    return (predicted - target).squaredNorm() / static_cast<double>(predicted.size());
}

double training_loss(DenoiserModel& model, const SequenceBatch& x0, const NoiseSchedule& schedule,
                     Rng& rng) {
    std::vector<int> t(static_cast<std::size_t>(x0.batch));
    for (auto& ti : t) {
        ti = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(schedule.num_steps))) + 1;
    }
    DiffusionStepSample s = forward_diffuse(x0, t, schedule, rng);
    Eigen::Map<const nn::Mat> xt(s.x_t.values.data(),
                                 static_cast<Eigen::Index>(x0.batch) * x0.seq_len, x0.feature_dim);
    Eigen::Map<const nn::Mat> eps(s.epsilon.values.data(), xt.rows(), xt.cols());

    DenoiserCache cache;
    const nn::Mat x_in = xt;
    nn::Mat pred = model.forward(x_in, s.t, &cache, model.config().dropout > 0.0 ? &rng : nullptr);
    const double loss = noise_mse(pred, eps);
    nn::Mat dpred = 2.0 * (pred - eps) / static_cast<double>(pred.size());
    model.backward(dpred, cache);
    return loss;
}

void TrainConfig::validate() const {
    if (epochs < 0) throw ConfigError("train.epochs: must be >= 0, got " + std::to_string(epochs));
    if (batch_size < 1) throw ConfigError("train.batch_size: must be >= 1, got " + std::to_string(batch_size));
    if (!(learning_rate > 0.0)) throw ConfigError("train.learning_rate: must be > 0");
    if (grad_clip < 0.0) throw ConfigError("train.grad_clip: must be >= 0");
    if (checkpoint_interval < 0) throw ConfigError("train.checkpoint_interval: must be >= 0");
    if (divergence_limit < 1) throw ConfigError("train.divergence_limit: must be >= 1");
}

TrainResult train(DenoiserModel& model, const SequenceBatch& data, const NoiseSchedule& schedule,
                  const TrainConfig& config, Rng& rng, const CheckpointCallback& on_checkpoint) {
    config.validate();
    if (data.batch < 1) throw DataError("train: empty dataset");
    if (data.seq_len != model.config().seq_len || data.feature_dim != model.config().feature_dim) {
        throw ConfigError("train: dataset shape [N=" + std::to_string(data.seq_len) + ", D=" +
                          std::to_string(data.feature_dim) + "] does not match denoiser config [N=" +
                          std::to_string(model.config().seq_len) + ", D=" +
                          std::to_string(model.config().feature_dim) + "]");
    }

    TrainResult result;
    if (config.epochs == 0) return result;

    nn::AdamConfig adam_cfg;
    adam_cfg.learning_rate = config.learning_rate;
    adam_cfg.beta1 = config.adam_beta1;
    adam_cfg.beta2 = config.adam_beta2;
    adam_cfg.eps = config.adam_eps;
    adam_cfg.grad_clip = config.grad_clip;
    nn::Adam opt(adam_cfg);
    std::vector<nn::ParamRef> params = model.params();

    std::vector<int> order(static_cast<std::size_t>(data.batch));
    std::iota(order.begin(), order.end(), 0);
    const std::size_t per_seq = static_cast<std::size_t>(data.seq_len) * data.feature_dim;

    int consecutive_bad = 0;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_sum = 0.0;
        int epoch_steps = 0;
        for (int start = 0; start < data.batch; start += config.batch_size) {
            const int bsize = std::min(config.batch_size, data.batch - start);
            SequenceBatch batch = make_batch(bsize, data.seq_len, data.feature_dim);
            for (int i = 0; i < bsize; ++i) {
                const int src = order[static_cast<std::size_t>(start + i)];
                std::copy_n(data.values.begin() + static_cast<std::ptrdiff_t>(per_seq) * src, per_seq,
                            batch.values.begin() + static_cast<std::ptrdiff_t>(per_seq) * i);
            }

            model.zero_grads();
            const double loss = training_loss(model, batch, schedule, rng);
            if (!std::isfinite(loss)) {
                ++consecutive_bad;
                if (consecutive_bad >= config.divergence_limit) {
                    throw NumericError("train: loss non-finite for " +
                                       std::to_string(consecutive_bad) +
                                       " consecutive steps (step " + std::to_string(result.steps) +
                                       ", epoch " + std::to_string(epoch) + ")");
                }
                // skip the update; parameters stay finite
                result.step_losses.push_back(loss);
                ++result.steps;
                continue;
            }
            consecutive_bad = 0;
            opt.step(params);
            result.step_losses.push_back(loss);
            epoch_sum += loss;
            ++epoch_steps;
            ++result.steps;
        }
        result.epoch_losses.push_back(epoch_steps > 0 ? epoch_sum / epoch_steps
                                                      : std::numeric_limits<double>::quiet_NaN());
        if (on_checkpoint && config.checkpoint_interval > 0 &&
            (epoch + 1) % config.checkpoint_interval == 0) {
            on_checkpoint(epoch + 1, model);
        }
    }
    return result;
}

SequenceBatch sample(const DenoiserModel& model, const NoiseSchedule& schedule,
                     const SampleConfig& config, Rng& rng) {
    if (config.count < 1) throw ConfigError("sample.count: must be >= 1");
    if (config.chunk < 1) throw ConfigError("sample.chunk: must be >= 1");
    const int n = model.config().seq_len;
    const int d = model.config().feature_dim;

    SequenceBatch out = make_batch(config.count, n, d);
    const std::size_t per_seq = static_cast<std::size_t>(n) * d;

    for (int start = 0; start < config.count; start += config.chunk) {
        const int bsize = std::min(config.chunk, config.count - start);
        const Eigen::Index rows = static_cast<Eigen::Index>(bsize) * n;
        nn::Mat x(rows, d);
        for (Eigen::Index i = 0; i < rows; ++i) {
            for (int j = 0; j < d; ++j) x(i, j) = rng.gaussian();
        }

        std::vector<int> t_vec(static_cast<std::size_t>(bsize));
        for (int t = schedule.num_steps; t >= 1; --t) {
            std::fill(t_vec.begin(), t_vec.end(), t);
            const nn::Mat eps = model.predict(x, t_vec);
            const double alpha = schedule.alpha(t);
            const double beta = schedule.beta(t);
            const double abar = schedule.alpha_bar(t);
            const double coef = beta / std::sqrt(1.0 - abar);
            const double inv_sqrt_alpha = 1.0 / std::sqrt(alpha);
            x = inv_sqrt_alpha * (x - coef * eps);
            if (t > 1) {
                const double sigma = schedule.sigma(t);
                for (Eigen::Index i = 0; i < rows; ++i) {
                    for (int j = 0; j < d; ++j) x(i, j) += sigma * rng.gaussian();
                }
            }
            if (!x.allFinite()) {
                throw NumericError("sample: non-finite value at reverse step t=" + std::to_string(t));
            }
        }
        std::copy_n(x.data(), per_seq * static_cast<std::size_t>(bsize),
                    out.values.begin() + static_cast<std::ptrdiff_t>(per_seq) * start);
    }
    return out;
}

}  // namespace tsdiff
