#pragma once

#include <functional>
#include <vector>

#include "tsdiff/data.hpp"
#include "tsdiff/denoiser.hpp"
#include "tsdiff/rng.hpp"
#include "tsdiff/schedule.hpp"

namespace tsdiff {

struct DiffusionStepSample {
    SequenceBatch x_t;
    std::vector<int> t;       // one timestep per batch element, in {1..T}
    SequenceBatch epsilon;    // the injected noise
};

// x_t = sqrt(abar_t) * x0 + sqrt(1 - abar_t) * eps, eps ~ N(0, I).
// Noise is drawn in (batch, step, feature) row-major order.
// Throws ConfigError when any t is outside {1..T}.
DiffusionStepSample forward_diffuse(const SequenceBatch& x0, const std::vector<int>& t,
                                    const NoiseSchedule& schedule, Rng& rng);

// Mean squared error between predicted and injected noise, averaged over all
// batch/step/feature entries.
double noise_mse(const nn::Mat& predicted, const nn::Mat& target);

// Draws t ~ U{1..T} per element and eps, evaluates the predictor, and returns
// the simplified DDPM objective. The predictor sees ([B*N, D] tokens, t).
// Exposed as a template so oracle predictors can stand in for a model.
template <typename Predictor>
double diffusion_loss(Predictor&& predict, const SequenceBatch& x0, const NoiseSchedule& schedule,
                      Rng& rng) {
    std::vector<int> t(static_cast<std::size_t>(x0.batch));
    for (auto& ti : t) ti = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(schedule.num_steps))) + 1;
    DiffusionStepSample s = forward_diffuse(x0, t, schedule, rng);
    Eigen::Map<const nn::Mat> xt(s.x_t.values.data(),
                                 static_cast<Eigen::Index>(x0.batch) * x0.seq_len, x0.feature_dim);
    Eigen::Map<const nn::Mat> eps(s.epsilon.values.data(), xt.rows(), xt.cols());
    nn::Mat pred = predict(nn::Mat(xt), s.t);
    return noise_mse(pred, eps);
}

// Loss plus the gradient pass through the model. Gradients accumulate into
// the model; callers zero them between steps.
double training_loss(DenoiserModel& model, const SequenceBatch& x0, const NoiseSchedule& schedule,
                     Rng& rng);

struct TrainConfig {
    int epochs = 5000;
    int batch_size = 256;
    double learning_rate = 1e-4;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    double grad_clip = 0.0;          // global-norm threshold, 0 = off
    int checkpoint_interval = 0;     // epochs between checkpoint callbacks, 0 = off
    int divergence_limit = 5;        // consecutive non-finite losses tolerated

    void validate() const;
};

struct TrainResult {
    std::vector<double> epoch_losses;  // mean step loss per epoch
    std::vector<double> step_losses;
    int steps = 0;
};

using CheckpointCallback = std::function<void(int epoch, DenoiserModel& model)>;

// Adam on the simplified objective. Shuffles the dataset without replacement
// each epoch. Skips the update on a non-finite loss and aborts with
// NumericError once divergence_limit consecutive steps are non-finite.
TrainResult train(DenoiserModel& model, const SequenceBatch& data, const NoiseSchedule& schedule,
                  const TrainConfig& config, Rng& rng,
                  const CheckpointCallback& on_checkpoint = nullptr);

struct SampleConfig {
    int count = 1;
    int chunk = 64;  // sequences generated per reverse-loop pass
};

// Ancestral sampling: x_T ~ N(0, I), then for t = T..1
//   x_{t-1} = (x_t - beta_t / sqrt(1 - abar_t) * eps_theta(x_t, t)) / sqrt(alpha_t)
//             + sigma_t * z,   z ~ N(0, I) for t > 1, z = 0 at t = 1.
// Draw order per chunk: all of x_T first, then one z batch per step t = T..2.
// Output stays in the model's (scaled) space. Throws NumericError naming the
// step if a non-finite value appears.
SequenceBatch sample(const DenoiserModel& model, const NoiseSchedule& schedule,
                     const SampleConfig& config, Rng& rng);

}  // namespace tsdiff
