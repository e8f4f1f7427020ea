#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tsdiff/nn.hpp"
#include "tsdiff/rng.hpp"

namespace tsdiff {

enum class Backbone { transformer, gru };

Backbone backbone_from_string(const std::string& s);
std::string to_string(Backbone b);

struct DenoiserConfig {
    Backbone backbone = Backbone::transformer;
    int seq_len = 0;
    int feature_dim = 0;
    int hidden_dim = 256;
    int num_layers = 6;
    int num_heads = 8;              // transformer only
    int feedforward_dim = 0;        // 0 -> 4 * hidden_dim
    double dropout = 0.0;
    int max_diffusion_steps = 1000;

    int ff_dim() const { return feedforward_dim > 0 ? feedforward_dim : 4 * hidden_dim; }
    // Throws ConfigError listing every invalid field.
    void validate() const;
};

struct DenoiserCache {
    nn::Mat x;                        // [B*N, D]
    nn::Mat time_emb, time_pre, time_post, time_out;  // timestep-embedding path
    nn::TrunkCache trunk;             // transformer path
    std::vector<nn::GruCache> gru;    // gru path
    nn::Mat head_in;                  // input to the output projection
    int batch = 0;
};

// epsilon-prediction network: input projection, positional encoding
// (transformer), a sinusoidal diffusion-timestep embedding passed through a
// two-layer projection and added to every token, the backbone stack, and an
// unconstrained output projection back to feature space.
class DenoiserModel {
public:
    static DenoiserModel init(const DenoiserConfig& config, Rng& rng);

    // x is [B*N, D] in token layout; t holds one timestep in {1..T} per batch
    // element. Safe for concurrent use with per-caller caches. drop_rng
    // enables dropout (training only).
    nn::Mat forward(const nn::Mat& x, const std::vector<int>& t, DenoiserCache* cache,
                    Rng* drop_rng = nullptr) const;
    // Accumulates parameter gradients; returns nothing (input grads unused).
    void backward(const nn::Mat& dout, DenoiserCache& cache);

    // Convenience inference path without cache retention.
    nn::Mat predict(const nn::Mat& x, const std::vector<int>& t) const;

    const DenoiserConfig& config() const { return config_; }
    std::vector<nn::ParamRef> params();
    std::size_t param_count();
    void zero_grads();

    // FNV-1a digest over all parameter bytes; used for checkpoint checks.
    std::uint64_t digest();

private:
    DenoiserConfig config_;
    nn::Linear in_proj_, out_proj_;
    nn::Linear time_fc1_, time_fc2_;
    nn::Mat posenc_;
    std::vector<nn::EncoderLayer> encoder_;
    std::vector<nn::GruLayer> gru_;
};

}  // namespace tsdiff
