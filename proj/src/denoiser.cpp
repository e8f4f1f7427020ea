#include "tsdiff/denoiser.hpp"

#include <cmath>
#include <cstring>

#include "tsdiff/errors.hpp"

namespace tsdiff {

Backbone backbone_from_string(const std::string& s) {
    if (s == "transformer") return Backbone::transformer;
    if (s == "gru") return Backbone::gru;
    throw ConfigError("denoiser.backbone: expected \"transformer\" or \"gru\", got \"" + s + "\"");
}

std::string to_string(Backbone b) { return b == Backbone::transformer ? "transformer" : "gru"; }

void DenoiserConfig::validate() const {
    std::string problems;
    auto add = [&](const std::string& msg) {
        if (!problems.empty()) problems += "; ";
        problems += msg;
    };
    if (seq_len < 1) add("denoiser.seq_len: must be >= 1, got " + std::to_string(seq_len));
    if (feature_dim < 1) add("denoiser.feature_dim: must be >= 1, got " + std::to_string(feature_dim));
    if (hidden_dim < 1) add("denoiser.hidden_dim: must be >= 1, got " + std::to_string(hidden_dim));
    if (num_layers < 1) add("denoiser.num_layers: must be >= 1, got " + std::to_string(num_layers));
    if (backbone == Backbone::transformer) {
        if (num_heads < 1) add("denoiser.num_heads: must be >= 1, got " + std::to_string(num_heads));
        if (num_heads >= 1 && hidden_dim % num_heads != 0) {
            add("denoiser.hidden_dim: " + std::to_string(hidden_dim) + " not divisible by num_heads " +
                std::to_string(num_heads));
        }
        if (ff_dim() < 1) add("denoiser.feedforward_dim: must be >= 1");
    }
    if (!(dropout >= 0.0 && dropout < 1.0)) {
        add("denoiser.dropout: must be in [0, 1), got " + std::to_string(dropout));
    }
    if (max_diffusion_steps < 1) {
        add("denoiser.max_diffusion_steps: must be >= 1, got " + std::to_string(max_diffusion_steps));
    }
    if (!problems.empty()) throw ConfigError(problems);
}

DenoiserModel DenoiserModel::init(const DenoiserConfig& config, Rng& rng) {
    config.validate();
    DenoiserModel m;
    m.config_ = config;
    const int h = config.hidden_dim;
    m.in_proj_.init(config.feature_dim, h, rng);
    m.time_fc1_.init(h, h, rng);
    m.time_fc2_.init(h, h, rng);
    if (config.backbone == Backbone::transformer) {
        m.posenc_ = nn::sinusoidal_table(config.seq_len, h);
        m.encoder_.resize(static_cast<std::size_t>(config.num_layers));
        for (auto& layer : m.encoder_) {
            layer.init(h, config.num_heads, config.ff_dim(), config.dropout, rng);
        }
    } else {
        m.gru_.resize(static_cast<std::size_t>(config.num_layers));
        for (auto& layer : m.gru_) layer.init(h, h, rng);
    }
    m.out_proj_.init(h, config.feature_dim, rng);
    return m;
}

nn::Mat DenoiserModel::forward(const nn::Mat& x, const std::vector<int>& t, DenoiserCache* cache,
                               Rng* drop_rng) const {
    const int n = config_.seq_len;
    const int batch = static_cast<int>(t.size());
    if (x.cols() != config_.feature_dim || x.rows() != static_cast<Eigen::Index>(batch) * n) {
        throw ConfigError("denoiser.forward: input shape [" + std::to_string(x.rows()) + ", " +
                          std::to_string(x.cols()) + "] does not match config [batch*" +
                          std::to_string(n) + ", " + std::to_string(config_.feature_dim) + "]");
    }
    for (int tb : t) {
        if (tb < 1 || tb > config_.max_diffusion_steps) {
            throw ConfigError("denoiser.forward: timestep " + std::to_string(tb) +
                              " outside {1.." + std::to_string(config_.max_diffusion_steps) + "}");
        }
    }

    // timestep embedding: sinusoidal(t) -> fc1 -> GELU -> fc2, one row per batch element
    nn::Mat temb(batch, config_.hidden_dim);
    for (int b = 0; b < batch; ++b) {
        temb.row(b) = nn::sinusoidal_row(static_cast<double>(t[static_cast<std::size_t>(b)]),
                                         config_.hidden_dim);
    }
    nn::Mat tpre = time_fc1_.forward(temb);
    nn::Mat tpost = tpre.unaryExpr([](double v) { return nn::gelu(v); });
    nn::Mat tout = time_fc2_.forward(tpost);

    nn::Mat tokens;
    if (config_.backbone == Backbone::transformer) {
        // trunk-style path: in_proj + posenc + timestep bias + encoder stack
        nn::Mat tok = in_proj_.forward(x);
        for (int b = 0; b < batch; ++b) {
            tok.middleRows(b * n, n) += posenc_;
            tok.middleRows(b * n, n).rowwise() += tout.row(b);
        }
        if (cache) {
            cache->trunk.x = x;
            cache->trunk.layers.resize(encoder_.size());
        }
        for (std::size_t i = 0; i < encoder_.size(); ++i) {
            tok = encoder_[i].forward(tok, batch, cache ? &cache->trunk.layers[i] : nullptr, drop_rng);
        }
        tokens = std::move(tok);
    } else {
        nn::Mat tok = in_proj_.forward(x);
        for (int b = 0; b < batch; ++b) tok.middleRows(b * n, n).rowwise() += tout.row(b);
        if (cache) cache->gru.resize(gru_.size());
        for (std::size_t i = 0; i < gru_.size(); ++i) {
            tok = gru_[i].forward(tok, batch, cache ? &cache->gru[i] : nullptr);
        }
        tokens = std::move(tok);
    }

    nn::Mat out = out_proj_.forward(tokens);
    if (cache) {
        cache->x = x;
        cache->batch = batch;
        cache->time_emb = std::move(temb);
        cache->time_pre = std::move(tpre);
        cache->time_post = std::move(tpost);
        cache->time_out = std::move(tout);
        cache->head_in = std::move(tokens);
    }
    return out;
}

void DenoiserModel::backward(const nn::Mat& dout, DenoiserCache& cache) {
    const int n = config_.seq_len;
    const int batch = cache.batch;

    nn::Mat dtok = out_proj_.backward(cache.head_in, dout);
    nn::Mat dbias(batch, config_.hidden_dim);
    if (config_.backbone == Backbone::transformer) {
        for (std::size_t i = encoder_.size(); i-- > 0;) {
            dtok = encoder_[i].backward(dtok, batch, cache.trunk.layers[i]);
        }
        for (int b = 0; b < batch; ++b) {
            dbias.row(b) = dtok.middleRows(b * n, n).colwise().sum();
        }
        in_proj_.backward(cache.trunk.x, dtok);
    } else {
        for (std::size_t i = gru_.size(); i-- > 0;) {
            dtok = gru_[i].backward(dtok, batch, cache.gru[i]);
        }
        for (int b = 0; b < batch; ++b) {
            dbias.row(b) = dtok.middleRows(b * n, n).colwise().sum();
        }
        in_proj_.backward(cache.x, dtok);
    }

    // timestep-embedding path
    nn::Mat dtpost = time_fc2_.backward(cache.time_post, dbias);
    nn::Mat dtpre =
        (dtpost.array() *
         cache.time_pre.unaryExpr([](double v) { return nn::gelu_grad(v); }).array())
            .matrix();
    time_fc1_.backward(cache.time_emb, dtpre);
}

nn::Mat DenoiserModel::predict(const nn::Mat& x, const std::vector<int>& t) const {
    return forward(x, t, nullptr, nullptr);
}

std::vector<nn::ParamRef> DenoiserModel::params() {
    std::vector<nn::ParamRef> out;
    in_proj_.collect("in_proj", out);
    time_fc1_.collect("time_embed.fc1", out);
    time_fc2_.collect("time_embed.fc2", out);
    if (config_.backbone == Backbone::transformer) {
        for (std::size_t i = 0; i < encoder_.size(); ++i) {
            encoder_[i].collect("encoder." + std::to_string(i), out);
        }
    } else {
        for (std::size_t i = 0; i < gru_.size(); ++i) {
            gru_[i].collect("gru." + std::to_string(i), out);
        }
    }
    out_proj_.collect("out_proj", out);
    return out;
}

std::size_t DenoiserModel::param_count() { return nn::param_count(params()); }

void DenoiserModel::zero_grads() { nn::zero_grads(params()); }

std::uint64_t DenoiserModel::digest() {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& p : params()) {
        for (Eigen::Index i = 0; i < p.value->size(); ++i) {
            const double v = p.value->data()[i];
            std::uint64_t bits = 0;
            std::memcpy(&bits, &v, sizeof(bits));
            for (int byte = 0; byte < 8; ++byte) {
                h ^= (bits >> (8 * byte)) & 0xffU;
                h *= 0x100000001b3ULL;
            }
        }
    }
    return h;
}

}  // namespace tsdiff
