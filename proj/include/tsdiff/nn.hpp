#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "tsdiff/rng.hpp"

namespace tsdiff::nn {

// Token matrices are [rows, channels] with rows = batch * seq_len, row index
// r = b * seq_len + n. This matches the contiguous layout of SequenceBatch,
// so batches map into Eigen without copies.
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct ParamRef {
    std::string name;
    Mat* value;
    Mat* grad;
};

double gelu(double x);
double gelu_grad(double x);

// Fixed sinusoidal table: row p, channel 2i -> sin(p / 10000^(2i/dim)),
// channel 2i+1 -> cos of the same angle.
Mat sinusoidal_table(int positions, int dim);
// One encoding row for an arbitrary (possibly large) position, same formula.
Eigen::RowVectorXd sinusoidal_row(double position, int dim);

void softmax_rows(Mat& m);

// ---------------------------------------------------------------------------
// Layers. forward() is const and writes intermediates into a caller-owned
// cache; backward() consumes the cache and accumulates parameter gradients.
// Shared read-only forward is safe across threads as long as each thread owns
// its cache; gradient accumulation is exclusive.
// ---------------------------------------------------------------------------

struct Linear {
    Mat w;   // [out, in]
    Mat b;   // [1, out]
    Mat gw, gb;

    void init(int in_dim, int out_dim, Rng& rng);  // U(-1/sqrt(in), 1/sqrt(in))
    void init_zero(int in_dim, int out_dim);
    Mat forward(const Mat& x) const;
    // Returns dx; x must be the forward input.
    Mat backward(const Mat& x, const Mat& dy);
    void collect(const std::string& prefix, std::vector<ParamRef>& out);
    int in_dim() const { return static_cast<int>(w.cols()); }
    int out_dim() const { return static_cast<int>(w.rows()); }
};

struct LayerNormCache {
    Mat xhat;
    Eigen::VectorXd inv_std;
};

struct LayerNorm {
    Mat gamma, beta;  // [1, dim]
    Mat ggamma, gbeta;
    static constexpr double kEps = 1e-5;

    void init(int dim);
    Mat forward(const Mat& x, LayerNormCache* cache) const;
    Mat backward(const Mat& dy, const LayerNormCache& cache);
    void collect(const std::string& prefix, std::vector<ParamRef>& out);
};

struct AttentionCache {
    Mat x, q, k, v, ctx;
    std::vector<Mat> attn;  // one [N, N] matrix per (batch, head)
};

struct MultiHeadAttention {
    Linear q_proj, k_proj, v_proj, o_proj;
    int num_heads = 1;

    void init(int hidden, int heads, Rng& rng);
    Mat forward(const Mat& x, int batch, AttentionCache* cache) const;
    Mat backward(const Mat& dy, int batch, const AttentionCache& cache);
    void collect(const std::string& prefix, std::vector<ParamRef>& out);
};

struct FeedForwardCache {
    Mat x, pre_act, post_act;
};

struct FeedForward {
    Linear lin1, lin2;

    void init(int hidden, int ff_dim, Rng& rng);
    Mat forward(const Mat& x, FeedForwardCache* cache) const;
    Mat backward(const Mat& dy, const FeedForwardCache& cache);
    void collect(const std::string& prefix, std::vector<ParamRef>& out);
};

struct EncoderLayerCache {
    AttentionCache attn;
    LayerNormCache ln1, ln2;
    FeedForwardCache ff;
    Mat mask_attn, mask_ff;  // inverted dropout masks; empty when dropout off
};

// Post-norm encoder block: y = LN2(x1 + FF(x1)), x1 = LN1(x + Attn(x)).
struct EncoderLayer {
    MultiHeadAttention attn;
    LayerNorm ln1, ln2;
    FeedForward ff;
    double dropout = 0.0;

    void init(int hidden, int heads, int ff_dim, double dropout_p, Rng& rng);
    Mat forward(const Mat& x, int batch, EncoderLayerCache* cache, Rng* drop_rng) const;
    Mat backward(const Mat& dy, int batch, const EncoderLayerCache& cache);
    void collect(const std::string& prefix, std::vector<ParamRef>& out);
};

struct GruCache {
    Mat x;                    // [B*N, in]
    std::vector<Mat> h;       // N+1 entries of [B, hidden], h[0] = 0
    std::vector<Mat> r, z, n, un;  // per step [B, hidden]; un = h_prev * Un^T
};

// r = sig(x Wr^T + h Ur^T + br); z = sig(x Wz^T + h Uz^T + bz);
// n = tanh(x Wn^T + r .* (h Un^T) + bn); h' = (1-z) .* n + z .* h.
struct GruLayer {
    Mat wr, wz, wn;  // [hidden, in]
    Mat ur, uz, un;  // [hidden, hidden]
    Mat br, bz, bn;  // [1, hidden]
    Mat gwr, gwz, gwn, gur, guz, gun, gbr, gbz, gbn;

    void init(int in_dim, int hidden, Rng& rng);
    Mat forward(const Mat& x, int batch, GruCache* cache) const;
    Mat backward(const Mat& dy, int batch, const GruCache& cache);
    void collect(const std::string& prefix, std::vector<ParamRef>& out);
    int hidden() const { return static_cast<int>(wr.rows()); }
};

struct TrunkCache {
    Mat x;  // input tokens [B*N, in_dim]
    std::vector<EncoderLayerCache> layers;
};

// Input projection + fixed positional encoding + encoder stack. The optional
// per-sequence bias (one row per batch element, added to every token) carries
// the diffusion-timestep embedding; metric models leave it empty.
struct EncoderTrunk {
    Linear in_proj;
    Mat posenc;  // [seq_len, hidden]
    std::vector<EncoderLayer> layers;
    int seq_len = 0;

    void init(int seq_len, int in_dim, int hidden, int num_layers, int heads, int ff_dim,
              double dropout_p, Rng& rng);
    Mat forward(const Mat& x, int batch, const Mat& seq_bias, TrunkCache* cache,
                Rng* drop_rng) const;
    // Returns dx; dseq_bias (if non-null) receives the bias gradient [B, hidden].
    Mat backward(const Mat& dy, int batch, const TrunkCache& cache, Mat* dseq_bias);
    void collect(const std::string& prefix, std::vector<ParamRef>& out);
};

Mat mean_pool(const Mat& tokens, int batch, int seq_len);
Mat mean_pool_backward(const Mat& dpooled, int batch, int seq_len);

// ---------------------------------------------------------------------------
// Optimizer
// ---------------------------------------------------------------------------

struct AdamConfig {
    double learning_rate = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double grad_clip = 0.0;  // global-norm threshold; 0 disables
};

class Adam {
public:
    explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

    // Applies one update over the registered parameters (order defines the
    // deterministic update sequence), then leaves gradients untouched.
    void step(const std::vector<ParamRef>& params);
    const AdamConfig& config() const { return cfg_; }

private:
    AdamConfig cfg_;
    int t_ = 0;
    std::vector<Mat> m_, v_;
};

void zero_grads(const std::vector<ParamRef>& params);
double grad_norm(const std::vector<ParamRef>& params);
std::size_t param_count(const std::vector<ParamRef>& params);
bool params_finite(const std::vector<ParamRef>& params);

}  // namespace tsdiff::nn
