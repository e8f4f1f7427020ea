#include "tsdiff/nn.hpp"

#include <cmath>

namespace tsdiff::nn {

namespace {
constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }
}  // namespace

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * kInvSqrt2)); }

double gelu_grad(double x) {
    const double cdf = 0.5 * (1.0 + std::erf(x * kInvSqrt2));
    const double pdf = kInvSqrt2Pi * std::exp(-0.5 * x * x);
    return cdf + x * pdf;
}

Eigen::RowVectorXd sinusoidal_row(double position, int dim) {
    Eigen::RowVectorXd row(dim);
    for (int i = 0; i < dim; ++i) {
        const double expnt = static_cast<double>(2 * (i / 2)) / static_cast<double>(dim);
        const double angle = position / std::pow(10000.0, expnt);
        row(i) = (i % 2 == 0) ? std::sin(angle) : std::cos(angle);
    }
    return row;
}

Mat sinusoidal_table(int positions, int dim) {
    Mat table(positions, dim);
    for (int p = 0; p < positions; ++p) {
        table.row(p) = sinusoidal_row(static_cast<double>(p), dim);
    }
    return table;
}

void softmax_rows(Mat& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        const double mx = m.row(r).maxCoeff();
        m.row(r) = (m.row(r).array() - mx).exp().matrix();
        m.row(r) /= m.row(r).sum();
    }
}

// ----------------------------- Linear -----------------------------

void Linear::init(int in_dim, int out_dim, Rng& rng) {
    w.resize(out_dim, in_dim);
    b.resize(1, out_dim);
    const double bound = 1.0 / std::sqrt(static_cast<double>(in_dim));
    for (Eigen::Index i = 0; i < w.rows(); ++i)
        for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = rng.uniform(-bound, bound);
    for (Eigen::Index j = 0; j < b.cols(); ++j) b(0, j) = rng.uniform(-bound, bound);
    gw = Mat::Zero(out_dim, in_dim);
    gb = Mat::Zero(1, out_dim);
}

void Linear::init_zero(int in_dim, int out_dim) {
    w = Mat::Zero(out_dim, in_dim);
    b = Mat::Zero(1, out_dim);
    gw = Mat::Zero(out_dim, in_dim);
    gb = Mat::Zero(1, out_dim);
}

Mat Linear::forward(const Mat& x) const {
    Mat y = x * w.transpose();
    y.rowwise() += b.row(0);
    return y;
}

Mat Linear::backward(const Mat& x, const Mat& dy) {
    gw.noalias() += dy.transpose() * x;
    gb.row(0) += dy.colwise().sum();
    return dy * w;
}

void Linear::collect(const std::string& prefix, std::vector<ParamRef>& out) {
    out.push_back({prefix + ".weight", &w, &gw});
    out.push_back({prefix + ".bias", &b, &gb});
}

// ----------------------------- LayerNorm -----------------------------

void LayerNorm::init(int dim) {
    gamma = Mat::Ones(1, dim);
    beta = Mat::Zero(1, dim);
    ggamma = Mat::Zero(1, dim);
    gbeta = Mat::Zero(1, dim);
}

Mat LayerNorm::forward(const Mat& x, LayerNormCache* cache) const {
    const auto rows = x.rows();
    const auto dim = x.cols();
    Mat xhat(rows, dim);
    Eigen::VectorXd inv_std(rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const double mu = x.row(r).mean();
        const double var = (x.row(r).array() - mu).square().mean();
        const double is = 1.0 / std::sqrt(var + kEps);
        xhat.row(r) = ((x.row(r).array() - mu) * is).matrix();
        inv_std(r) = is;
    }
    Mat y = (xhat.array().rowwise() * gamma.row(0).array()).matrix();
    y.rowwise() += beta.row(0);
    if (cache) {
        cache->xhat = std::move(xhat);
        cache->inv_std = std::move(inv_std);
    }
    return y;
}

Mat LayerNorm::backward(const Mat& dy, const LayerNormCache& cache) {
    const auto rows = dy.rows();
    const double dim = static_cast<double>(dy.cols());
    ggamma.row(0) += (dy.array() * cache.xhat.array()).colwise().sum().matrix();
    gbeta.row(0) += dy.colwise().sum();

    Mat dxhat = (dy.array().rowwise() * gamma.row(0).array()).matrix();
    Mat dx(rows, dy.cols());
    for (Eigen::Index r = 0; r < rows; ++r) {
        const double sum_d = dxhat.row(r).sum();
        const double sum_dx = (dxhat.row(r).array() * cache.xhat.row(r).array()).sum();
        dx.row(r) = ((cache.inv_std(r) / dim) *
                     (dim * dxhat.row(r).array() - sum_d - cache.xhat.row(r).array() * sum_dx))
                        .matrix();
    }
    return dx;
}

void LayerNorm::collect(const std::string& prefix, std::vector<ParamRef>& out) {
    out.push_back({prefix + ".gamma", &gamma, &ggamma});
    out.push_back({prefix + ".beta", &beta, &gbeta});
}

// ----------------------------- MultiHeadAttention -----------------------------

void MultiHeadAttention::init(int hidden, int heads, Rng& rng) {
    num_heads = heads;
    q_proj.init(hidden, hidden, rng);
    k_proj.init(hidden, hidden, rng);
    v_proj.init(hidden, hidden, rng);
    o_proj.init(hidden, hidden, rng);
}

Mat MultiHeadAttention::forward(const Mat& x, int batch, AttentionCache* cache) const {
    const int hidden = static_cast<int>(x.cols());
    const int n = static_cast<int>(x.rows()) / batch;
    const int dh = hidden / num_heads;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

    Mat q = q_proj.forward(x);
    Mat k = k_proj.forward(x);
    Mat v = v_proj.forward(x);
    Mat ctx = Mat::Zero(x.rows(), hidden);
    std::vector<Mat> attn;
    if (cache) attn.reserve(static_cast<std::size_t>(batch) * num_heads);

    for (int b = 0; b < batch; ++b) {
        for (int h = 0; h < num_heads; ++h) {
            const Mat qh = q.block(b * n, h * dh, n, dh);
            const Mat kh = k.block(b * n, h * dh, n, dh);
            const Mat vh = v.block(b * n, h * dh, n, dh);
            Mat scores = qh * kh.transpose() * scale;
            softmax_rows(scores);
            ctx.block(b * n, h * dh, n, dh).noalias() = scores * vh;
            if (cache) attn.push_back(std::move(scores));
        }
    }
    Mat out = o_proj.forward(ctx);
    if (cache) {
        cache->x = x;
        cache->q = std::move(q);
        cache->k = std::move(k);
        cache->v = std::move(v);
        cache->ctx = std::move(ctx);
        cache->attn = std::move(attn);
    }
    return out;
}

Mat MultiHeadAttention::backward(const Mat& dy, int batch, const AttentionCache& cache) {
    const int hidden = static_cast<int>(dy.cols());
    const int n = static_cast<int>(dy.rows()) / batch;
    const int dh = hidden / num_heads;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

    Mat dctx = o_proj.backward(cache.ctx, dy);
    Mat dq(dy.rows(), hidden), dk(dy.rows(), hidden), dv(dy.rows(), hidden);
    for (int b = 0; b < batch; ++b) {
        for (int h = 0; h < num_heads; ++h) {
            const Mat& attn = cache.attn[static_cast<std::size_t>(b) * num_heads + h];
            const Mat qh = cache.q.block(b * n, h * dh, n, dh);
            const Mat kh = cache.k.block(b * n, h * dh, n, dh);
            const Mat vh = cache.v.block(b * n, h * dh, n, dh);
            const Mat dctxh = dctx.block(b * n, h * dh, n, dh);

            Mat dattn = dctxh * vh.transpose();
            // softmax rows: ds = a .* (da - rowsum(da .* a))
            Eigen::VectorXd row_dot = (dattn.array() * attn.array()).rowwise().sum().matrix();
            Mat dscores = (attn.array() * (dattn.array().colwise() - row_dot.array())).matrix();
            dscores *= scale;

            dv.block(b * n, h * dh, n, dh).noalias() = attn.transpose() * dctxh;
            dq.block(b * n, h * dh, n, dh).noalias() = dscores * kh;
            dk.block(b * n, h * dh, n, dh).noalias() = dscores.transpose() * qh;
        }
    }
    Mat dx = q_proj.backward(cache.x, dq);
    dx += k_proj.backward(cache.x, dk);
    dx += v_proj.backward(cache.x, dv);
    return dx;
}

void MultiHeadAttention::collect(const std::string& prefix, std::vector<ParamRef>& out) {
    q_proj.collect(prefix + ".q", out);
    k_proj.collect(prefix + ".k", out);
    v_proj.collect(prefix + ".v", out);
    o_proj.collect(prefix + ".o", out);
}

// ----------------------------- FeedForward -----------------------------

void FeedForward::init(int hidden, int ff_dim, Rng& rng) {
    lin1.init(hidden, ff_dim, rng);
    lin2.init(ff_dim, hidden, rng);
}

Mat FeedForward::forward(const Mat& x, FeedForwardCache* cache) const {
    Mat pre = lin1.forward(x);
    Mat post = pre.unaryExpr([](double v) { return gelu(v); });
    Mat y = lin2.forward(post);
    if (cache) {
        cache->x = x;
        cache->pre_act = std::move(pre);
        cache->post_act = std::move(post);
    }
    return y;
}

Mat FeedForward::backward(const Mat& dy, const FeedForwardCache& cache) {
    Mat dpost = lin2.backward(cache.post_act, dy);
    Mat dpre =
        (dpost.array() * cache.pre_act.unaryExpr([](double v) { return gelu_grad(v); }).array())
            .matrix();
    return lin1.backward(cache.x, dpre);
}

void FeedForward::collect(const std::string& prefix, std::vector<ParamRef>& out) {
    lin1.collect(prefix + ".fc1", out);
    lin2.collect(prefix + ".fc2", out);
}

// ----------------------------- EncoderLayer -----------------------------

namespace {

Mat dropout_mask(Eigen::Index rows, Eigen::Index cols, double p, Rng& rng) {
    Mat mask(rows, cols);
    const double keep = 1.0 - p;
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j)
            mask(i, j) = rng.uniform01() < p ? 0.0 : 1.0 / keep;
    return mask;
}

}  // namespace

void EncoderLayer::init(int hidden, int heads, int ff_dim, double dropout_p, Rng& rng) {
    dropout = dropout_p;
    attn.init(hidden, heads, rng);
    ln1.init(hidden);
    ln2.init(hidden);
    ff.init(hidden, ff_dim, rng);
}

Mat EncoderLayer::forward(const Mat& x, int batch, EncoderLayerCache* cache, Rng* drop_rng) const {
    const bool dropping = drop_rng != nullptr && dropout > 0.0;
    Mat a = attn.forward(x, batch, cache ? &cache->attn : nullptr);
    if (dropping) {
        Mat mask = dropout_mask(a.rows(), a.cols(), dropout, *drop_rng);
        a.array() *= mask.array();
        if (cache) cache->mask_attn = std::move(mask);
    }
    Mat x1 = ln1.forward(x + a, cache ? &cache->ln1 : nullptr);
    Mat f = ff.forward(x1, cache ? &cache->ff : nullptr);
    if (dropping) {
        Mat mask = dropout_mask(f.rows(), f.cols(), dropout, *drop_rng);
        f.array() *= mask.array();
        if (cache) cache->mask_ff = std::move(mask);
    }
    return ln2.forward(x1 + f, cache ? &cache->ln2 : nullptr);
}

Mat EncoderLayer::backward(const Mat& dy, int batch, const EncoderLayerCache& cache) {
    Mat dsum2 = ln2.backward(dy, cache.ln2);
    Mat df = dsum2;
    if (cache.mask_ff.size() > 0) df.array() *= cache.mask_ff.array();
    Mat dx1 = dsum2 + ff.backward(df, cache.ff);
    Mat dsum1 = ln1.backward(dx1, cache.ln1);
    Mat da = dsum1;
    if (cache.mask_attn.size() > 0) da.array() *= cache.mask_attn.array();
    return dsum1 + attn.backward(da, batch, cache.attn);
}

void EncoderLayer::collect(const std::string& prefix, std::vector<ParamRef>& out) {
    attn.collect(prefix + ".attn", out);
    ln1.collect(prefix + ".ln1", out);
    ln2.collect(prefix + ".ln2", out);
    ff.collect(prefix + ".ff", out);
}

// ----------------------------- GruLayer -----------------------------

void GruLayer::init(int in_dim, int hidden, Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
    auto fill = [&](Mat& m, int r, int c) {
        m.resize(r, c);
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rng.uniform(-bound, bound);
    };
    fill(wr, hidden, in_dim);
    fill(wz, hidden, in_dim);
    fill(wn, hidden, in_dim);
    fill(ur, hidden, hidden);
    fill(uz, hidden, hidden);
    fill(un, hidden, hidden);
    fill(br, 1, hidden);
    fill(bz, 1, hidden);
    fill(bn, 1, hidden);
    gwr = Mat::Zero(hidden, in_dim);
    gwz = Mat::Zero(hidden, in_dim);
    gwn = Mat::Zero(hidden, in_dim);
    gur = Mat::Zero(hidden, hidden);
    guz = Mat::Zero(hidden, hidden);
    gun = Mat::Zero(hidden, hidden);
    gbr = Mat::Zero(1, hidden);
    gbz = Mat::Zero(1, hidden);
    gbn = Mat::Zero(1, hidden);
}

namespace {

Mat gather_step(const Mat& tokens, int batch, int n_steps, int t) {
    Mat x(batch, tokens.cols());
    for (int b = 0; b < batch; ++b) x.row(b) = tokens.row(b * n_steps + t);
    return x;
}

void scatter_step(Mat& tokens, const Mat& x, int batch, int n_steps, int t) {
    for (int b = 0; b < batch; ++b) tokens.row(b * n_steps + t) = x.row(b);
}

}  // namespace

Mat GruLayer::forward(const Mat& x, int batch, GruCache* cache) const {
    const int n_steps = static_cast<int>(x.rows()) / batch;
    const int h_dim = hidden();
    Mat out(x.rows(), h_dim);
    Mat h = Mat::Zero(batch, h_dim);
    if (cache) {
        cache->x = x;
        cache->h.assign(1, h);
        cache->r.clear();
        cache->z.clear();
        cache->n.clear();
        cache->un.clear();
    }
    for (int t = 0; t < n_steps; ++t) {
        const Mat xt = gather_step(x, batch, n_steps, t);
        Mat r = xt * wr.transpose() + h * ur.transpose();
        r.rowwise() += br.row(0);
        r = r.unaryExpr([](double v) { return sigmoid(v); });
        Mat z = xt * wz.transpose() + h * uz.transpose();
        z.rowwise() += bz.row(0);
        z = z.unaryExpr([](double v) { return sigmoid(v); });
        Mat hu = h * un.transpose();
        Mat n = xt * wn.transpose() + r.cwiseProduct(hu);
        n.rowwise() += bn.row(0);
        n = n.array().tanh().matrix();
        h = ((1.0 - z.array()) * n.array() + z.array() * h.array()).matrix();
        scatter_step(out, h, batch, n_steps, t);
        if (cache) {
            cache->r.push_back(std::move(r));
            cache->z.push_back(std::move(z));
            cache->n.push_back(std::move(n));
            cache->un.push_back(std::move(hu));
            cache->h.push_back(h);
        }
    }
    return out;
}

Mat GruLayer::backward(const Mat& dy, int batch, const GruCache& cache) {
    const int n_steps = static_cast<int>(dy.rows()) / batch;
    const int h_dim = hidden();
    Mat dx(cache.x.rows(), cache.x.cols());
    Mat dh = Mat::Zero(batch, h_dim);
    for (int t = n_steps - 1; t >= 0; --t) {
        const auto ti = static_cast<std::size_t>(t);
        const Mat xt = gather_step(cache.x, batch, n_steps, t);
        const Mat& h_prev = cache.h[ti];
        const Mat& r = cache.r[ti];
        const Mat& z = cache.z[ti];
        const Mat& n = cache.n[ti];
        const Mat& hu = cache.un[ti];

        Mat dht = gather_step(dy, batch, n_steps, t) + dh;
        Mat dn = (dht.array() * (1.0 - z.array())).matrix();
        Mat dz = (dht.array() * (h_prev.array() - n.array())).matrix();
        dh = (dht.array() * z.array()).matrix();

        Mat dan = (dn.array() * (1.0 - n.array().square())).matrix();
        gwn.noalias() += dan.transpose() * xt;
        gbn.row(0) += dan.colwise().sum();
        Mat dxt = dan * wn;
        Mat dr = (dan.array() * hu.array()).matrix();
        Mat dhu = (dan.array() * r.array()).matrix();
        gun.noalias() += dhu.transpose() * h_prev;
        dh.noalias() += dhu * un;

        Mat dar = (dr.array() * r.array() * (1.0 - r.array())).matrix();
        gwr.noalias() += dar.transpose() * xt;
        gbr.row(0) += dar.colwise().sum();
        gur.noalias() += dar.transpose() * h_prev;
        dxt.noalias() += dar * wr;
        dh.noalias() += dar * ur;

        Mat daz = (dz.array() * z.array() * (1.0 - z.array())).matrix();
        gwz.noalias() += daz.transpose() * xt;
        gbz.row(0) += daz.colwise().sum();
        guz.noalias() += daz.transpose() * h_prev;
        dxt.noalias() += daz * wz;
        dh.noalias() += daz * uz;

        scatter_step(dx, dxt, batch, n_steps, t);
    }
    return dx;
}

void GruLayer::collect(const std::string& prefix, std::vector<ParamRef>& out) {
    out.push_back({prefix + ".wr", &wr, &gwr});
    out.push_back({prefix + ".wz", &wz, &gwz});
    out.push_back({prefix + ".wn", &wn, &gwn});
    out.push_back({prefix + ".ur", &ur, &gur});
    out.push_back({prefix + ".uz", &uz, &guz});
    out.push_back({prefix + ".un", &un, &gun});
    out.push_back({prefix + ".br", &br, &gbr});
    out.push_back({prefix + ".bz", &bz, &gbz});
    out.push_back({prefix + ".bn", &bn, &gbn});
}

// ----------------------------- EncoderTrunk -----------------------------

void EncoderTrunk::init(int seq_len_in, int in_dim, int hidden, int num_layers, int heads,
                        int ff_dim, double dropout_p, Rng& rng) {
    seq_len = seq_len_in;
    in_proj.init(in_dim, hidden, rng);
    posenc = sinusoidal_table(seq_len, hidden);
    layers.resize(static_cast<std::size_t>(num_layers));
    for (auto& layer : layers) layer.init(hidden, heads, ff_dim, dropout_p, rng);
}

Mat EncoderTrunk::forward(const Mat& x, int batch, const Mat& seq_bias, TrunkCache* cache,
                          Rng* drop_rng) const {
    Mat tok = in_proj.forward(x);
    for (int b = 0; b < batch; ++b) {
        tok.middleRows(b * seq_len, seq_len) += posenc;
        if (seq_bias.size() > 0) tok.middleRows(b * seq_len, seq_len).rowwise() += seq_bias.row(b);
    }
    if (cache) {
        cache->x = x;
        cache->layers.resize(layers.size());
    }
    for (std::size_t i = 0; i < layers.size(); ++i) {
        tok = layers[i].forward(tok, batch, cache ? &cache->layers[i] : nullptr, drop_rng);
    }
    return tok;
}

Mat EncoderTrunk::backward(const Mat& dy, int batch, const TrunkCache& cache, Mat* dseq_bias) {
    Mat d = dy;
    for (std::size_t i = layers.size(); i-- > 0;) {
        d = layers[i].backward(d, batch, cache.layers[i]);
    }
    if (dseq_bias) {
        dseq_bias->resize(batch, d.cols());
        for (int b = 0; b < batch; ++b) {
            dseq_bias->row(b) = d.middleRows(b * seq_len, seq_len).colwise().sum();
        }
    }
    return in_proj.backward(cache.x, d);
}

void EncoderTrunk::collect(const std::string& prefix, std::vector<ParamRef>& out) {
    in_proj.collect(prefix + ".in_proj", out);
    for (std::size_t i = 0; i < layers.size(); ++i) {
        layers[i].collect(prefix + ".layer" + std::to_string(i), out);
    }
}

Mat mean_pool(const Mat& tokens, int batch, int seq_len) {
    Mat pooled(batch, tokens.cols());
    for (int b = 0; b < batch; ++b) {
        pooled.row(b) = tokens.middleRows(b * seq_len, seq_len).colwise().mean();
    }
    return pooled;
}

Mat mean_pool_backward(const Mat& dpooled, int batch, int seq_len) {
    Mat d(static_cast<Eigen::Index>(batch) * seq_len, dpooled.cols());
    const double inv = 1.0 / static_cast<double>(seq_len);
    for (int b = 0; b < batch; ++b) {
        d.middleRows(b * seq_len, seq_len) = (dpooled.row(b) * inv).replicate(seq_len, 1);
    }
    return d;
}

// ----------------------------- Adam -----------------------------

void Adam::step(const std::vector<ParamRef>& params) {
    if (m_.empty()) {
        m_.reserve(params.size());
        v_.reserve(params.size());
        for (const auto& p : params) {
            m_.push_back(Mat::Zero(p.value->rows(), p.value->cols()));
            v_.push_back(Mat::Zero(p.value->rows(), p.value->cols()));
        }
    }
    double clip_scale = 1.0;
    if (cfg_.grad_clip > 0.0) {
        const double norm = grad_norm(params);
        if (norm > cfg_.grad_clip) clip_scale = cfg_.grad_clip / norm;
    }
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, t_);
    const double bc2 = 1.0 - std::pow(cfg_.beta2, t_);
    for (std::size_t i = 0; i < params.size(); ++i) {
        const Mat g = *params[i].grad * clip_scale;
        m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * g;
        v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * g.cwiseProduct(g);
        const Mat mhat = m_[i] / bc1;
        const Mat vhat = v_[i] / bc2;
        params[i].value->array() -=
            cfg_.learning_rate * mhat.array() / (vhat.array().sqrt() + cfg_.eps);
    }
}

void zero_grads(const std::vector<ParamRef>& params) {
    for (const auto& p : params) p.grad->setZero();
}

double grad_norm(const std::vector<ParamRef>& params) {
    double sq = 0.0;
    for (const auto& p : params) sq += p.grad->squaredNorm();
    return std::sqrt(sq);
}

std::size_t param_count(const std::vector<ParamRef>& params) {
    std::size_t n = 0;
    for (const auto& p : params) n += static_cast<std::size_t>(p.value->size());
    return n;
}

bool params_finite(const std::vector<ParamRef>& params) {
    for (const auto& p : params) {
        if (!p.value->allFinite()) return false;
    }
    return true;
}

}  // namespace tsdiff::nn
