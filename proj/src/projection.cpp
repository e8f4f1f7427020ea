#include "tsdiff/projection.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include <nlohmann/json.hpp>

#include "tsdiff/errors.hpp"
#include "tsdiff/metrics.hpp"

namespace tsdiff {

namespace {

using nn::Mat;

Mat pooled_scaled_embeddings(const SequenceBatch& real, const SequenceBatch& synthetic) {
    EvalPair pair{real, synthetic};
    pair.validate();
    const ScalerState scaler = pooled_scaler(pair);
    const SequenceBatch real_s = scale(real, scaler);
    const SequenceBatch syn_s = scale(synthetic, scaler);
    const Eigen::Index dim = static_cast<Eigen::Index>(real.seq_len) * real.feature_dim;
    Mat x(real.batch + synthetic.batch, dim);
    x.topRows(real.batch) = Eigen::Map<const Mat>(real_s.values.data(), real.batch, dim);
    x.bottomRows(synthetic.batch) = Eigen::Map<const Mat>(syn_s.values.data(), synthetic.batch, dim);
    return x;
}

std::vector<std::string> make_labels(int n_real, int n_syn) {
    std::vector<std::string> labels;
    labels.reserve(static_cast<std::size_t>(n_real + n_syn));
    for (int i = 0; i < n_real; ++i) labels.emplace_back("real");
    for (int i = 0; i < n_syn; ++i) labels.emplace_back("synthetic");
    return labels;
}

// Leading eigenpair of the symmetric PSD matrix S, deflated by any previous
// eigenpairs. Deterministic start vector.
std::pair<double, Eigen::VectorXd> power_iteration(
    const Mat& s, const std::vector<std::pair<double, Eigen::VectorXd>>& deflate) {
    const Eigen::Index dim = s.rows();
    Eigen::VectorXd v = Eigen::VectorXd::Ones(dim);
    Rng rng(0x9d2c5680u);  // fixed perturbation so a symmetric start cannot stall
    for (Eigen::Index i = 0; i < dim; ++i) v(i) += 1e-3 * rng.uniform01();
    v.normalize();

    double lambda = 0.0;
    for (int iter = 0; iter < 5000; ++iter) {
        Eigen::VectorXd next = s * v;
        for (const auto& [dl, dv] : deflate) next -= dl * dv.dot(v) * dv;
        const double norm = next.norm();
        if (norm < 1e-300) return {0.0, Eigen::VectorXd::Zero(dim)};
        next /= norm;
        const double delta = std::min((next - v).norm(), (next + v).norm());
        v = next;
        if (delta < 1e-13) break;
    }
    Eigen::VectorXd sv = s * v;
    for (const auto& [dl, dv] : deflate) sv -= dl * dv.dot(v) * dv;
    lambda = v.dot(sv);

    // sign convention: largest-magnitude component positive
    Eigen::Index imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    if (v(imax) < 0.0) v = -v;
    return {lambda, v};
}

}  // namespace

std::string to_string(ProjectionMethod m) { return m == ProjectionMethod::pca ? "pca" : "tsne"; }

EmbeddingProjection pca_project(const SequenceBatch& real, const SequenceBatch& synthetic) {
    Mat x = pooled_scaled_embeddings(real, synthetic);
    const Eigen::Index n = x.rows();
    if (n < 3) throw DataError("pca: need at least 3 sequences in total, got " + std::to_string(n));

    const Eigen::RowVectorXd mean = x.colwise().mean();
    x.rowwise() -= mean;
    const double trace = x.squaredNorm() / static_cast<double>(n);

    EmbeddingProjection proj;
    proj.method = ProjectionMethod::pca;
    proj.coords = Mat::Zero(n, 2);
    proj.labels = make_labels(real.batch, synthetic.batch);
    proj.explained_variance = {0.0, 0.0};
    if (trace <= 0.0) return proj;  // all points identical

    const bool use_gram = x.cols() > n;
    const Mat s = use_gram ? Mat((x * x.transpose()) / static_cast<double>(n))
                           : Mat((x.transpose() * x) / static_cast<double>(n));

    std::vector<std::pair<double, Eigen::VectorXd>> eigs;
    for (int comp = 0; comp < 2; ++comp) {
        auto [lambda, vec] = power_iteration(s, eigs);
        if (lambda / trace < 1e-12) break;
        eigs.emplace_back(lambda, std::move(vec));
    }

    for (std::size_t c = 0; c < eigs.size(); ++c) {
        const auto& [lambda, vec] = eigs[c];
        Eigen::VectorXd direction;
        if (use_gram) {
            direction = x.transpose() * vec;
            const double norm = direction.norm();
            if (norm < 1e-300) continue;
            direction /= norm;
            Eigen::Index imax = 0;
            direction.cwiseAbs().maxCoeff(&imax);
            if (direction(imax) < 0.0) direction = -direction;
        } else {
            direction = vec;
        }
        proj.coords.col(static_cast<Eigen::Index>(c)) = x * direction;
        proj.explained_variance[c] = lambda / trace;
    }
    return proj;
}

void gaussian_affinities(const Mat& points, double perplexity, Mat& p_out,
                         std::vector<double>& betas_out) {
    const Eigen::Index n = points.rows();
    Mat d2(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        d2(i, i) = 0.0;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double d = (points.row(i) - points.row(j)).squaredNorm();
            d2(i, j) = d;
            d2(j, i) = d;
        }
    }

    const double log_u = std::log(perplexity);
    Mat p = Mat::Zero(n, n);
    betas_out.assign(static_cast<std::size_t>(n), 1.0);
    for (Eigen::Index i = 0; i < n; ++i) {
        double beta = 1.0;
        double beta_min = -std::numeric_limits<double>::infinity();
        double beta_max = std::numeric_limits<double>::infinity();
        Eigen::RowVectorXd row(n);
        for (int iter = 0; iter < 200; ++iter) {
            double sum_p = 0.0;
            double sum_dp = 0.0;
            for (Eigen::Index j = 0; j < n; ++j) {
                if (j == i) {
                    row(j) = 0.0;
                    continue;
                }
                const double pij = std::exp(-beta * d2(i, j));
                row(j) = pij;
                sum_p += pij;
                sum_dp += d2(i, j) * pij;
            }
            const double entropy = std::log(sum_p) + beta * sum_dp / sum_p;
            const double diff = entropy - log_u;
            if (std::abs(diff) < 1e-5) break;
            if (diff > 0.0) {
                beta_min = beta;
                beta = std::isinf(beta_max) ? beta * 2.0 : 0.5 * (beta + beta_max);
            } else {
                beta_max = beta;
                beta = std::isinf(beta_min) ? beta * 0.5 : 0.5 * (beta + beta_min);
            }
        }
        const double sum_p = row.sum();
        p.row(i) = row / sum_p;
        betas_out[static_cast<std::size_t>(i)] = beta;
    }

    p_out = p + Mat(p.transpose());
    p_out /= p_out.sum();
}

EmbeddingProjection tsne_project(const SequenceBatch& real, const SequenceBatch& synthetic,
                                 const TsneConfig& config, Rng& rng) {
    Mat x = pooled_scaled_embeddings(real, synthetic);
    const Eigen::Index n = x.rows();
    if (!(config.perplexity > 0.0) || 3.0 * config.perplexity >= static_cast<double>(n)) {
        throw ConfigError("tsne: perplexity " + std::to_string(config.perplexity) +
                          " infeasible for " + std::to_string(n) + " points (need 3*perplexity < n)");
    }
    if (config.iterations < 250) {
        throw ConfigError("tsne: iterations must be >= 250, got " + std::to_string(config.iterations));
    }

    Mat p;
    std::vector<double> betas;
    gaussian_affinities(x, config.perplexity, p, betas);

    const double lr = config.learning_rate > 0.0 ? config.learning_rate
                                                 : static_cast<double>(n) / 12.0;
    Mat y(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) {
        y(i, 0) = 1e-4 * rng.gaussian();
        y(i, 1) = 1e-4 * rng.gaussian();
    }
    Mat inc = Mat::Zero(n, 2);
    Mat gains = Mat::Ones(n, 2);

    Mat num(n, n);
    auto kl_divergence = [&]() {
        double sum_q = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            num(i, i) = 0.0;
            for (Eigen::Index j = i + 1; j < n; ++j) {
                const double q = 1.0 / (1.0 + (y.row(i) - y.row(j)).squaredNorm());
                num(i, j) = q;
                num(j, i) = q;
                sum_q += 2.0 * q;
            }
        }
        double kl = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < n; ++j) {
                if (i == j || p(i, j) <= 0.0) continue;
                const double q = std::max(num(i, j) / sum_q, 1e-300);
                kl += p(i, j) * std::log(p(i, j) / q);
            }
        }
        return kl;
    };

    EmbeddingProjection proj;
    proj.method = ProjectionMethod::tsne;
    proj.labels = make_labels(real.batch, synthetic.batch);
    proj.perplexity = config.perplexity;

    double prev_window_kl = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < config.iterations; ++iter) {
        const bool exaggerate = iter < config.exaggeration_iters;
        const double p_scale = exaggerate ? config.exaggeration : 1.0;
        const double momentum = iter < 250 ? 0.5 : 0.8;

        double sum_q = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            num(i, i) = 0.0;
            for (Eigen::Index j = i + 1; j < n; ++j) {
                const double q = 1.0 / (1.0 + (y.row(i) - y.row(j)).squaredNorm());
                num(i, j) = q;
                num(j, i) = q;
                sum_q += 2.0 * q;
            }
        }

        Mat grad = Mat::Zero(n, 2);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < n; ++j) {
                if (i == j) continue;
                const double q = num(i, j) / sum_q;
                const double mult = 4.0 * (p_scale * p(i, j) - q) * num(i, j);
                grad(i, 0) += mult * (y(i, 0) - y(j, 0));
                grad(i, 1) += mult * (y(i, 1) - y(j, 1));
            }
        }

        for (Eigen::Index i = 0; i < n; ++i) {
            for (int c = 0; c < 2; ++c) {
                const bool same_sign = (grad(i, c) > 0.0) == (inc(i, c) > 0.0);
                gains(i, c) = same_sign ? gains(i, c) * 0.8 : gains(i, c) + 0.2;
                gains(i, c) = std::max(gains(i, c), 0.01);
                inc(i, c) = momentum * inc(i, c) - lr * gains(i, c) * grad(i, c);
                y(i, c) += inc(i, c);
            }
        }
        const Eigen::RowVectorXd mean = y.colwise().mean();
        y.rowwise() -= mean;

        if (!exaggerate && (iter - config.exaggeration_iters) % 50 == 49) {
            const double kl = kl_divergence();
            if (kl > prev_window_kl + 1e-3) proj.kl_increase_flagged = true;
            prev_window_kl = kl;
        }
    }

    proj.coords = std::move(y);
    proj.final_kl = kl_divergence();
    return proj;
}

void write_projection_csv(const std::string& path, const EmbeddingProjection& proj) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write \"" + path + "\"");
    out << "x,y,label\n";
    char buf[80];
    for (Eigen::Index i = 0; i < proj.coords.rows(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,", proj.coords(i, 0), proj.coords(i, 1));
        out << buf << proj.labels[static_cast<std::size_t>(i)] << "\n";
    }
    if (!out) throw DataError("write failed for \"" + path + "\"");
}

void write_projection_meta(const std::string& path, const EmbeddingProjection& proj,
                           std::uint64_t seed) {
    nlohmann::json j;
    j["method"] = to_string(proj.method);
    j["points"] = proj.coords.rows();
    j["seed"] = seed;
    if (proj.method == ProjectionMethod::pca) {
        j["explained_variance"] = proj.explained_variance;
    } else {
        j["perplexity"] = proj.perplexity;
        j["final_kl"] = proj.final_kl;
        j["kl_increase_flagged"] = proj.kl_increase_flagged;
    }
    std::ofstream out(path);
    if (!out) throw DataError("cannot write \"" + path + "\"");
    out << j.dump(2) << "\n";
}

}  // namespace tsdiff
