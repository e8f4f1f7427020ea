#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tsdiff/data.hpp"
#include "tsdiff/nn.hpp"
#include "tsdiff/rng.hpp"

namespace tsdiff {

enum class ProjectionMethod { pca, tsne };

std::string to_string(ProjectionMethod m);

// Joint 2-D embedding of real and synthetic sequences. Row i of coords pairs
// with labels[i]; real rows come first.
struct EmbeddingProjection {
    nn::Mat coords;                   // [n, 2]
    std::vector<std::string> labels;  // "real" or "synthetic"
    ProjectionMethod method = ProjectionMethod::pca;

    // PCA metadata
    std::vector<double> explained_variance;  // ratios for the two components

    // t-SNE metadata
    double perplexity = 0.0;
    double final_kl = 0.0;
    bool kl_increase_flagged = false;  // KL rose by > 1e-3 across a 50-iter window
};

// Projects the pooled (real + synthetic) flattened sequences onto their top-2
// principal directions. Centering uses the pooled mean; components come from
// the covariance (or its Gram-matrix equivalent when that is smaller).
// Requires at least 3 points in total.
EmbeddingProjection pca_project(const SequenceBatch& real, const SequenceBatch& synthetic);

struct TsneConfig {
    double perplexity = 30.0;
    int iterations = 1000;       // >= 250
    double learning_rate = 0.0;  // 0 -> n / 12
    int exaggeration_iters = 250;
    double exaggeration = 12.0;
};

// Exact O(n^2) t-SNE on the pooled flattened sequences: per-point Gaussian
// bandwidths found by binary search on the entropy (tolerance 1e-5),
// symmetrized affinities, Student-t low-dimensional kernel, gradient descent
// with early exaggeration, momentum, and per-coordinate gains.
EmbeddingProjection tsne_project(const SequenceBatch& real, const SequenceBatch& synthetic,
                                 const TsneConfig& config, Rng& rng);

// Affinity construction, exposed for verification: returns the symmetrized,
// normalized P matrix and the per-point precisions beta_i = 1/(2 sigma_i^2).
void gaussian_affinities(const nn::Mat& points, double perplexity, nn::Mat& p_out,
                         std::vector<double>& betas_out);

// CSV (x,y,label) plus a JSON metadata sidecar.
void write_projection_csv(const std::string& path, const EmbeddingProjection& proj);
void write_projection_meta(const std::string& path, const EmbeddingProjection& proj,
                           std::uint64_t seed);

}  // namespace tsdiff
