#pragma once

#include "mfl/feature_map.hpp"

#include <cstdint>
#include <filesystem>

namespace mfl {

/// Weighted particle representation of the first-layer measure.
///
/// Training always runs with uniform weights; non-uniform weights exist for
/// mixture measures used in directional-derivative checks.
struct ParticleCloud {
    Matrix W;       ///< N x d' particle parameters
    Vector weights; ///< N probabilities, nonnegative, summing to 1

    Eigen::Index size() const { return W.rows(); }
    Eigen::Index param_dim() const { return W.cols(); }

    /// Mean of ||w||^2 under the weights.
    double mean_sq_norm() const { return weights.dot(W.rowwise().squaredNorm()); }

    /// Throws if weights are invalid or entries non-finite.
    void validate() const;
};

/// Empirical Gram matrix Sigma = E_mu[h(X; w) h(X; w)^T], n x n, symmetric PSD.
struct GramMatrix {
    Matrix sigma;

    Eigen::Index n() const { return sigma.rows(); }
    double frobenius_norm() const { return sigma.norm(); }
};

/// Draw N particles i.i.d. from N(0, I / lambda_w) with uniform weights.
/// Fully determined by the seed (stream label "init").
ParticleCloud init_cloud(int count, int param_dim, double lambda_w, std::uint64_t seed);

/// Sigma = sum_j weights[j] H(:,j) H(:,j)^T; uniform weights give (1/N) H H^T.
GramMatrix weighted_sigma(const Matrix& H, const Vector& weights);

/// The mixture (1 - t) * base + t * delta_point as an (N+1)-particle cloud.
ParticleCloud mixture_measure(const ParticleCloud& base, const Vector& point, double t);

/// Cloud snapshot serialization (see README for the binary layout).
void save_cloud(const ParticleCloud& cloud, const std::filesystem::path& path);
ParticleCloud load_cloud(const std::filesystem::path& path);

/// Checkpoint = cloud snapshot + step counter + seed. Because every noise
/// draw is addressed by (seed, step, particle), the pair (seed, step) is the
/// complete RNG cursor and a resumed run continues bit for bit.
struct Checkpoint {
    ParticleCloud cloud;
    std::int64_t step = 0;
    std::uint64_t seed = 0;
};

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

} // namespace mfl
