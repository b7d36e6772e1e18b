#pragma once

#include "mfl/dataset.hpp"
#include "mfl/ridge.hpp"

#include <cstdint>

namespace mfl {

/// Kernel induced by the first layer: k(x, x') = sum_j weights[j] h(x;w_j) h(x';w_j).
double kernel_eval(const FeatureModel& model, const ParticleCloud& cloud, const Vector& x,
                   const Vector& xp);

/// Empirical kernel alignment  f^T Sigma f / (||f||^2 ||Sigma||_F), in [0, 1].
/// Throws numeric_error when the targets or the kernel are identically zero.
double empirical_alignment(const GramMatrix& gram, const Vector& f_targets);

struct McEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
};

/// Monte-Carlo estimate of the population kernel alignment
/// E[f(x) k(x,x') f(x')] / (E[f^2] sqrt(E[k(x,x')^2])) over x, x' ~ N(0, I).
/// Pairs come from the stream (seed, "align-mc", step); the standard error is
/// computed by batch means over 20 batches.
McEstimate population_alignment(const FeatureModel& model, const ParticleCloud& cloud,
                                const TargetSpec& target, int n_mc, std::uint64_t seed,
                                std::int64_t step = 0);

/// Parameter alignment sum_j weights[j] (u_j . u0)^2 / ||u_j||^2 with the bias
/// coordinate stripped from each particle; a zero u_j contributes zero.
double parameter_alignment(const ParticleCloud& cloud, const Vector& u_circ);

/// Degrees of freedom tr[Sigma (Sigma + n lambda I)^{-1}], by symmetric
/// eigendecomposition (eigenvalues clamped at zero).
double degrees_of_freedom(const GramMatrix& gram, double lambda_reg, Eigen::Index n);

/// Fast route through the cached ridge factorization:
/// d = n - n bar_lambda_a tr(M^{-1}). Agrees with the eigensolve to 1e-8.
double degrees_of_freedom(const RidgeSolution& sol);

/// Alignment lower bound  bar_lambda_a ||f||^2 / (2 U n) - bar_lambda_a.
/// With noiseless labels the empirical alignment always sits above it.
double alignment_lower_bound(double U, const Vector& f_targets, double bar_lambda_a,
                             Eigen::Index n);

/// Mean squared error of the network on held-out pairs.
double test_loss(const FeatureModel& model, const ParticleCloud& cloud, const Matrix& a_values,
                 const Matrix& test_X, const Matrix& test_Y);

/// One evaluation row of a training run.
struct MetricsRecord {
    std::int64_t step = 0;
    double G = 0.0;
    double U = 0.0;
    double train_mse = 0.0;
    double test_mse = 0.0;
    double align_emp = 0.0;
    double align_pop = 0.0;
    double align_pop_stderr = 0.0;
    double param_align = 0.0;
    double dof = 0.0;
    double mean_w_sq = 0.0;
    double mean_a_sq = 0.0;
    double sigma = 0.0;
    double tilde_sigma = 0.0;
    double wall_ms = 0.0;
};

} // namespace mfl
