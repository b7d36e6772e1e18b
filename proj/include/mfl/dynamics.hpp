#pragma once

#include "mfl/dataset.hpp"
#include "mfl/ridge.hpp"

#include <cstdint>

namespace mfl {

/// First variation of the outer objective at a particle:
/// lambda * (-(lambda_a / 2T) ||a(w)||^2 + (lambda_w / 2) ||w||^2),
/// where a(w) comes from second_layer_values at the current measure.
double first_variation(const Vector& a_at_w, const Vector& w, const Hyperparams& hyper);

/// Parameter gradient of the first variation with the inner solution frozen:
/// lambda * (-(lambda_a / T) sum_t a_t(w_j) grads_j^T alpha_t + lambda_w w_j).
/// grads_j is the n x d' matrix of per-sample feature gradients at w_j.
Vector grad_first_variation(Eigen::Index j, const Matrix& H, const Matrix& grads_j,
                            const RidgeSolution& sol, const Vector& w_j,
                            const Hyperparams& hyper);

/// Per-step pipeline products shared by the update and the diagnostics.
struct InnerState {
    Matrix H;        ///< n x N feature matrix
    GramMatrix gram; ///< empirical Gram matrix of the cloud
    RidgeSolution sol;
    Matrix a_values; ///< N x T second-layer values per particle
};

/// Feature matrix, Gram matrix, and inner ridge solve for the current cloud.
/// With bar_lambda_a == 0 the solve is skipped (alpha = 0).
InnerState solve_inner(const ParticleCloud& cloud, const Matrix& X, const Matrix& Y,
                       const FeatureModel& model, double bar_lambda_a);

struct StepReport {
    std::int64_t step = 0;
    double mean_grad_norm = 0.0;
    double mean_w_sq = 0.0;
    ObjectiveRecord objectives; ///< evaluated at the pre-update measure
    double wall_ms = 0.0;
};

struct MfldStepResult {
    ParticleCloud cloud;
    StepReport report;
};

/// One discretized mean-field Langevin step:
/// w_j <- w_j - eta * grad_first_variation(j) + sqrt(2 eta lambda) xi_j,
/// with xi_j drawn from the counter stream keyed (seed, "mfld", step, j).
/// Requires uniform weights. Throws divergence_error on non-finite updates or
/// runaway norms (mean ||w||^2 > 1e6 d'/lambda_w).
MfldStepResult mfld_step(const ParticleCloud& cloud, const Dataset& data, const FeatureModel& model,
                         const Hyperparams& hyper, std::uint64_t seed, std::int64_t step);

/// Log-Sobolev constant estimate lambda_w * exp(-2 lambda_a c_l^2 / bar_lambda_a^2).
/// Diagnostic only; the step-size sanity hint is eta < 1 / (4 lambda alpha).
double lsi_alpha(const Hyperparams& hyper, double c_l);

namespace detail {

/// Gradient of the (optionally label-noise perturbed) first variation at every
/// particle; row j is the drift for particle j. When beta/e_values are given
/// the noise-fitting term -e_t(w_j) grads_j^T beta_t is subtracted.
Matrix drift_matrix(const ParticleCloud& cloud, const Matrix& X, const Matrix& H,
                    const RidgeSolution& sol, const Matrix& a_values, const Hyperparams& hyper,
                    const Matrix* beta, const Matrix* e_values);

/// Shared Langevin update used by the clean and label-noise steps.
/// eps, when non-null, is the fresh label noise for this step.
MfldStepResult step_impl(const ParticleCloud& cloud, const Dataset& data, const FeatureModel& model,
                         const Hyperparams& hyper, std::uint64_t seed, std::int64_t step,
                         const Matrix* eps);

} // namespace detail

} // namespace mfl
