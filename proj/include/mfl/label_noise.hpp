#pragma once

#include "mfl/dynamics.hpp"

namespace mfl {

/// Fresh per-step uniform label noise fed only to the inner solve.
struct NoiseDraw {
    Matrix eps;            ///< n x T, entries i.i.d. Unif[-tilde_sigma, tilde_sigma]
    std::int64_t step = 0; ///< step the draw belongs to
};

/// Draw label noise from the stream (seed, "label-noise", step, task).
NoiseDraw sample_label_noise(Eigen::Index n, Eigen::Index tasks, double tilde_sigma,
                             std::uint64_t seed, std::int64_t step);

/// Label-noise variant of the first variation, with both inner solutions
/// frozen: lambda * (-(lambda_a / 2T) sum_t (a_t(w)^2 - e_t(w)^2) + (lambda_w / 2) ||w||^2).
/// e_t is the second layer fitted on the noise alone (beta_t = M^{-1} eps_t).
double noisy_first_variation(const Vector& a_at_w, const Vector& e_at_w, const Vector& w,
                             const Hyperparams& hyper);

/// Parameter gradient of the noisy first variation; the noise-fitting term
/// enters with a minus sign, so the drift pushes toward kernels the noise is
/// hard to fit with.
Vector noisy_grad_first_variation(Eigen::Index j, const Matrix& H, const Matrix& grads_j,
                                  const RidgeSolution& sol, const Matrix& beta,
                                  const Vector& w_j, const Hyperparams& hyper);

/// One label-noise training step. Draws eps, solves the two ridge systems
/// alpha = M^{-1} Y and beta = M^{-1} eps off one factorization, then applies
/// the Langevin update with the noisy drift. With tilde_sigma == 0 the result
/// is bit-identical to mfld_step under the same seed.
MfldStepResult noisy_mfld_step(const ParticleCloud& cloud, const Dataset& data,
                               const FeatureModel& model, const Hyperparams& hyper,
                               std::uint64_t seed, std::int64_t step);

/// G(mu) + (bar_lambda_a tilde_sigma^2 / 6n) d_{bar_lambda_a}(mu); the
/// objective the label-noise procedure minimizes in expectation (entropy
/// term omitted, as everywhere in the reported metrics).
double regularized_objective(const RidgeSolution& sol, const Matrix& Y, const ParticleCloud& cloud,
                             const Hyperparams& hyper);

struct SigmaCondition {
    bool ok = false;
    double margin = 0.0; ///< lambda_min((1/T) sum_t Y_t Y_t^T) - tilde_sigma^2 / 3
};

/// Admissibility of the label-noise width. For T < n the label Gram sum is
/// rank deficient, so any tilde_sigma > 0 reports a negative margin; callers
/// are expected to warn rather than refuse in the single-output setting.
SigmaCondition sigma_condition(const Matrix& Y, double tilde_sigma);

struct NoiseExpectationCheck {
    double mc_mean = 0.0;
    double closed_form = 0.0;
    double rel_err = 0.0;
};

/// Monte-Carlo check of the expectation identity behind the procedure:
/// averaging the noisy inner objective over K fresh draws approaches
/// (bar_lambda_a / 2T) sum_t Y_t^T M^{-1} Y_t
///   - (bar_lambda_a tilde_sigma^2 / 6) tr(M^{-1}) + tilde_sigma^2 / 6.
NoiseExpectationCheck noise_expectation_check(const ParticleCloud& cloud, const Dataset& data,
                                              const FeatureModel& model, const Hyperparams& hyper,
                                              int draws, std::uint64_t seed);

} // namespace mfl
