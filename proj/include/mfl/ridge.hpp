#pragma once

#include "mfl/particle_cloud.hpp"

namespace mfl {

/// Regularization and step-size hyperparameters. The products
/// bar_lambda_a = lambda * lambda_a and bar_lambda_w = lambda * lambda_w are
/// the effective ridge and weight-decay strengths.
struct Hyperparams {
    double lambda = 0.004;    ///< temperature / entropy scale
    double lambda_a = 0.25;   ///< second-layer l2 strength
    double lambda_w = 0.25;   ///< first-layer l2 strength
    double eta = 0.2;         ///< step size
    double tilde_sigma = 0.0; ///< label-noise half-width (>= 0)

    double bar_lambda_a() const { return lambda * lambda_a; }
    double bar_lambda_w() const { return lambda * lambda_w; }

    /// Run-level validation. lambda_a == 0 is allowed: it turns the drift
    /// into pure weight decay (the Ornstein-Uhlenbeck diagnostic mode) and
    /// the inner solve is skipped.
    void validate() const;
};

/// Exact inner solution: columns alpha_t solve (Sigma + n bar_lambda_a I) alpha_t = Y_t.
/// Keeps the Cholesky factor of M = Sigma + n bar_lambda_a I for reuse
/// (extra right-hand sides, trace of M^{-1}, quadratic forms).
class RidgeSolution {
public:
    const Matrix& alpha() const { return alpha_; }
    const Matrix& sigma() const { return sigma_; }
    double bar_lambda_a() const { return bar_lambda_a_; }
    Eigen::Index n() const { return sigma_.rows(); }
    Eigen::Index tasks() const { return alpha_.cols(); }

    /// M^{-1} rhs through the cached factorization.
    Matrix solve(const Matrix& rhs) const;

    /// trace(M^{-1}), computed once from the Cholesky factor and cached.
    double trace_m_inverse() const;

    /// True when the solution was produced with bar_lambda_a == 0 (alpha is
    /// identically zero and no factorization exists).
    bool trivial() const { return !factorized_; }

private:
    friend RidgeSolution fit_second_layer(const GramMatrix&, const Matrix&, double);
    friend RidgeSolution zero_second_layer(const GramMatrix&, Eigen::Index);

    Eigen::LLT<Matrix> llt_;
    Matrix alpha_;
    Matrix sigma_;
    double bar_lambda_a_ = 0.0;
    bool factorized_ = false;
    mutable double trace_m_inv_ = -1.0;
};

/// Fit the optimal second layer by kernel ridge regression. Requires
/// bar_lambda_a > 0, which makes M positive definite without jitter.
RidgeSolution fit_second_layer(const GramMatrix& sigma, const Matrix& Y, double bar_lambda_a);

/// The lambda_a == 0 stand-in: alpha = 0, no factorization.
RidgeSolution zero_second_layer(const GramMatrix& sigma, Eigen::Index tasks);

/// Woodbury route for the same alpha: solves an N x N system instead of the
/// n x n one; worthwhile when N < n/2. Cross-validates the dense path.
Matrix fit_alpha_woodbury(const Matrix& H, const Vector& weights, const Matrix& Y,
                          double bar_lambda_a);

/// Second-layer values per particle: A(j, t) = a_t(w_j) = H(:,j)^T alpha_t. Size N x T.
Matrix second_layer_values(const Matrix& H, const RidgeSolution& sol);

/// Network predictions f_t(x) = sum_j weights[j] a_t(w_j) h(x; w_j) on query
/// points, given the per-particle values A = second_layer_values(H, sol)
/// from the training features. On the training inputs this equals Sigma * alpha.
Matrix predict(const FeatureModel& model, const Matrix& Xq, const ParticleCloud& cloud,
               const Matrix& a_values);

/// Convenience overload that recomputes A from the training features.
Matrix predict(const FeatureModel& model, const Matrix& Xq, const ParticleCloud& cloud,
               const RidgeSolution& sol, const Matrix& train_H);

struct ObjectiveRecord {
    double U = 0.0;         ///< inner objective: train_mse/2 + (bar_lambda_a/2) a_sq_norm
    double G = 0.0;         ///< U + (bar_lambda_w/2) w_sq_norm
    double train_mse = 0.0; ///< (1/nT) sum_t ||Y_t - Sigma alpha_t||^2
    double a_sq_norm = 0.0; ///< (1/T) sum_t alpha_t^T Sigma alpha_t
    double w_sq_norm = 0.0; ///< sum_j weights[j] ||w_j||^2
};

ObjectiveRecord objectives(const RidgeSolution& sol, const Matrix& Y, const ParticleCloud& cloud,
                           const Hyperparams& hyper);

/// The closed form (bar_lambda_a / 2T) sum_t Y_t^T M^{-1} Y_t. Algebraically
/// equal to ObjectiveRecord::U; the two routes cross-check each other.
double closed_form_inner_objective(const RidgeSolution& sol, const Matrix& Y);

} // namespace mfl
