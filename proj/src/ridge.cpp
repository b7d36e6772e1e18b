#include "mfl/ridge.hpp"

#include "mfl/errors.hpp"

#include <cmath>

namespace mfl {

void Hyperparams::validate() const {
    const bool finite = std::isfinite(lambda) && std::isfinite(lambda_a) && std::isfinite(lambda_w) &&
                        std::isfinite(eta) && std::isfinite(tilde_sigma);
    if (!finite) throw config_error("Hyperparams: non-finite value");
    if (!(lambda > 0.0)) throw config_error("Hyperparams: lambda must be positive");
    if (!(lambda_w > 0.0)) throw config_error("Hyperparams: lambda_w must be positive");
    if (!(eta > 0.0)) throw config_error("Hyperparams: eta must be positive");
    if (lambda_a < 0.0) throw config_error("Hyperparams: lambda_a must be nonnegative");
    if (tilde_sigma < 0.0) throw config_error("Hyperparams: tilde_sigma must be nonnegative");
}

Matrix RidgeSolution::solve(const Matrix& rhs) const {
    detail::require(rhs.rows() == sigma_.rows(), "RidgeSolution::solve: rhs has wrong row count");
    if (!factorized_) throw numeric_error("RidgeSolution::solve: no factorization (lambda_a == 0)");
    return llt_.solve(rhs);
}

double RidgeSolution::trace_m_inverse() const {
    if (!factorized_) throw numeric_error("RidgeSolution::trace_m_inverse: no factorization");
    if (trace_m_inv_ < 0.0) {
        // M^{-1} = L^{-T} L^{-1}, so trace(M^{-1}) = ||L^{-1}||_F^2.
        const Matrix& L = llt_.matrixLLT();
        const Eigen::Index n = L.rows();
        Matrix Linv = Matrix::Identity(n, n);
        L.triangularView<Eigen::Lower>().solveInPlace(Linv);
        trace_m_inv_ = Linv.squaredNorm();
    }
    return trace_m_inv_;
}

RidgeSolution fit_second_layer(const GramMatrix& sigma, const Matrix& Y, double bar_lambda_a) {
    const Eigen::Index n = sigma.n();
    detail::require(sigma.sigma.cols() == n, "fit_second_layer: Sigma not square");
    detail::require(Y.rows() == n, "fit_second_layer: Y has wrong row count");
    if (!(bar_lambda_a > 0.0))
        throw dimension_error("fit_second_layer: bar_lambda_a must be positive");
    if (!sigma.sigma.allFinite() || !Y.allFinite())
        throw numeric_error("fit_second_layer: non-finite input");

    RidgeSolution sol;
    sol.sigma_ = sigma.sigma;
    sol.bar_lambda_a_ = bar_lambda_a;
    Matrix M = sigma.sigma;
    M.diagonal().array() += static_cast<double>(n) * bar_lambda_a;
    sol.llt_.compute(M);
    if (sol.llt_.info() != Eigen::Success)
        throw numeric_error("fit_second_layer: Cholesky factorization failed");
    sol.alpha_ = sol.llt_.solve(Y);
    sol.factorized_ = true;
    return sol;
}

RidgeSolution zero_second_layer(const GramMatrix& sigma, Eigen::Index tasks) {
    RidgeSolution sol;
    sol.sigma_ = sigma.sigma;
    sol.alpha_ = Matrix::Zero(sigma.n(), tasks);
    sol.bar_lambda_a_ = 0.0;
    sol.factorized_ = false;
    return sol;
}

Matrix fit_alpha_woodbury(const Matrix& H, const Vector& weights, const Matrix& Y,
                          double bar_lambda_a) {
    detail::require(H.cols() == weights.size(), "fit_alpha_woodbury: H columns != weight count");
    detail::require(Y.rows() == H.rows(), "fit_alpha_woodbury: Y has wrong row count");
    if (!(bar_lambda_a > 0.0))
        throw dimension_error("fit_alpha_woodbury: bar_lambda_a must be positive");

    // M = c I + Hs Hs^T with Hs = H diag(sqrt(weights)) and c = n bar_lambda_a.
    // Woodbury: M^{-1} Y = (Y - Hs (c I_N + Hs^T Hs)^{-1} Hs^T Y) / c.
    const double c = static_cast<double>(H.rows()) * bar_lambda_a;
    const Matrix Hs = H * weights.cwiseSqrt().asDiagonal();
    Matrix inner = Hs.transpose() * Hs;
    inner.diagonal().array() += c;
    const Eigen::LLT<Matrix> llt(inner);
    if (llt.info() != Eigen::Success)
        throw numeric_error("fit_alpha_woodbury: factorization failed");
    return (Y - Hs * llt.solve(Hs.transpose() * Y)) / c;
}

Matrix second_layer_values(const Matrix& H, const RidgeSolution& sol) {
    detail::require(H.rows() == sol.n(), "second_layer_values: H has wrong row count");
    return H.transpose() * sol.alpha();
}

Matrix predict(const FeatureModel& model, const Matrix& Xq, const ParticleCloud& cloud,
               const Matrix& a_values) {
    detail::require(a_values.rows() == cloud.size(), "predict: a_values has wrong particle count");
    const Matrix Hq = feature_matrix(model, Xq, cloud.W);
    return Hq * (a_values.array().colwise() * cloud.weights.array()).matrix();
}

Matrix predict(const FeatureModel& model, const Matrix& Xq, const ParticleCloud& cloud,
               const RidgeSolution& sol, const Matrix& train_H) {
    return predict(model, Xq, cloud, second_layer_values(train_H, sol));
}

ObjectiveRecord objectives(const RidgeSolution& sol, const Matrix& Y, const ParticleCloud& cloud,
                           const Hyperparams& hyper) {
    detail::require(Y.rows() == sol.n(), "objectives: Y has wrong row count");
    detail::require(Y.cols() == sol.tasks(), "objectives: Y has wrong task count");
    const double n = static_cast<double>(sol.n());
    const double T = static_cast<double>(sol.tasks());

    const Matrix fitted = sol.sigma() * sol.alpha();
    ObjectiveRecord rec;
    rec.train_mse = (Y - fitted).squaredNorm() / (n * T);
    rec.a_sq_norm = (sol.alpha().array() * fitted.array()).sum() / T;
    rec.U = 0.5 * rec.train_mse + 0.5 * sol.bar_lambda_a() * rec.a_sq_norm;
    rec.w_sq_norm = cloud.mean_sq_norm();
    rec.G = rec.U + 0.5 * hyper.bar_lambda_w() * rec.w_sq_norm;
    return rec;
}

double closed_form_inner_objective(const RidgeSolution& sol, const Matrix& Y) {
    detail::require(Y.rows() == sol.n(), "closed_form_inner_objective: Y has wrong row count");
    detail::require(Y.cols() == sol.tasks(), "closed_form_inner_objective: Y has wrong task count");
    // Y_t^T M^{-1} Y_t = Y_t . alpha_t, summed over tasks.
    const double quad = (Y.array() * sol.alpha().array()).sum();
    return 0.5 * sol.bar_lambda_a() * quad / static_cast<double>(sol.tasks());
}

} // namespace mfl
