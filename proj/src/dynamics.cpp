#include "mfl/dynamics.hpp"

#include "mfl/errors.hpp"
#include "mfl/rng.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

namespace mfl {

double first_variation(const Vector& a_at_w, const Vector& w, const Hyperparams& hyper) {
    const double T = static_cast<double>(a_at_w.size());
    return hyper.lambda * (-0.5 * hyper.lambda_a / T * a_at_w.squaredNorm() +
                           0.5 * hyper.lambda_w * w.squaredNorm());
}

Vector grad_first_variation(Eigen::Index j, const Matrix& H, const Matrix& grads_j,
                            const RidgeSolution& sol, const Vector& w_j,
                            const Hyperparams& hyper) {
    detail::require(j >= 0 && j < H.cols(), "grad_first_variation: particle index out of range");
    detail::require(H.rows() == sol.n(), "grad_first_variation: H has wrong row count");
    detail::require(grads_j.rows() == H.rows(), "grad_first_variation: grads_j has wrong row count");
    detail::require(grads_j.cols() == w_j.size(), "grad_first_variation: grads_j has wrong column count");

    const double T = static_cast<double>(sol.tasks());
    const Vector a_j = sol.alpha().transpose() * H.col(j);      // T
    const Vector r = sol.alpha() * a_j;                         // n
    return hyper.lambda * (-(hyper.lambda_a / T) * (grads_j.transpose() * r) +
                           hyper.lambda_w * w_j);
}

InnerState solve_inner(const ParticleCloud& cloud, const Matrix& X, const Matrix& Y,
                       const FeatureModel& model, double bar_lambda_a) {
    InnerState state;
    state.H = feature_matrix(model, X, cloud.W);
    state.gram = weighted_sigma(state.H, cloud.weights);
    state.sol = bar_lambda_a > 0.0 ? fit_second_layer(state.gram, Y, bar_lambda_a)
                                   : zero_second_layer(state.gram, Y.cols());
    state.a_values = second_layer_values(state.H, state.sol);
    return state;
}

double lsi_alpha(const Hyperparams& hyper, double c_l) {
    detail::require(c_l >= 0.0, "lsi_alpha: c_l must be nonnegative");
    if (c_l == 0.0) return hyper.lambda_w;
    if (hyper.lambda_a == 0.0) return 0.0;
    // lambda_a c_l^2 / bar_lambda_a^2 = c_l^2 / (lambda^2 lambda_a)
    const double exponent = -2.0 * c_l * c_l / (hyper.lambda * hyper.lambda * hyper.lambda_a);
    return hyper.lambda_w * std::exp(exponent);
}

namespace detail {

Matrix drift_matrix(const ParticleCloud& cloud, const Matrix& X, const Matrix& H,
                    const RidgeSolution& sol, const Matrix& a_values, const Hyperparams& hyper,
                    const Matrix* beta, const Matrix* e_values) {
    const Eigen::Index N = cloud.size();
    const Eigen::Index d = X.cols();
    const double T = static_cast<double>(sol.tasks());

    // grad_w h(x_i; w_j) = s_ij (x_i, 1) with s_ij = 1 - H_ij^2, so the data
    // term of the drift for particle j is grads_j^T r_j with r_j = alpha a_j
    // (minus beta e_j under label noise). Batched over particles:
    Matrix R = sol.alpha() * a_values.transpose(); // n x N
    if (beta != nullptr) R -= *beta * e_values->transpose();
    const Matrix P = (1.0 - H.array().square()).matrix().cwiseProduct(R);

    Matrix drift(N, cloud.param_dim());
    drift.leftCols(d) = (X.transpose() * P).transpose();
    drift.col(d) = P.colwise().sum().transpose();
    drift *= -hyper.lambda * hyper.lambda_a / T;
    drift += (hyper.lambda * hyper.lambda_w) * cloud.W;
    return drift;
}

MfldStepResult step_impl(const ParticleCloud& cloud, const Dataset& data, const FeatureModel& model,
                         const Hyperparams& hyper, std::uint64_t seed, std::int64_t step,
                         const Matrix* eps) {
    const auto t0 = std::chrono::steady_clock::now();
    cloud.validate();
    if ((cloud.weights.array() - 1.0 / static_cast<double>(cloud.size())).abs().maxCoeff() > 1e-12)
        throw dimension_error("mfld_step: training requires uniform weights");

    const InnerState state = solve_inner(cloud, data.X, data.Y, model, hyper.bar_lambda_a());

    Matrix beta, e_values;
    const Matrix* beta_ptr = nullptr;
    const Matrix* e_ptr = nullptr;
    if (eps != nullptr) {
        detail::require(eps->rows() == data.Y.rows() && eps->cols() == data.Y.cols(),
                        "step: label noise has wrong shape");
        beta = state.sol.solve(*eps);
        e_values = state.H.transpose() * beta;
        beta_ptr = &beta;
        e_ptr = &e_values;
    }

    const Matrix drift =
        drift_matrix(cloud, data.X, state.H, state.sol, state.a_values, hyper, beta_ptr, e_ptr);

    MfldStepResult result;
    result.cloud.W.resize(cloud.size(), cloud.param_dim());
    result.cloud.weights = cloud.weights;

    const double noise_scale = std::sqrt(2.0 * hyper.eta * hyper.lambda);
    const rng::CounterStream xi(seed, "mfld", static_cast<std::uint64_t>(step));
    const Eigen::Index dprime = cloud.param_dim();
#pragma omp parallel for schedule(static)
    for (Eigen::Index j = 0; j < cloud.size(); ++j) {
        Vector noise(dprime);
        xi.fill_normal(static_cast<std::uint64_t>(j), {noise.data(), static_cast<std::size_t>(dprime)});
        result.cloud.W.row(j) = cloud.W.row(j) - hyper.eta * drift.row(j) +
                                noise_scale * noise.transpose();
    }

    if (!result.cloud.W.allFinite())
        throw divergence_error("mfld_step: non-finite particle update at step " + std::to_string(step));
    const double mean_w_sq_new = result.cloud.mean_sq_norm();
    const double bound = 1e6 * static_cast<double>(cloud.param_dim()) / hyper.lambda_w;
    if (mean_w_sq_new > bound) {
        std::ostringstream msg;
        msg << "mfld_step: diverged at step " << step << " (mean ||w||^2 = " << mean_w_sq_new
            << " > " << bound << "); reduce eta";
        throw divergence_error(msg.str());
    }

    result.report.step = step;
    result.report.mean_grad_norm = drift.rowwise().norm().mean();
    result.report.mean_w_sq = cloud.mean_sq_norm();
    result.report.objectives = objectives(state.sol, data.Y, cloud, hyper);
    result.report.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

} // namespace detail

MfldStepResult mfld_step(const ParticleCloud& cloud, const Dataset& data, const FeatureModel& model,
                         const Hyperparams& hyper, std::uint64_t seed, std::int64_t step) {
    return detail::step_impl(cloud, data, model, hyper, seed, step, nullptr);
}

} // namespace mfl
