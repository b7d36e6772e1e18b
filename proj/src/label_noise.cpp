#include "mfl/label_noise.hpp"

#include "mfl/diagnostics.hpp"
#include "mfl/errors.hpp"
#include "mfl/rng.hpp"

#include <cmath>
#include <vector>

namespace mfl {

NoiseDraw sample_label_noise(Eigen::Index n, Eigen::Index tasks, double tilde_sigma,
                             std::uint64_t seed, std::int64_t step) {
    if (tilde_sigma < 0.0) throw dimension_error("sample_label_noise: tilde_sigma must be >= 0");
    NoiseDraw draw;
    draw.step = step;
    draw.eps.resize(n, tasks);
    const rng::CounterStream stream(seed, "label-noise", static_cast<std::uint64_t>(step));
    for (Eigen::Index t = 0; t < tasks; ++t) {
        for (Eigen::Index i = 0; i < n; ++i) {
            draw.eps(i, t) = stream.uniform_sym(static_cast<std::uint64_t>(t),
                                                static_cast<std::uint64_t>(i), tilde_sigma);
        }
    }
    return draw;
}

double noisy_first_variation(const Vector& a_at_w, const Vector& e_at_w, const Vector& w,
                             const Hyperparams& hyper) {
    detail::require(a_at_w.size() == e_at_w.size(), "noisy_first_variation: task count mismatch");
    const double T = static_cast<double>(a_at_w.size());
    return hyper.lambda *
           (-0.5 * hyper.lambda_a / T * (a_at_w.squaredNorm() - e_at_w.squaredNorm()) +
            0.5 * hyper.lambda_w * w.squaredNorm());
}

Vector noisy_grad_first_variation(Eigen::Index j, const Matrix& H, const Matrix& grads_j,
                                  const RidgeSolution& sol, const Matrix& beta,
                                  const Vector& w_j, const Hyperparams& hyper) {
    detail::require(j >= 0 && j < H.cols(), "noisy_grad_first_variation: particle index out of range");
    detail::require(beta.rows() == sol.n() && beta.cols() == sol.tasks(),
                    "noisy_grad_first_variation: beta has wrong shape");

    const double T = static_cast<double>(sol.tasks());
    const Vector a_j = sol.alpha().transpose() * H.col(j);
    const Vector e_j = beta.transpose() * H.col(j);
    const Vector r = sol.alpha() * a_j - beta * e_j;
    return hyper.lambda * (-(hyper.lambda_a / T) * (grads_j.transpose() * r) +
                           hyper.lambda_w * w_j);
}

MfldStepResult noisy_mfld_step(const ParticleCloud& cloud, const Dataset& data,
                               const FeatureModel& model, const Hyperparams& hyper,
                               std::uint64_t seed, std::int64_t step) {
    if (hyper.tilde_sigma == 0.0) {
        // eps is identically zero: same update, and bit-identical by
        // construction since the xi stream keying does not change.
        return detail::step_impl(cloud, data, model, hyper, seed, step, nullptr);
    }
    const NoiseDraw draw =
        sample_label_noise(data.Y.rows(), data.Y.cols(), hyper.tilde_sigma, seed, step);
    return detail::step_impl(cloud, data, model, hyper, seed, step, &draw.eps);
}

double regularized_objective(const RidgeSolution& sol, const Matrix& Y, const ParticleCloud& cloud,
                             const Hyperparams& hyper) {
    const ObjectiveRecord rec = objectives(sol, Y, cloud, hyper);
    if (hyper.tilde_sigma == 0.0) return rec.G;
    const double n = static_cast<double>(sol.n());
    const double dof = degrees_of_freedom(sol);
    return rec.G +
           sol.bar_lambda_a() * hyper.tilde_sigma * hyper.tilde_sigma / (6.0 * n) * dof;
}

SigmaCondition sigma_condition(const Matrix& Y, double tilde_sigma) {
    const Eigen::Index n = Y.rows();
    const double T = static_cast<double>(Y.cols());
    Matrix gram_sum = Matrix::Zero(n, n);
    gram_sum.selfadjointView<Eigen::Lower>().rankUpdate(Y, 1.0 / T);
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(gram_sum.selfadjointView<Eigen::Lower>(),
                                                    Eigen::EigenvaluesOnly);
    // The Gram sum is PSD by construction; clamp eigensolver noise.
    const double lambda_min = std::max(eig.eigenvalues().minCoeff(), 0.0);
    SigmaCondition cond;
    cond.margin = lambda_min - tilde_sigma * tilde_sigma / 3.0;
    cond.ok = cond.margin >= 0.0;
    return cond;
}

NoiseExpectationCheck noise_expectation_check(const ParticleCloud& cloud, const Dataset& data,
                                              const FeatureModel& model, const Hyperparams& hyper,
                                              int draws, std::uint64_t seed) {
    detail::require(draws >= 1000, "noise_expectation_check: need at least 1000 draws");
    const InnerState state = solve_inner(cloud, data.X, data.Y, model, hyper.bar_lambda_a());
    const RidgeSolution& sol = state.sol;
    const double n = static_cast<double>(sol.n());
    const double T = static_cast<double>(sol.tasks());
    const double bla = sol.bar_lambda_a();
    const double ts = hyper.tilde_sigma;

    const double clean_quad = closed_form_inner_objective(sol, data.Y); // (bla/2T) sum Y^T M^{-1} Y

    // Only the noise-dependent part is averaged; the clean quadratic form is
    // common to every draw (and with tilde_sigma == 0 the average is exactly 0).
    std::vector<double> samples(draws);
#pragma omp parallel for schedule(static)
    for (int k = 0; k < draws; ++k) {
        const NoiseDraw draw = sample_label_noise(sol.n(), sol.tasks(), ts, seed, k);
        const Matrix beta = sol.solve(draw.eps);
        double u = 0.0;
        for (Eigen::Index t = 0; t < sol.tasks(); ++t) {
            u += -0.5 * bla * draw.eps.col(t).dot(beta.col(t)) +
                 0.5 * draw.eps.col(t).squaredNorm() / n;
        }
        samples[k] = u / T;
    }

    NoiseExpectationCheck out;
    double sum = 0.0;
    for (double v : samples) sum += v;
    out.mc_mean = clean_quad + sum / draws;
    out.closed_form = clean_quad - bla * ts * ts / 6.0 * sol.trace_m_inverse() + ts * ts / 6.0;
    out.rel_err = std::abs(out.mc_mean - out.closed_form) / std::abs(out.closed_form);
    return out;
}

} // namespace mfl
