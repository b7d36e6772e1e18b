#include "mfl/errors.hpp"
#include "mfl/label_noise.hpp"

#include "mfl/diagnostics.hpp"
#include "mfl/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace mfl;

namespace {

struct Instance {
    FeatureModel model;
    Dataset data;
    ParticleCloud cloud;
    Hyperparams hyper;
    InnerState state;
};

Instance make_instance(std::uint64_t seed, int n, int N, int d, Hyperparams hyper,
                       double sigma = 0.3) {
    Instance inst;
    inst.model = {Activation::TanhAffine, d};
    inst.data = gen_synthetic(d, n, 16, TargetKind::Product12, 2.0, sigma, seed);
    inst.cloud = init_cloud(N, d + 1, hyper.lambda_w, seed);
    inst.hyper = hyper;
    inst.state = solve_inner(inst.cloud, inst.data.X, inst.data.Y, inst.model,
                             hyper.bar_lambda_a());
    return inst;
}

} // namespace

TEST_SUITE("label_noise") {

TEST_CASE("noise draws") {
    SUBCASE("zero width gives all zeros") {
        const NoiseDraw draw = sample_label_noise(50, 2, 0.0, 3, 7);
        CHECK(draw.eps.cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("bounded by the half width, variance near s^2/3") {
        const double s = 0.8;
        const NoiseDraw draw = sample_label_noise(200000, 1, s, 3, 7);
        CHECK(draw.eps.cwiseAbs().maxCoeff() <= s);
        const double var = draw.eps.squaredNorm() / draw.eps.size();
        // Var of eps^2 for uniform is s^4 (1/5 - 1/9).
        const double se = s * s * std::sqrt((1.0 / 5.0 - 1.0 / 9.0) / draw.eps.size());
        CHECK(std::abs(var - s * s / 3.0) <= 3.0 * se);
    }
    SUBCASE("deterministic per (seed, step), fresh across steps") {
        const NoiseDraw a = sample_label_noise(40, 1, 0.5, 11, 3);
        const NoiseDraw b = sample_label_noise(40, 1, 0.5, 11, 3);
        const NoiseDraw c = sample_label_noise(40, 1, 0.5, 11, 4);
        CHECK(a.eps == b.eps);
        CHECK(a.eps != c.eps);
    }
    SUBCASE("negative width is rejected") {
        CHECK_THROWS_AS(sample_label_noise(10, 1, -0.1, 1, 0), dimension_error);
    }
}

TEST_CASE("zero-width label-noise step is bit-identical to the plain step") {
    Hyperparams hyper{0.05, 0.5, 0.5, 0.1, 0.0};
    const auto inst = make_instance(21, 30, 12, 5, hyper);
    const MfldStepResult plain = mfld_step(inst.cloud, inst.data, inst.model, hyper, 21, 6);
    const MfldStepResult noisy = noisy_mfld_step(inst.cloud, inst.data, inst.model, hyper, 21, 6);
    CHECK(plain.cloud.W == noisy.cloud.W);
}

TEST_CASE("noisy drift matches finite differences of the noisy first variation") {
    Hyperparams hyper{0.05, 0.5, 0.5, 0.1, 0.6};
    double worst = 0.0;
    for (std::uint64_t s = 0; s < 20; ++s) {
        const auto inst = make_instance(500 + s, 20, 8, 5, hyper);
        const NoiseDraw draw = sample_label_noise(20, 1, hyper.tilde_sigma, 500 + s, 0);
        const Matrix beta = inst.state.sol.solve(draw.eps);

        const Eigen::Index j = static_cast<Eigen::Index>(s % 8);
        const Vector w = inst.cloud.W.row(j).transpose();
        const Matrix grads = feature_grad_matrix(inst.model, inst.data.X, w);
        const Vector analytic =
            noisy_grad_first_variation(j, inst.state.H, grads, inst.state.sol, beta, w, hyper);

        const auto value_at = [&](const Vector& wp) {
            Vector a(1), e(1);
            double av = 0.0, ev = 0.0;
            for (Eigen::Index i = 0; i < 20; ++i) {
                const double h = feature_value(inst.model, inst.data.X.row(i).transpose(), wp);
                av += h * inst.state.sol.alpha()(i, 0);
                ev += h * beta(i, 0);
            }
            a(0) = av;
            e(0) = ev;
            return noisy_first_variation(a, e, wp, hyper);
        };

        const double fd_step = 1e-4;
        Vector fd = Vector::Zero(w.size());
        for (Eigen::Index k = 0; k < w.size(); ++k) {
            Vector wp = w, wm = w;
            wp(k) += fd_step;
            wm(k) -= fd_step;
            fd(k) = (value_at(wp) - value_at(wm)) / (2.0 * fd_step);
        }
        worst = std::max(worst, (analytic - fd).norm() / fd.norm());
    }
    CHECK(worst <= 1e-5);
}

TEST_CASE("fitting pure noise flips the sign of the data term") {
    // With zero labels the drift is lambda*(+(la/T) e_t J^T beta + lw w); with the
    // same noise used as labels it is lambda*(-(la/T) a_t J^T alpha + lw w) and
    // alpha == beta. The two must therefore average to the weight-decay drift.
    Hyperparams hyper{0.05, 0.5, 0.5, 0.1, 0.5};
    auto inst = make_instance(31, 24, 9, 4, hyper);
    const NoiseDraw draw = sample_label_noise(24, 1, hyper.tilde_sigma, 31, 2);

    const GramMatrix& gram = inst.state.gram;
    const RidgeSolution zero_sol = fit_second_layer(gram, Matrix::Zero(24, 1), hyper.bar_lambda_a());
    const Matrix beta = zero_sol.solve(draw.eps);
    const RidgeSolution noise_as_labels = fit_second_layer(gram, draw.eps, hyper.bar_lambda_a());

    for (Eigen::Index j = 0; j < inst.cloud.size(); ++j) {
        const Vector w = inst.cloud.W.row(j).transpose();
        const Matrix grads = feature_grad_matrix(inst.model, inst.data.X, w);
        const Vector noisy_zero_labels =
            noisy_grad_first_variation(j, inst.state.H, grads, zero_sol, beta, w, hyper);
        const Vector clean_on_noise =
            grad_first_variation(j, inst.state.H, grads, noise_as_labels, w, hyper);
        const Vector sum = noisy_zero_labels + clean_on_noise;
        const Vector expected = 2.0 * hyper.lambda * hyper.lambda_w * w;
        CHECK((sum - expected).norm() <= 1e-12 * std::max(1.0, expected.norm()));
    }
}

TEST_CASE("regularized objective") {
    Hyperparams hyper{0.05, 0.5, 0.5, 0.1, 0.0};
    const auto inst = make_instance(41, 30, 10, 4, hyper);

    SUBCASE("zero width reduces to G") {
        const ObjectiveRecord rec = objectives(inst.state.sol, inst.data.Y, inst.cloud, hyper);
        CHECK(regularized_objective(inst.state.sol, inst.data.Y, inst.cloud, hyper) == rec.G);
    }
    SUBCASE("zero kernel contributes no dof term") {
        Hyperparams noisy = hyper;
        noisy.tilde_sigma = 0.8;
        GramMatrix zero{Matrix::Zero(30, 30)};
        const RidgeSolution sol = fit_second_layer(zero, inst.data.Y, noisy.bar_lambda_a());
        const ObjectiveRecord rec = objectives(sol, inst.data.Y, inst.cloud, noisy);
        CHECK(regularized_objective(sol, inst.data.Y, inst.cloud, noisy) ==
              doctest::Approx(rec.G).epsilon(1e-12));
    }
    SUBCASE("random instance matches the eigenvalue-sum oracle") {
        Hyperparams noisy = hyper;
        noisy.tilde_sigma = 0.8;
        const ObjectiveRecord rec = objectives(inst.state.sol, inst.data.Y, inst.cloud, noisy);
        const Eigen::SelfAdjointEigenSolver<Matrix> eig(inst.state.gram.sigma,
                                                        Eigen::EigenvaluesOnly);
        double dof = 0.0;
        for (Eigen::Index i = 0; i < 30; ++i) {
            const double s = std::max(eig.eigenvalues()(i), 0.0);
            dof += s / (s + 30.0 * noisy.bar_lambda_a());
        }
        const double expected = rec.G + noisy.bar_lambda_a() * 0.64 / (6.0 * 30.0) * dof;
        CHECK(regularized_objective(inst.state.sol, inst.data.Y, inst.cloud, noisy) ==
              doctest::Approx(expected).epsilon(1e-10));
    }
}

TEST_CASE("tilde-sigma admissibility condition") {
    SUBCASE("zero width always passes") {
        const Matrix Y = Matrix::Random(6, 1);
        const SigmaCondition cond = sigma_condition(Y, 0.0);
        CHECK(cond.ok);
        CHECK(cond.margin >= 0.0);
    }
    SUBCASE("single output with n > 1 is rank deficient") {
        const Matrix Y = Matrix::Random(6, 1);
        const SigmaCondition cond = sigma_condition(Y, 0.9);
        CHECK_FALSE(cond.ok);
        CHECK(cond.margin == doctest::Approx(-0.27).epsilon(1e-12));
    }
    SUBCASE("full-rank task Gram matches the eigensolve oracle") {
        std::mt19937 gen(51);
        std::normal_distribution<double> dist;
        Matrix Y(5, 5);
        for (int i = 0; i < Y.size(); ++i) Y.data()[i] = dist(gen);
        const double ts = 0.3;
        const SigmaCondition cond = sigma_condition(Y, ts);
        const Matrix gram_sum = Y * Y.transpose() / 5.0;
        const Eigen::SelfAdjointEigenSolver<Matrix> eig(gram_sum, Eigen::EigenvaluesOnly);
        CHECK(cond.margin ==
              doctest::Approx(eig.eigenvalues().minCoeff() - ts * ts / 3.0).epsilon(1e-10));
    }
}

TEST_CASE("noise expectation identity") {
    Hyperparams hyper{0.05, 0.5, 0.5, 0.1, 1.0};
    const auto inst = make_instance(61, 60, 12, 5, hyper, 0.4);

    SUBCASE("zero width is exact") {
        Hyperparams off = hyper;
        off.tilde_sigma = 0.0;
        const NoiseExpectationCheck chk =
            noise_expectation_check(inst.cloud, inst.data, inst.model, off, 1000, 61);
        CHECK(chk.mc_mean == chk.closed_form);
        CHECK(chk.rel_err == 0.0);
    }
    SUBCASE("error shrinks as draws grow and is small at 1e4") {
        const NoiseExpectationCheck coarse =
            noise_expectation_check(inst.cloud, inst.data, inst.model, hyper, 1000, 61);
        const NoiseExpectationCheck fine =
            noise_expectation_check(inst.cloud, inst.data, inst.model, hyper, 10000, 61);
        CHECK(fine.rel_err < coarse.rel_err);
        CHECK(fine.rel_err <= 1e-2);
    }
    SUBCASE("trace identity links the two decomposition forms") {
        const double n = 60.0;
        const double bla = hyper.bar_lambda_a();
        const double dof = degrees_of_freedom(inst.state.gram, bla, 60);
        const double lhs = inst.state.sol.trace_m_inverse() * n * bla + dof;
        CHECK(std::abs(lhs - n) / n <= 1e-8);

        // closed_form - clean inner objective = ts^2 dof / (6n) once the trace
        // identity is substituted.
        const NoiseExpectationCheck chk =
            noise_expectation_check(inst.cloud, inst.data, inst.model, hyper, 1000, 61);
        const double clean = closed_form_inner_objective(inst.state.sol, inst.data.Y);
        const double link = hyper.tilde_sigma * hyper.tilde_sigma * dof / (6.0 * n);
        CHECK(chk.closed_form - clean == doctest::Approx(link).epsilon(1e-10));
    }
}

TEST_CASE("two-solve step equals a brute-force per-particle update") {
    Hyperparams hyper{0.05, 0.5, 0.5, 0.1, 0.7};
    const auto inst = make_instance(71, 18, 7, 4, hyper);
    const MfldStepResult fast = noisy_mfld_step(inst.cloud, inst.data, inst.model, hyper, 71, 9);

    const NoiseDraw draw = sample_label_noise(18, 1, hyper.tilde_sigma, 71, 9);
    const Matrix beta = inst.state.sol.solve(draw.eps);
    const rng::CounterStream xi(71, "mfld", 9);
    for (Eigen::Index j = 0; j < inst.cloud.size(); ++j) {
        const Vector w = inst.cloud.W.row(j).transpose();
        const Matrix grads = feature_grad_matrix(inst.model, inst.data.X, w);
        const Vector g =
            noisy_grad_first_variation(j, inst.state.H, grads, inst.state.sol, beta, w, hyper);
        Vector noise(5);
        xi.fill_normal(static_cast<std::uint64_t>(j), {noise.data(), 5});
        const Vector expected =
            w - hyper.eta * g + std::sqrt(2.0 * hyper.eta * hyper.lambda) * noise;
        CHECK((fast.cloud.W.row(j).transpose() - expected).norm() <= 1e-12);
    }
}

} // TEST_SUITE
