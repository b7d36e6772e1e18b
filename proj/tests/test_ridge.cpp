#include "mfl/errors.hpp"
#include "mfl/ridge.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace mfl;

namespace {

struct RandomInstance {
    FeatureModel model;
    Matrix X;
    ParticleCloud cloud;
    Matrix H;
    GramMatrix gram;
    Matrix Y;
};

RandomInstance random_instance(std::uint32_t seed, int n, int N, int d, double y_scale = 1.0) {
    RandomInstance inst;
    inst.model = {Activation::TanhAffine, d};
    std::mt19937 gen(seed);
    std::normal_distribution<double> dist;
    inst.X.resize(n, d);
    for (int i = 0; i < inst.X.size(); ++i) inst.X.data()[i] = dist(gen);
    inst.cloud = init_cloud(N, d + 1, 1.0, seed);
    inst.H = feature_matrix(inst.model, inst.X, inst.cloud.W);
    inst.gram = weighted_sigma(inst.H, inst.cloud.weights);
    inst.Y.resize(n, 1);
    for (int i = 0; i < n; ++i) inst.Y(i, 0) = y_scale * dist(gen);
    return inst;
}

} // namespace

TEST_SUITE("ridge") {

TEST_CASE("hyperparameter validation") {
    Hyperparams ok{0.01, 0.5, 0.5, 0.1, 0.0};
    CHECK_NOTHROW(ok.validate());
    Hyperparams ou = ok;
    ou.lambda_a = 0.0; // Ornstein-Uhlenbeck diagnostic mode stays legal
    CHECK_NOTHROW(ou.validate());
    Hyperparams bad = ok;
    bad.lambda = 0.0;
    CHECK_THROWS_AS(bad.validate(), config_error);
    bad = ok;
    bad.eta = -1.0;
    CHECK_THROWS_AS(bad.validate(), config_error);
    bad = ok;
    bad.tilde_sigma = -0.5;
    CHECK_THROWS_AS(bad.validate(), config_error);
    CHECK(Hyperparams{0.004, 0.25, 0.25, 0.2, 0.0}.bar_lambda_a() == doctest::Approx(0.001));
}

TEST_CASE("zero Gram matrix reduces to a diagonal solve") {
    GramMatrix gram{Matrix::Zero(4, 4)};
    Matrix Y(4, 1);
    Y << 1.0, -2.0, 0.5, 3.0;
    const double bla = 0.25;
    const RidgeSolution sol = fit_second_layer(gram, Y, bla);
    const Matrix expected = Y / (4.0 * bla);
    CHECK((sol.alpha() - expected).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("zero labels give a zero solution") {
    const auto inst = random_instance(5, 12, 6, 3);
    const RidgeSolution sol = fit_second_layer(inst.gram, Matrix::Zero(12, 1), 0.1);
    CHECK(sol.alpha().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("rank-1 Gram matrix matches the Sherman-Morrison closed form") {
    std::mt19937 gen(17);
    std::normal_distribution<double> dist;
    const int n = 6;
    Vector v(n);
    for (int i = 0; i < n; ++i) v(i) = dist(gen);
    GramMatrix gram{v * v.transpose()};
    const double bla = 0.05;
    const RidgeSolution sol = fit_second_layer(gram, v, bla);
    // (v v^T + c I)^{-1} v = v / (||v||^2 + c), c = n * bla.
    const Vector expected = v / (v.squaredNorm() + n * bla);
    CHECK((sol.alpha().col(0) - expected).norm() / expected.norm() <= 1e-12);
}

TEST_CASE("normal equations hold to 1e-8 on random fits") {
    for (std::uint32_t s = 0; s < 20; ++s) {
        const auto inst = random_instance(100 + s, 20, 9, 4);
        const double bla = 0.02;
        const RidgeSolution sol = fit_second_layer(inst.gram, inst.Y, bla);
        const Matrix residual =
            inst.gram.sigma * sol.alpha() + 20.0 * bla * sol.alpha() - inst.Y;
        CHECK(residual.norm() <= 1e-8 * inst.Y.norm());
    }
}

TEST_CASE("second-layer values respect the ridge bound") {
    for (std::uint32_t s = 0; s < 20; ++s) {
        const auto inst = random_instance(200 + s, 24, 10, 4, 2.0);
        const double bla = 0.03;
        const RidgeSolution sol = fit_second_layer(inst.gram, inst.Y, bla);
        const Matrix A = second_layer_values(inst.H, sol);
        const double cap = inst.Y.cwiseAbs().maxCoeff() / bla;
        CHECK(A.cwiseAbs().maxCoeff() <= cap);
    }
}

TEST_CASE("a zero particle has zero second-layer value") {
    auto inst = random_instance(303, 10, 4, 3);
    inst.cloud.W.row(2).setZero();
    inst.H = feature_matrix(inst.model, inst.X, inst.cloud.W);
    inst.gram = weighted_sigma(inst.H, inst.cloud.weights);
    const RidgeSolution sol = fit_second_layer(inst.gram, inst.Y, 0.1);
    const Matrix A = second_layer_values(inst.H, sol);
    CHECK(A.row(2).cwiseAbs().maxCoeff() == 0.0);
    CHECK(second_layer_values(inst.H, fit_second_layer(inst.gram, Matrix::Zero(10, 1), 0.1))
              .cwiseAbs()
              .maxCoeff() == 0.0);
}

TEST_CASE("predictions on the training inputs equal Sigma alpha") {
    const auto inst = random_instance(42, 15, 8, 3);
    const RidgeSolution sol = fit_second_layer(inst.gram, inst.Y, 0.05);
    const Matrix on_train = predict(inst.model, inst.X, inst.cloud, sol, inst.H);
    const Matrix expected = inst.gram.sigma * sol.alpha();
    CHECK((on_train - expected).cwiseAbs().maxCoeff() <= 1e-8 * inst.Y.cwiseAbs().maxCoeff());
}

TEST_CASE("predictions match the kernel-loop oracle on fresh queries") {
    const auto inst = random_instance(43, 12, 7, 3);
    const RidgeSolution sol = fit_second_layer(inst.gram, inst.Y, 0.05);
    std::mt19937 gen(99);
    std::normal_distribution<double> dist;
    Matrix Xq(5, 3);
    for (int i = 0; i < Xq.size(); ++i) Xq.data()[i] = dist(gen);

    const Matrix pred = predict(inst.model, Xq, inst.cloud, sol, inst.H);

    // Oracle: f(xq) = sum_i khat(xq, x_i) alpha_i with the kernel evaluated
    // by explicit loops over particles.
    for (int q = 0; q < 5; ++q) {
        double f = 0.0;
        for (int i = 0; i < 12; ++i) {
            double k = 0.0;
            for (int j = 0; j < 7; ++j) {
                const Vector w = inst.cloud.W.row(j).transpose();
                k += inst.cloud.weights(j) *
                     feature_value(inst.model, Xq.row(q).transpose(), w) *
                     feature_value(inst.model, inst.X.row(i).transpose(), w);
            }
            f += k * sol.alpha()(i, 0);
        }
        CHECK(pred(q, 0) == doctest::Approx(f).epsilon(1e-10));
    }
}

TEST_CASE("predictions with a zero solution vanish") {
    const auto inst = random_instance(44, 10, 5, 3);
    const RidgeSolution sol = fit_second_layer(inst.gram, Matrix::Zero(10, 1), 0.1);
    const Matrix pred = predict(inst.model, Matrix::Random(4, 3), inst.cloud, sol, inst.H);
    CHECK(pred.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("objectives: zero labels leave only the weight penalty") {
    const auto inst = random_instance(50, 10, 5, 3);
    const Hyperparams hyper{0.1, 0.5, 0.5, 0.1, 0.0};
    const RidgeSolution sol = fit_second_layer(inst.gram, Matrix::Zero(10, 1), hyper.bar_lambda_a());
    const ObjectiveRecord rec = objectives(sol, Matrix::Zero(10, 1), inst.cloud, hyper);
    CHECK(rec.U == 0.0);
    CHECK(rec.G == doctest::Approx(0.5 * hyper.bar_lambda_w() * inst.cloud.mean_sq_norm()));
}

TEST_CASE("objectives: zero kernel reduces to the label norm") {
    GramMatrix gram{Matrix::Zero(6, 6)};
    std::mt19937 gen(3);
    std::normal_distribution<double> dist;
    Matrix Y(6, 1);
    for (int i = 0; i < 6; ++i) Y(i, 0) = dist(gen);
    const Hyperparams hyper{0.1, 0.5, 0.5, 0.1, 0.0};
    const RidgeSolution sol = fit_second_layer(gram, Y, hyper.bar_lambda_a());
    ParticleCloud cloud = init_cloud(4, 4, 1.0, 7);
    const ObjectiveRecord rec = objectives(sol, Y, cloud, hyper);
    CHECK(rec.U == doctest::Approx(Y.squaredNorm() / (2.0 * 6.0)).epsilon(1e-12));
}

TEST_CASE("assembled inner objective equals the closed form on 100 instances") {
    double worst = 0.0;
    for (std::uint32_t s = 0; s < 100; ++s) {
        const auto inst = random_instance(1000 + s, 18, 8, 4);
        const Hyperparams hyper{0.05, 0.4, 0.5, 0.1, 0.0};
        const RidgeSolution sol = fit_second_layer(inst.gram, inst.Y, hyper.bar_lambda_a());
        const ObjectiveRecord rec = objectives(sol, inst.Y, inst.cloud, hyper);
        const double closed = closed_form_inner_objective(sol, inst.Y);
        worst = std::max(worst, std::abs(rec.U - closed) / std::abs(closed));
    }
    CHECK(worst <= 1e-8);
}

TEST_CASE("Woodbury route agrees with the dense solve") {
    for (std::uint32_t s = 0; s < 20; ++s) {
        const int n = (s % 2 == 0) ? 30 : 8;
        const int N = (s % 2 == 0) ? 7 : 20;
        const auto inst = random_instance(2000 + s, n, N, 4);
        const double bla = 0.04;
        const RidgeSolution dense = fit_second_layer(inst.gram, inst.Y, bla);
        const Matrix wood = fit_alpha_woodbury(inst.H, inst.cloud.weights, inst.Y, bla);
        CHECK((dense.alpha() - wood).norm() / dense.alpha().norm() <= 1e-8);
    }
}

TEST_CASE("Woodbury handles zero weights") {
    auto inst = random_instance(3000, 10, 4, 3);
    Vector w(4);
    w << 0.5, 0.5, 0.0, 0.0;
    const GramMatrix gram = weighted_sigma(inst.H, w);
    const RidgeSolution dense = fit_second_layer(gram, inst.Y, 0.1);
    const Matrix wood = fit_alpha_woodbury(inst.H, w, inst.Y, 0.1);
    CHECK((dense.alpha() - wood).norm() / dense.alpha().norm() <= 1e-8);
}

TEST_CASE("fit rejects invalid inputs") {
    const auto inst = random_instance(60, 8, 4, 3);
    CHECK_THROWS_AS(fit_second_layer(inst.gram, inst.Y, 0.0), dimension_error);
    Matrix bad = inst.Y;
    bad(0, 0) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(fit_second_layer(inst.gram, bad, 0.1), numeric_error);
    CHECK_THROWS_AS(fit_second_layer(inst.gram, Matrix::Zero(5, 1), 0.1), dimension_error);
}

TEST_CASE("multi-task plumbing works") {
    const auto inst = random_instance(70, 12, 5, 3);
    std::mt19937 gen(8);
    std::normal_distribution<double> dist;
    Matrix Y(12, 3);
    for (int i = 0; i < Y.size(); ++i) Y.data()[i] = dist(gen);
    const Hyperparams hyper{0.05, 0.4, 0.5, 0.1, 0.0};
    const RidgeSolution sol = fit_second_layer(inst.gram, Y, hyper.bar_lambda_a());
    CHECK(sol.tasks() == 3);
    const ObjectiveRecord rec = objectives(sol, Y, inst.cloud, hyper);
    const double closed = closed_form_inner_objective(sol, Y);
    CHECK(rec.U == doctest::Approx(closed).epsilon(1e-8));
}

} // TEST_SUITE
