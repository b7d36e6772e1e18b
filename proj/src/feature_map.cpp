#include "mfl/feature_map.hpp"

#include "mfl/errors.hpp"

#include <cmath>

namespace mfl {

namespace {

// Sequential affine argument u.x + b. Kept scalar on purpose: feature_matrix
// must reproduce the per-entry evaluation exactly.
inline double affine_arg(const Matrix& X, Eigen::Index row, const Matrix& W, Eigen::Index particle) {
    const Eigen::Index d = X.cols();
    double z = W(particle, d);
    for (Eigen::Index k = 0; k < d; ++k) z += W(particle, k) * X(row, k);
    return z;
}

} // namespace

double feature_value(const FeatureModel& model, const Vector& x, const Vector& w) {
    detail::require(x.size() == model.input_dim, "feature_value: x has wrong dimension");
    detail::require(w.size() == model.param_dim(), "feature_value: w has wrong dimension");
    double z = w(model.input_dim);
    for (Eigen::Index k = 0; k < model.input_dim; ++k) z += w(k) * x(k);
    return std::tanh(z);
}

Vector feature_grad(const FeatureModel& model, const Vector& x, const Vector& w) {
    detail::require(x.size() == model.input_dim, "feature_grad: x has wrong dimension");
    detail::require(w.size() == model.param_dim(), "feature_grad: w has wrong dimension");
    double z = w(model.input_dim);
    for (Eigen::Index k = 0; k < model.input_dim; ++k) z += w(k) * x(k);
    const double t = std::tanh(z);
    const double s = 1.0 - t * t;
    Vector g(model.param_dim());
    g.head(model.input_dim) = s * x;
    g(model.input_dim) = s;
    return g;
}

Matrix feature_matrix(const FeatureModel& model, const Matrix& X, const Matrix& W) {
    detail::require(X.cols() == model.input_dim, "feature_matrix: X has wrong column count");
    detail::require(W.cols() == model.param_dim(), "feature_matrix: W has wrong column count");
    if (!X.allFinite() || !W.allFinite())
        throw numeric_error("feature_matrix: non-finite input entries");

    const Eigen::Index n = X.rows();
    const Eigen::Index N = W.rows();
    Matrix H(n, N);
#pragma omp parallel for schedule(static)
    for (Eigen::Index j = 0; j < N; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
            H(i, j) = std::tanh(affine_arg(X, i, W, j));
        }
    }
    return H;
}

Matrix feature_grad_matrix(const FeatureModel& model, const Matrix& X, const Vector& w) {
    detail::require(X.cols() == model.input_dim, "feature_grad_matrix: X has wrong column count");
    detail::require(w.size() == model.param_dim(), "feature_grad_matrix: w has wrong dimension");
    const Eigen::Index n = X.rows();
    const Eigen::Index d = model.input_dim;
    Matrix G(n, model.param_dim());
    for (Eigen::Index i = 0; i < n; ++i) {
        double z = w(d);
        for (Eigen::Index k = 0; k < d; ++k) z += w(k) * X(i, k);
        const double t = std::tanh(z);
        const double s = 1.0 - t * t;
        G.row(i).head(d) = s * X.row(i);
        G(i, d) = s;
    }
    return G;
}

} // namespace mfl
