#pragma once

#include <Eigen/Dense>

namespace mfl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class Activation {
    TanhAffine, ///< h(x; w) = tanh(u . x + b), w = (u, b)
};

/// The neuron family. Fixing the activation to a closed enum keeps the
/// |h| <= 1 bound a structural guarantee rather than a runtime check.
struct FeatureModel {
    Activation kind = Activation::TanhAffine;
    int input_dim = 0; ///< d

    int param_dim() const { return input_dim + 1; } ///< d' = d + 1 for TanhAffine
};

/// h(x; w). Result lies in (-1, 1).
double feature_value(const FeatureModel& model, const Vector& x, const Vector& w);

/// Gradient of h with respect to w: (s * x, s) with s = 1 - tanh^2(u.x + b).
Vector feature_grad(const FeatureModel& model, const Vector& x, const Vector& w);

/// Feature matrix H with H(i, j) = h(x_i; w_j), size n x N.
///
/// Entries are computed independently (parallel over particles), each one by
/// the same sequential dot product feature_value uses, so the matrix matches
/// a naive per-entry loop bit for bit at any thread count.
Matrix feature_matrix(const FeatureModel& model, const Matrix& X, const Matrix& W);

/// Per-sample parameter gradients for one particle: row i is grad_w h(x_i; w).
/// Size n x d'.
Matrix feature_grad_matrix(const FeatureModel& model, const Matrix& X, const Vector& w);

} // namespace mfl
