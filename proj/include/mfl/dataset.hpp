#pragma once

#include "mfl/feature_map.hpp"

#include <cstdint>
#include <string>

namespace mfl {

enum class TargetKind {
    Product12,       ///< f(x) = x_1 * x_2
    SingleIndexTanh, ///< f(x) = tanh(kappa * u0 . x), u0 uniform on the sphere
};

TargetKind target_kind_from_string(const std::string& name);
std::string to_string(TargetKind kind);

/// The ground-truth regression target.
struct TargetSpec {
    TargetKind kind = TargetKind::Product12;
    double kappa = 2.0;
    Vector direction; ///< u0, unit vector; empty for Product12

    double operator()(const Vector& x) const;
    Vector eval_rows(const Matrix& X) const;
};

/// Synthetic regression data: x ~ N(0, I_d), y = f(x) + eps with
/// eps ~ Unif[-sigma, sigma]. The held-out set keeps noiseless targets.
struct Dataset {
    Matrix X;            ///< n x d
    Matrix Y;            ///< n x T observed labels
    Matrix f_clean;      ///< n x T noiseless targets
    Matrix test_X;       ///< m x d
    Matrix test_Y_clean; ///< m x T
    TargetSpec target;
    double sigma = 0.0;  ///< label-noise half-width used for Y

    Eigen::Index n() const { return X.rows(); }
    Eigen::Index dim() const { return X.cols(); }
    Eigen::Index tasks() const { return Y.cols(); }
};

/// Generate a dataset. All randomness comes from streams keyed by the seed
/// ("data-x", "data-eps", "data-test-x", "data-u"), disjoint from the
/// particle and Langevin streams.
Dataset gen_synthetic(int d, int n_train, int n_test, TargetKind kind, double kappa, double sigma,
                      std::uint64_t seed);

} // namespace mfl
