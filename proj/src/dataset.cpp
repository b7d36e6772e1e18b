#include "mfl/dataset.hpp"

#include "mfl/errors.hpp"
#include "mfl/rng.hpp"

#include <cmath>

namespace mfl {

TargetKind target_kind_from_string(const std::string& name) {
    if (name == "product12") return TargetKind::Product12;
    if (name == "single_index_tanh") return TargetKind::SingleIndexTanh;
    throw config_error("unknown target kind: " + name);
}

std::string to_string(TargetKind kind) {
    switch (kind) {
        case TargetKind::Product12: return "product12";
        case TargetKind::SingleIndexTanh: return "single_index_tanh";
    }
    throw config_error("invalid target kind");
}

double TargetSpec::operator()(const Vector& x) const {
    switch (kind) {
        case TargetKind::Product12:
            detail::require(x.size() >= 2, "product12 target needs d >= 2");
            return x(0) * x(1);
        case TargetKind::SingleIndexTanh:
            detail::require(x.size() == direction.size(), "target direction dimension mismatch");
            return std::tanh(kappa * direction.dot(x));
    }
    throw config_error("invalid target kind");
}

Vector TargetSpec::eval_rows(const Matrix& X) const {
    Vector out(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) out(i) = (*this)(X.row(i).transpose());
    return out;
}

namespace {

Matrix gaussian_matrix(const rng::CounterStream& stream, Eigen::Index rows, Eigen::Index cols) {
    Matrix out(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index k = 0; k < cols; ++k) {
            out(i, k) = stream.normal(static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(k));
        }
    }
    return out;
}

} // namespace

Dataset gen_synthetic(int d, int n_train, int n_test, TargetKind kind, double kappa, double sigma,
                      std::uint64_t seed) {
    if (d < 1) throw config_error("gen_synthetic: d must be >= 1");
    if (kind == TargetKind::Product12 && d < 2) throw config_error("gen_synthetic: product12 needs d >= 2");
    if (n_train < 1) throw config_error("gen_synthetic: n_train must be >= 1");
    if (n_test < 0) throw config_error("gen_synthetic: n_test must be >= 0");
    if (sigma < 0.0) throw config_error("gen_synthetic: sigma must be >= 0");

    Dataset data;
    data.sigma = sigma;
    data.target.kind = kind;
    data.target.kappa = kappa;
    if (kind == TargetKind::SingleIndexTanh) {
        rng::CounterStream u_stream(seed, "data-u");
        Vector u(d);
        u_stream.fill_normal(0, {u.data(), static_cast<std::size_t>(d)});
        data.target.direction = u / u.norm();
    }

    data.X = gaussian_matrix(rng::CounterStream(seed, "data-x"), n_train, d);
    data.test_X = gaussian_matrix(rng::CounterStream(seed, "data-test-x"), n_test, d);
    data.f_clean = data.target.eval_rows(data.X);
    data.test_Y_clean = data.target.eval_rows(data.test_X);

    rng::CounterStream eps_stream(seed, "data-eps");
    data.Y = data.f_clean;
    for (Eigen::Index t = 0; t < data.Y.cols(); ++t) {
        for (Eigen::Index i = 0; i < data.Y.rows(); ++i) {
            data.Y(i, t) += eps_stream.uniform_sym(static_cast<std::uint64_t>(t),
                                                   static_cast<std::uint64_t>(i), sigma);
        }
    }
    return data;
}

} // namespace mfl
