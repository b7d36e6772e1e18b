#include "mfl/diagnostics.hpp"

#include "mfl/errors.hpp"
#include "mfl/rng.hpp"

#include <cmath>
#include <vector>

namespace mfl {

double kernel_eval(const FeatureModel& model, const ParticleCloud& cloud, const Vector& x,
                   const Vector& xp) {
    detail::require(x.size() == model.input_dim && xp.size() == model.input_dim,
                    "kernel_eval: query dimension mismatch");
    detail::require(cloud.param_dim() == model.param_dim(), "kernel_eval: cloud dimension mismatch");
    const Eigen::Index d = model.input_dim;
    double k = 0.0;
    // Same sequential affine sums as feature_value, without temporaries; this
    // sits in the inner loop of the Monte-Carlo alignment estimate.
    for (Eigen::Index j = 0; j < cloud.size(); ++j) {
        double z1 = cloud.W(j, d);
        double z2 = z1;
        for (Eigen::Index t = 0; t < d; ++t) {
            z1 += cloud.W(j, t) * x(t);
            z2 += cloud.W(j, t) * xp(t);
        }
        k += cloud.weights(j) * std::tanh(z1) * std::tanh(z2);
    }
    return k;
}

double empirical_alignment(const GramMatrix& gram, const Vector& f_targets) {
    detail::require(f_targets.size() == gram.n(), "empirical_alignment: target size mismatch");
    const double f_sq = f_targets.squaredNorm();
    const double sigma_f = gram.frobenius_norm();
    if (f_sq == 0.0) throw numeric_error("empirical_alignment: zero target (undefined)");
    if (sigma_f == 0.0) throw numeric_error("empirical_alignment: zero kernel (undefined)");
    return f_targets.dot(gram.sigma * f_targets) / (f_sq * sigma_f);
}

McEstimate population_alignment(const FeatureModel& model, const ParticleCloud& cloud,
                                const TargetSpec& target, int n_mc, std::uint64_t seed,
                                std::int64_t step) {
    detail::require(n_mc >= 100, "population_alignment: n_mc must be >= 100");
    const Eigen::Index d = model.input_dim;
    const rng::CounterStream stream(seed, "align-mc", static_cast<std::uint64_t>(step));

    // Per-pair statistics, filled in parallel and reduced sequentially so the
    // result does not depend on the thread count.
    std::vector<double> num(n_mc), ksq(n_mc), fsq(n_mc);
#pragma omp parallel for schedule(static)
    for (int s = 0; s < n_mc; ++s) {
        Vector xs(2 * d);
        stream.fill_normal(static_cast<std::uint64_t>(s), {xs.data(), static_cast<std::size_t>(2 * d)});
        const Vector x = xs.head(d);
        const Vector xp = xs.tail(d);
        const double k = kernel_eval(model, cloud, x, xp);
        const double fx = target(x);
        const double fxp = target(xp);
        num[s] = fx * k * fxp;
        ksq[s] = k * k;
        fsq[s] = 0.5 * (fx * fx + fxp * fxp);
    }

    constexpr int kBatches = 20;
    std::vector<double> batch_estimates;
    batch_estimates.reserve(kBatches);
    const int per_batch = n_mc / kBatches;
    for (int b = 0; b < kBatches; ++b) {
        const int begin = b * per_batch;
        const int end = (b == kBatches - 1) ? n_mc : begin + per_batch;
        double sn = 0.0, sk = 0.0, sf = 0.0;
        for (int s = begin; s < end; ++s) {
            sn += num[s];
            sk += ksq[s];
            sf += fsq[s];
        }
        const double count = static_cast<double>(end - begin);
        if (sf <= 0.0) throw numeric_error("population_alignment: degenerate target");
        if (sk <= 0.0) throw numeric_error("population_alignment: kernel is identically zero (undefined)");
        batch_estimates.push_back((sn / count) / ((sf / count) * std::sqrt(sk / count)));
    }

    McEstimate out;
    double mean = 0.0;
    for (double v : batch_estimates) mean += v;
    mean /= batch_estimates.size();
    double var = 0.0;
    for (double v : batch_estimates) var += (v - mean) * (v - mean);
    var /= (batch_estimates.size() - 1);
    out.estimate = mean;
    out.std_error = std::sqrt(var / batch_estimates.size());
    return out;
}

double parameter_alignment(const ParticleCloud& cloud, const Vector& u_circ) {
    detail::require(u_circ.size() == cloud.param_dim() - 1,
                    "parameter_alignment: direction must live in input space (d = d' - 1)");
    const double norm = u_circ.norm();
    if (norm == 0.0) throw numeric_error("parameter_alignment: zero direction");
    const Vector u0 = u_circ / norm;

    const Eigen::Index d = u_circ.size();
    double p = 0.0;
    for (Eigen::Index j = 0; j < cloud.size(); ++j) {
        const auto u = cloud.W.row(j).head(d);
        const double u_sq = u.squaredNorm();
        if (u_sq == 0.0) continue;
        const double proj = u.dot(u0);
        p += cloud.weights(j) * proj * proj / u_sq;
    }
    return p;
}

double degrees_of_freedom(const GramMatrix& gram, double lambda_reg, Eigen::Index n) {
    detail::require(lambda_reg > 0.0, "degrees_of_freedom: lambda_reg must be positive");
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(gram.sigma, Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success) throw numeric_error("degrees_of_freedom: eigensolve failed");
    const double shift = static_cast<double>(n) * lambda_reg;
    double dof = 0.0;
    for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i) {
        const double s = std::max(eig.eigenvalues()(i), 0.0);
        dof += s / (s + shift);
    }
    return dof;
}

double degrees_of_freedom(const RidgeSolution& sol) {
    const double n = static_cast<double>(sol.n());
    return n - n * sol.bar_lambda_a() * sol.trace_m_inverse();
}

double alignment_lower_bound(double U, const Vector& f_targets, double bar_lambda_a,
                             Eigen::Index n) {
    detail::require(U > 0.0, "alignment_lower_bound: U must be positive");
    return bar_lambda_a * f_targets.squaredNorm() / (2.0 * U * static_cast<double>(n)) -
           bar_lambda_a;
}

double test_loss(const FeatureModel& model, const ParticleCloud& cloud, const Matrix& a_values,
                 const Matrix& test_X, const Matrix& test_Y) {
    detail::require(test_X.rows() > 0, "test_loss: empty test set");
    detail::require(test_X.rows() == test_Y.rows(), "test_loss: X/Y row mismatch");
    const Matrix pred = predict(model, test_X, cloud, a_values);
    detail::require(pred.cols() == test_Y.cols(), "test_loss: task count mismatch");
    return (pred - test_Y).squaredNorm() /
           static_cast<double>(test_Y.rows() * test_Y.cols());
}

} // namespace mfl
