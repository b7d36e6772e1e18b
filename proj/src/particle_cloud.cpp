#include "mfl/particle_cloud.hpp"

#include "mfl/errors.hpp"
#include "mfl/rng.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

namespace mfl {

void ParticleCloud::validate() const {
    detail::require(W.rows() == weights.size(), "ParticleCloud: W rows != weight count");
    if (!W.allFinite() || !weights.allFinite())
        throw numeric_error("ParticleCloud: non-finite entries");
    if (weights.minCoeff() < 0.0)
        throw numeric_error("ParticleCloud: negative weight");
    if (std::abs(weights.sum() - 1.0) > 1e-12)
        throw numeric_error("ParticleCloud: weights do not sum to 1");
}

ParticleCloud init_cloud(int count, int param_dim, double lambda_w, std::uint64_t seed) {
    if (count < 1) throw dimension_error("init_cloud: particle count must be >= 1");
    if (param_dim < 1) throw dimension_error("init_cloud: param_dim must be >= 1");
    if (!(lambda_w > 0.0)) throw dimension_error("init_cloud: lambda_w must be positive");

    const double scale = 1.0 / std::sqrt(lambda_w);
    rng::CounterStream stream(seed, "init");
    ParticleCloud cloud;
    cloud.W.resize(count, param_dim);
    cloud.weights = Vector::Constant(count, 1.0 / count);
#pragma omp parallel for schedule(static)
    for (int j = 0; j < count; ++j) {
        for (int k = 0; k < param_dim; ++k) {
            cloud.W(j, k) = scale * stream.normal(static_cast<std::uint64_t>(j), static_cast<std::uint64_t>(k));
        }
    }
    return cloud;
}

GramMatrix weighted_sigma(const Matrix& H, const Vector& weights) {
    detail::require(H.cols() == weights.size(), "weighted_sigma: H columns != weight count");
    if (weights.size() > 0 && weights.minCoeff() < 0.0)
        throw numeric_error("weighted_sigma: negative weight");

    // Rank update of the lower triangle keeps the result exactly symmetric.
    const Matrix scaled = H * weights.cwiseSqrt().asDiagonal();
    GramMatrix gram;
    gram.sigma = Matrix::Zero(H.rows(), H.rows());
    gram.sigma.selfadjointView<Eigen::Lower>().rankUpdate(scaled);
    gram.sigma.triangularView<Eigen::StrictlyUpper>() = gram.sigma.transpose();
    return gram;
}

ParticleCloud mixture_measure(const ParticleCloud& base, const Vector& point, double t) {
    detail::require(point.size() == base.param_dim(), "mixture_measure: point has wrong dimension");
    if (!(t >= 0.0 && t <= 1.0))
        throw dimension_error("mixture_measure: t must lie in [0, 1]");

    const Eigen::Index N = base.size();
    ParticleCloud out;
    out.W.resize(N + 1, base.param_dim());
    out.W.topRows(N) = base.W;
    out.W.row(N) = point.transpose();
    out.weights.resize(N + 1);
    out.weights.head(N) = (1.0 - t) * base.weights;
    out.weights(N) = t;
    return out;
}

namespace {

constexpr char kCloudMagic[8] = {'M', 'F', 'L', 'C', 'L', 'O', 'U', 'D'};
constexpr char kCkptMagic[8] = {'M', 'F', 'L', 'C', 'K', 'P', 'T', '1'};

void write_bytes(std::ofstream& out, const void* data, std::size_t count) {
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(count));
}

void read_bytes(std::ifstream& in, void* data, std::size_t count, const char* what) {
    in.read(static_cast<char*>(data), static_cast<std::streamsize>(count));
    if (!in) throw io_error(std::string("failed to read ") + what);
}

void write_cloud_body(std::ofstream& out, const ParticleCloud& cloud) {
    const std::uint64_t n = static_cast<std::uint64_t>(cloud.size());
    const std::uint64_t dprime = static_cast<std::uint64_t>(cloud.param_dim());
    write_bytes(out, &n, sizeof n);
    write_bytes(out, &dprime, sizeof dprime);
    write_bytes(out, cloud.weights.data(), sizeof(double) * n);
    // Row-major particle block.
    for (std::uint64_t j = 0; j < n; ++j) {
        for (std::uint64_t k = 0; k < dprime; ++k) {
            const double v = cloud.W(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k));
            write_bytes(out, &v, sizeof v);
        }
    }
}

ParticleCloud read_cloud_body(std::ifstream& in) {
    std::uint64_t n = 0, dprime = 0;
    read_bytes(in, &n, sizeof n, "cloud size");
    read_bytes(in, &dprime, sizeof dprime, "cloud param_dim");
    ParticleCloud cloud;
    cloud.weights.resize(static_cast<Eigen::Index>(n));
    read_bytes(in, cloud.weights.data(), sizeof(double) * n, "cloud weights");
    cloud.W.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dprime));
    for (std::uint64_t j = 0; j < n; ++j) {
        for (std::uint64_t k = 0; k < dprime; ++k) {
            double v;
            read_bytes(in, &v, sizeof v, "cloud particles");
            cloud.W(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = v;
        }
    }
    return cloud;
}

} // namespace

void save_cloud(const ParticleCloud& cloud, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot open " + path.string() + " for writing");
    write_bytes(out, kCloudMagic, sizeof kCloudMagic);
    write_cloud_body(out, cloud);
    if (!out) throw io_error("failed writing cloud snapshot to " + path.string());
}

ParticleCloud load_cloud(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open " + path.string());
    char magic[8];
    read_bytes(in, magic, sizeof magic, "cloud magic");
    if (std::memcmp(magic, kCloudMagic, sizeof magic) != 0)
        throw io_error(path.string() + " is not a cloud snapshot");
    return read_cloud_body(in);
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot open " + path.string() + " for writing");
    write_bytes(out, kCkptMagic, sizeof kCkptMagic);
    write_bytes(out, &ckpt.seed, sizeof ckpt.seed);
    write_bytes(out, &ckpt.step, sizeof ckpt.step);
    write_cloud_body(out, ckpt.cloud);
    if (!out) throw io_error("failed writing checkpoint to " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open " + path.string());
    char magic[8];
    read_bytes(in, magic, sizeof magic, "checkpoint magic");
    if (std::memcmp(magic, kCkptMagic, sizeof magic) != 0)
        throw io_error(path.string() + " is not a checkpoint");
    Checkpoint ckpt;
    read_bytes(in, &ckpt.seed, sizeof ckpt.seed, "checkpoint seed");
    read_bytes(in, &ckpt.step, sizeof ckpt.step, "checkpoint step");
    ckpt.cloud = read_cloud_body(in);
    return ckpt;
}

} // namespace mfl
