// Command line front end: train / train-ln / baseline / check / plot.

#include "mfl/config_io.hpp"
#include "mfl/errors.hpp"
#include "mfl/rng.hpp"
#include "mfl/svg_plot.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitDivergence = 3;
constexpr int kExitIo = 4;

struct TrainOptions {
    std::string config_path;
    std::string preset;
    std::optional<std::int64_t> seed;
    std::string out_dir;
};

void add_train_flags(CLI::App* cmd, TrainOptions& opts) {
    cmd->add_option("--config", opts.config_path, "flat JSON config file");
    cmd->add_option("--preset", opts.preset, "named preset (desk, paper-fig1, paper-fig2, ...)");
    cmd->add_option("--seed", opts.seed, "override the seed (disables a seed sweep)");
    cmd->add_option("--out", opts.out_dir, "output directory for metrics.csv");
}

int run_training(const TrainOptions& opts, mfl::RunMode mode) {
    mfl::SweepConfig sweep;
    if (!opts.preset.empty()) sweep = mfl::sweep_preset(opts.preset);
    if (!opts.config_path.empty()) sweep = mfl::load_config_file(opts.config_path, sweep);
    if (opts.seed) {
        sweep.base.seed = static_cast<std::uint64_t>(*opts.seed);
        sweep.seeds.clear();
    }
    if (!opts.out_dir.empty()) sweep.base.out_dir = opts.out_dir;
    sweep.base.mode = mode;

    const auto configs = sweep.expand();
    const std::filesystem::path out_dir = sweep.base.out_dir;
    std::filesystem::create_directories(out_dir);
    const std::filesystem::path csv_path = out_dir / "metrics.csv";
    std::ofstream csv(csv_path);
    if (!csv) throw mfl::io_error("cannot open " + csv_path.string() + " for writing");
    csv << mfl::kCsvHeader << '\n';

    for (const auto& cfg : configs) {
        if (cfg.mode == mfl::RunMode::LabelNoise && cfg.hyper.tilde_sigma > 0.0) {
            const mfl::Dataset data = mfl::gen_synthetic(cfg.d, cfg.n_train, cfg.n_test,
                                                         cfg.target, cfg.kappa, cfg.sigma, cfg.seed);
            const mfl::SigmaCondition cond = mfl::sigma_condition(data.Y, cfg.hyper.tilde_sigma);
            if (!cond.ok) {
                std::cerr << "warning: tilde_sigma^2/3 exceeds the minimum label Gram eigenvalue "
                             "(margin "
                          << cond.margin
                          << "); the convexity condition fails but single-output runs are "
                             "still effective\n";
            }
        }
        const mfl::RunSummary summary = mfl::run_experiment(cfg, csv);
        const auto& fin = summary.final_metrics;
        std::cout << summary.config.effective_run_id() << ": steps=" << fin.step
                  << " G=" << fin.G << " test_mse=" << fin.test_mse
                  << " align_emp=" << fin.align_emp << " dof=" << fin.dof
                  << " wall_s=" << summary.total_wall_ms / 1000.0 << '\n';
        std::cout << "  lsi_alpha=" << summary.lsi_alpha_hint << " (step-size hint: eta < ";
        if (summary.lsi_alpha_hint > 0.0) {
            std::cout << 1.0 / (4.0 * cfg.hyper.lambda * summary.lsi_alpha_hint);
        } else {
            std::cout << "unbounded, alpha underflows";
        }
        std::cout << ")\n";
    }
    std::cout << "wrote " << csv_path.string() << '\n';
    return 0;
}

// --- self check: identity and gradient oracles on small random instances ---

struct CheckInstance {
    mfl::FeatureModel model;
    mfl::Dataset data;
    mfl::ParticleCloud cloud;
    mfl::Hyperparams hyper;
    mfl::InnerState state;
};

CheckInstance make_instance(std::uint64_t seed, int n, int N, int d, double sigma,
                            mfl::Hyperparams hyper) {
    CheckInstance inst;
    inst.model = {mfl::Activation::TanhAffine, d};
    inst.data = mfl::gen_synthetic(d, n, 8, mfl::TargetKind::Product12, 2.0, sigma, seed);
    inst.cloud = mfl::init_cloud(N, d + 1, hyper.lambda_w, seed);
    inst.hyper = hyper;
    inst.state = mfl::solve_inner(inst.cloud, inst.data.X, inst.data.Y, inst.model,
                                  hyper.bar_lambda_a());
    return inst;
}

bool report(const std::string& name, bool ok, double value) {
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << name << " (" << value << ")\n";
    return ok;
}

int run_check() {
    using namespace mfl;
    bool all_ok = true;
    const Hyperparams hyper{0.05, 0.5, 0.5, 0.1, 0.0};

    {
        double worst = 0.0;
        for (std::uint64_t s = 0; s < 30; ++s) {
            const auto inst = make_instance(100 + s, 24, 10, 5, 0.3, hyper);
            const auto rec = objectives(inst.state.sol, inst.data.Y, inst.cloud, hyper);
            const double closed = closed_form_inner_objective(inst.state.sol, inst.data.Y);
            worst = std::max(worst, std::abs(rec.U - closed) / std::abs(closed));
        }
        all_ok &= report("inner objective: assembled vs closed form, rel err <= 1e-8", worst <= 1e-8, worst);
    }
    {
        double worst = 0.0;
        for (std::uint64_t s = 0; s < 30; ++s) {
            const auto inst = make_instance(200 + s, 24, 10, 5, 0.3, hyper);
            const Matrix m_alpha = inst.state.gram.sigma * inst.state.sol.alpha() +
                                   24.0 * hyper.bar_lambda_a() * inst.state.sol.alpha();
            worst = std::max(worst, (m_alpha - inst.data.Y).norm() / inst.data.Y.norm());
        }
        all_ok &= report("ridge normal equations, rel residual <= 1e-8", worst <= 1e-8, worst);
    }
    {
        double worst = 0.0;
        for (std::uint64_t s = 0; s < 30; ++s) {
            const auto inst = make_instance(300 + s, 24, 10, 5, 0.3, hyper);
            const double n = 24.0;
            const double dof = degrees_of_freedom(inst.state.gram, hyper.bar_lambda_a(), 24);
            const double lhs = inst.state.sol.trace_m_inverse() * n * hyper.bar_lambda_a() + dof;
            worst = std::max(worst, std::abs(lhs - n) / n);
        }
        all_ok &= report("trace identity n*bla*tr(M^-1) + dof = n, rel err <= 1e-8", worst <= 1e-8, worst);
    }
    {
        int violations = 0;
        for (std::uint64_t s = 0; s < 50; ++s) {
            const auto inst = make_instance(400 + s, 24, 10, 5, 0.0, hyper);
            const auto rec = objectives(inst.state.sol, inst.data.Y, inst.cloud, hyper);
            const double bound =
                alignment_lower_bound(rec.U, inst.data.f_clean.col(0), hyper.bar_lambda_a(), 24);
            if (empirical_alignment(inst.state.gram, inst.data.f_clean.col(0)) < bound) ++violations;
        }
        all_ok &= report("alignment lower bound holds on noiseless instances", violations == 0,
                         violations);
    }
    {
        // Analytic drift vs central finite differences with the solve frozen.
        double worst = 0.0;
        for (std::uint64_t s = 0; s < 20; ++s) {
            const auto inst = make_instance(500 + s, 20, 8, 5, 0.3, hyper);
            const Eigen::Index j = static_cast<Eigen::Index>(s % 8);
            const Vector w = inst.cloud.W.row(j).transpose();
            const Matrix grads = feature_grad_matrix(inst.model, inst.data.X, w);
            const Vector analytic =
                grad_first_variation(j, inst.state.H, grads, inst.state.sol, w, hyper);
            Vector fd = Vector::Zero(w.size());
            const double step = 1e-4;
            for (Eigen::Index k = 0; k < w.size(); ++k) {
                for (int side : {1, -1}) {
                    Vector wp = w;
                    wp(k) += side * step;
                    Vector a(inst.state.sol.tasks());
                    for (Eigen::Index t = 0; t < a.size(); ++t) {
                        double hv = 0.0;
                        for (Eigen::Index i = 0; i < inst.data.X.rows(); ++i) {
                            hv += feature_value(inst.model, inst.data.X.row(i).transpose(), wp) *
                                  inst.state.sol.alpha()(i, t);
                        }
                        a(t) = hv;
                    }
                    fd(k) += side * first_variation(a, wp, hyper) / (2.0 * step);
                }
            }
            worst = std::max(worst, (analytic - fd).norm() / fd.norm());
        }
        all_ok &= report("drift vs finite differences, rel err <= 1e-5", worst <= 1e-5, worst);
    }
    {
        double worst = 0.0;
        for (std::uint64_t s = 0; s < 30; ++s) {
            const auto inst = make_instance(600 + s, 40, 12, 5, 0.3, hyper);
            const Matrix dense = inst.state.sol.alpha();
            const Matrix wood = fit_alpha_woodbury(inst.state.H, inst.cloud.weights, inst.data.Y,
                                                   hyper.bar_lambda_a());
            worst = std::max(worst, (dense - wood).norm() / dense.norm());
        }
        all_ok &= report("Woodbury route agrees with dense solve, rel err <= 1e-8", worst <= 1e-8,
                         worst);
    }
    {
        bool ok = true;
        double worst = 0.0;
        for (std::uint64_t s = 0; s < 30; ++s) {
            const auto inst = make_instance(700 + s, 24, 10, 5, 0.5, hyper);
            const double cap =
                inst.data.Y.cwiseAbs().maxCoeff() / hyper.lambda_a / hyper.lambda;
            const double observed = inst.state.a_values.cwiseAbs().maxCoeff();
            worst = std::max(worst, observed);
            ok &= observed <= cap;
        }
        all_ok &= report("second-layer values within the ridge bound", ok, worst);
    }
    std::cout << (all_ok ? "check: all ok\n" : "check: FAILURES\n");
    return all_ok ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-timescale mean-field Langevin trainer"};
    app.require_subcommand(1);

    TrainOptions train_opts, ln_opts, baseline_opts;
    auto* train_cmd = app.add_subcommand("train", "mean-field Langevin training");
    add_train_flags(train_cmd, train_opts);
    auto* ln_cmd = app.add_subcommand("train-ln", "training with the label-noise procedure");
    add_train_flags(ln_cmd, ln_opts);
    auto* baseline_cmd = app.add_subcommand("baseline", "frozen-feature kernel baseline");
    add_train_flags(baseline_cmd, baseline_opts);

    auto* check_cmd = app.add_subcommand("check", "run the identity and gradient self-checks");

    std::string plot_csv, plot_out = ".";
    auto* plot_cmd = app.add_subcommand("plot", "render SVG charts from a metrics CSV");
    plot_cmd->add_option("csv", plot_csv, "metrics CSV produced by train/train-ln/baseline")
        ->required();
    plot_cmd->add_option("--out", plot_out, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (train_cmd->parsed()) return run_training(train_opts, mfl::RunMode::Mfld);
        if (ln_cmd->parsed()) return run_training(ln_opts, mfl::RunMode::LabelNoise);
        if (baseline_cmd->parsed()) return run_training(baseline_opts, mfl::RunMode::Frozen);
        if (check_cmd->parsed()) return run_check();
        if (plot_cmd->parsed()) {
            const auto written = mfl::emit_plots(plot_csv, plot_out);
            for (const auto& file : written) std::cout << "wrote " << file.string() << '\n';
            return 0;
        }
    } catch (const mfl::config_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const mfl::divergence_error& e) {
        std::cerr << "divergence: " << e.what() << '\n';
        return kExitDivergence;
    } catch (const mfl::io_error& e) {
        std::cerr << "io error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
