#include "mfl/config_io.hpp"
#include "mfl/diagnostics.hpp"
#include "mfl/dynamics.hpp"
#include "mfl/errors.hpp"
#include "mfl/label_noise.hpp"
#include "mfl/svg_plot.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <fstream>
#include <sstream>

namespace py = pybind11;
using namespace mfl;

PYBIND11_MODULE(mfl_core, m) {
    m.doc() = "Two-timescale mean-field Langevin training with kernel diagnostics";

    py::register_exception<dimension_error>(m, "DimensionError", PyExc_ValueError);
    py::register_exception<config_error>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<divergence_error>(m, "DivergenceError", PyExc_RuntimeError);
    py::register_exception<io_error>(m, "IoError", PyExc_OSError);
    py::register_exception<numeric_error>(m, "NumericError", PyExc_RuntimeError);

    py::class_<FeatureModel>(m, "FeatureModel")
        .def(py::init([](int input_dim) {
                 return FeatureModel{Activation::TanhAffine, input_dim};
             }),
             py::arg("input_dim"))
        .def_readonly("input_dim", &FeatureModel::input_dim)
        .def_property_readonly("param_dim", &FeatureModel::param_dim);

    py::class_<Hyperparams>(m, "Hyperparams")
        .def(py::init([](double lambda, double lambda_a, double lambda_w, double eta,
                         double tilde_sigma) {
                 return Hyperparams{lambda, lambda_a, lambda_w, eta, tilde_sigma};
             }),
             py::arg("lambda_") = 0.004, py::arg("lambda_a") = 0.25, py::arg("lambda_w") = 0.25,
             py::arg("eta") = 0.2, py::arg("tilde_sigma") = 0.0)
        .def_readwrite("lambda_", &Hyperparams::lambda)
        .def_readwrite("lambda_a", &Hyperparams::lambda_a)
        .def_readwrite("lambda_w", &Hyperparams::lambda_w)
        .def_readwrite("eta", &Hyperparams::eta)
        .def_readwrite("tilde_sigma", &Hyperparams::tilde_sigma)
        .def_property_readonly("bar_lambda_a", &Hyperparams::bar_lambda_a)
        .def_property_readonly("bar_lambda_w", &Hyperparams::bar_lambda_w);

    py::class_<ParticleCloud>(m, "ParticleCloud")
        .def(py::init([](Matrix W, Vector weights) {
                 ParticleCloud cloud{std::move(W), std::move(weights)};
                 cloud.validate();
                 return cloud;
             }),
             py::arg("W"), py::arg("weights"))
        .def_readwrite("W", &ParticleCloud::W)
        .def_readwrite("weights", &ParticleCloud::weights)
        .def_property_readonly("size", &ParticleCloud::size)
        .def("mean_sq_norm", &ParticleCloud::mean_sq_norm);

    py::class_<GramMatrix>(m, "GramMatrix")
        .def_readonly("sigma", &GramMatrix::sigma);

    py::class_<RidgeSolution>(m, "RidgeSolution")
        .def_property_readonly("alpha", &RidgeSolution::alpha)
        .def_property_readonly("sigma", &RidgeSolution::sigma)
        .def("solve", py::overload_cast<const Matrix&>(&RidgeSolution::solve, py::const_))
        .def("trace_m_inverse", &RidgeSolution::trace_m_inverse);

    py::class_<ObjectiveRecord>(m, "ObjectiveRecord")
        .def_readonly("U", &ObjectiveRecord::U)
        .def_readonly("G", &ObjectiveRecord::G)
        .def_readonly("train_mse", &ObjectiveRecord::train_mse)
        .def_readonly("a_sq_norm", &ObjectiveRecord::a_sq_norm)
        .def_readonly("w_sq_norm", &ObjectiveRecord::w_sq_norm);

    m.def("feature_value", &feature_value, py::arg("model"), py::arg("x"), py::arg("w"));
    m.def("feature_grad", &feature_grad, py::arg("model"), py::arg("x"), py::arg("w"));
    m.def("feature_matrix", &feature_matrix, py::arg("model"), py::arg("X"), py::arg("W"));
    m.def("init_cloud", &init_cloud, py::arg("count"), py::arg("param_dim"), py::arg("lambda_w"),
          py::arg("seed"));
    m.def("weighted_sigma", &weighted_sigma, py::arg("H"), py::arg("weights"));
    m.def("mixture_measure", &mixture_measure, py::arg("base"), py::arg("point"), py::arg("t"));
    m.def("fit_second_layer", &fit_second_layer, py::arg("sigma"), py::arg("Y"),
          py::arg("bar_lambda_a"));
    m.def("second_layer_values", &second_layer_values, py::arg("H"), py::arg("sol"));
    m.def("predict",
          py::overload_cast<const FeatureModel&, const Matrix&, const ParticleCloud&, const Matrix&>(
              &predict),
          py::arg("model"), py::arg("Xq"), py::arg("cloud"), py::arg("a_values"));
    m.def("objectives", &objectives, py::arg("sol"), py::arg("Y"), py::arg("cloud"),
          py::arg("hyper"));
    m.def("closed_form_inner_objective", &closed_form_inner_objective, py::arg("sol"), py::arg("Y"));
    m.def("first_variation", &first_variation, py::arg("a_at_w"), py::arg("w"), py::arg("hyper"));
    m.def("grad_first_variation", &grad_first_variation, py::arg("j"), py::arg("H"),
          py::arg("grads_j"), py::arg("sol"), py::arg("w_j"), py::arg("hyper"));
    m.def("lsi_alpha", &lsi_alpha, py::arg("hyper"), py::arg("c_l"));
    m.def("kernel_eval", &kernel_eval, py::arg("model"), py::arg("cloud"), py::arg("x"),
          py::arg("xp"));
    m.def("empirical_alignment", &empirical_alignment, py::arg("gram"), py::arg("f_targets"));
    m.def("parameter_alignment", &parameter_alignment, py::arg("cloud"), py::arg("u_circ"));
    m.def(
        "degrees_of_freedom",
        [](const GramMatrix& gram, double lambda_reg, Eigen::Index n) {
            return degrees_of_freedom(gram, lambda_reg, n);
        },
        py::arg("gram"), py::arg("lambda_reg"), py::arg("n"));
    m.def("alignment_lower_bound", &alignment_lower_bound, py::arg("U"), py::arg("f_targets"),
          py::arg("bar_lambda_a"), py::arg("n"));

    py::enum_<TargetKind>(m, "TargetKind")
        .value("product12", TargetKind::Product12)
        .value("single_index_tanh", TargetKind::SingleIndexTanh);

    py::class_<Dataset>(m, "Dataset")
        .def_readonly("X", &Dataset::X)
        .def_readonly("Y", &Dataset::Y)
        .def_readonly("f_clean", &Dataset::f_clean)
        .def_readonly("test_X", &Dataset::test_X)
        .def_readonly("test_Y_clean", &Dataset::test_Y_clean)
        .def_readonly("sigma", &Dataset::sigma);

    m.def("gen_synthetic", &gen_synthetic, py::arg("d"), py::arg("n_train"), py::arg("n_test"),
          py::arg("kind"), py::arg("kappa"), py::arg("sigma"), py::arg("seed"));

    py::class_<StepReport>(m, "StepReport")
        .def_readonly("step", &StepReport::step)
        .def_readonly("mean_grad_norm", &StepReport::mean_grad_norm)
        .def_readonly("mean_w_sq", &StepReport::mean_w_sq)
        .def_readonly("objectives", &StepReport::objectives)
        .def_readonly("wall_ms", &StepReport::wall_ms);

    m.def(
        "mfld_step",
        [](const ParticleCloud& cloud, const Dataset& data, const FeatureModel& model,
           const Hyperparams& hyper, std::uint64_t seed, std::int64_t step) {
            MfldStepResult res = mfld_step(cloud, data, model, hyper, seed, step);
            return py::make_tuple(std::move(res.cloud), res.report);
        },
        py::arg("cloud"), py::arg("data"), py::arg("model"), py::arg("hyper"), py::arg("seed"),
        py::arg("step"));
    m.def(
        "noisy_mfld_step",
        [](const ParticleCloud& cloud, const Dataset& data, const FeatureModel& model,
           const Hyperparams& hyper, std::uint64_t seed, std::int64_t step) {
            MfldStepResult res = noisy_mfld_step(cloud, data, model, hyper, seed, step);
            return py::make_tuple(std::move(res.cloud), res.report);
        },
        py::arg("cloud"), py::arg("data"), py::arg("model"), py::arg("hyper"), py::arg("seed"),
        py::arg("step"));

    py::enum_<RunMode>(m, "RunMode")
        .value("mfld", RunMode::Mfld)
        .value("label_noise", RunMode::LabelNoise)
        .value("frozen", RunMode::Frozen);

    py::class_<MetricsRecord>(m, "MetricsRecord")
        .def_readonly("step", &MetricsRecord::step)
        .def_readonly("G", &MetricsRecord::G)
        .def_readonly("U", &MetricsRecord::U)
        .def_readonly("train_mse", &MetricsRecord::train_mse)
        .def_readonly("test_mse", &MetricsRecord::test_mse)
        .def_readonly("align_emp", &MetricsRecord::align_emp)
        .def_readonly("align_pop", &MetricsRecord::align_pop)
        .def_readonly("align_pop_stderr", &MetricsRecord::align_pop_stderr)
        .def_readonly("param_align", &MetricsRecord::param_align)
        .def_readonly("dof", &MetricsRecord::dof)
        .def_readonly("mean_w_sq", &MetricsRecord::mean_w_sq)
        .def_readonly("mean_a_sq", &MetricsRecord::mean_a_sq)
        .def_readonly("sigma", &MetricsRecord::sigma)
        .def_readonly("tilde_sigma", &MetricsRecord::tilde_sigma)
        .def_readonly("wall_ms", &MetricsRecord::wall_ms);

    py::class_<RunConfig>(m, "RunConfig")
        .def(py::init<>())
        .def_readwrite("d", &RunConfig::d)
        .def_readwrite("n_train", &RunConfig::n_train)
        .def_readwrite("n_test", &RunConfig::n_test)
        .def_readwrite("particles", &RunConfig::particles)
        .def_readwrite("steps", &RunConfig::steps)
        .def_readwrite("eval_every", &RunConfig::eval_every)
        .def_readwrite("seed", &RunConfig::seed)
        .def_readwrite("hyper", &RunConfig::hyper)
        .def_readwrite("sigma", &RunConfig::sigma)
        .def_readwrite("target", &RunConfig::target)
        .def_readwrite("kappa", &RunConfig::kappa)
        .def_readwrite("mode", &RunConfig::mode)
        .def_readwrite("mc_samples_alignment", &RunConfig::mc_samples_alignment)
        .def_readwrite("out_dir", &RunConfig::out_dir)
        .def_readwrite("run_id", &RunConfig::run_id);

    m.def("preset_config", &preset_config, py::arg("name"));
    m.def(
        "run_mfld",
        [](const RunConfig& config) { return run_mfld(config); },
        py::arg("config"));
    m.def(
        "run_experiment_csv",
        [](const RunConfig& config, const std::filesystem::path& csv_path) {
            std::ofstream csv(csv_path);
            if (!csv) throw io_error("cannot open " + csv_path.string());
            csv << kCsvHeader << '\n';
            return run_experiment(config, csv).final_metrics;
        },
        py::arg("config"), py::arg("csv_path"));

    m.def("sample_label_noise", &sample_label_noise, py::arg("n"), py::arg("tasks"),
          py::arg("tilde_sigma"), py::arg("seed"), py::arg("step"));
    m.def("regularized_objective", &regularized_objective, py::arg("sol"), py::arg("Y"),
          py::arg("cloud"), py::arg("hyper"));
    m.def(
        "sigma_condition",
        [](const Matrix& Y, double tilde_sigma) {
            const SigmaCondition cond = sigma_condition(Y, tilde_sigma);
            return py::make_tuple(cond.ok, cond.margin);
        },
        py::arg("Y"), py::arg("tilde_sigma"));
    m.def("emit_plots", &emit_plots, py::arg("csv_path"), py::arg("out_dir"));

    py::class_<NoiseDraw>(m, "NoiseDraw")
        .def_readonly("eps", &NoiseDraw::eps)
        .def_readonly("step", &NoiseDraw::step);
}
