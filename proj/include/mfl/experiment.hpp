#pragma once

#include "mfl/diagnostics.hpp"
#include "mfl/dynamics.hpp"
#include "mfl/label_noise.hpp"

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace mfl {

enum class RunMode { Mfld, LabelNoise, Frozen };

RunMode run_mode_from_string(const std::string& name);
std::string to_string(RunMode mode);

/// Full description of one training run.
struct RunConfig {
    int d = 15;
    int n_train = 1000;
    int n_test = 2000;
    int particles = 500;
    std::int64_t steps = 2000;
    int eval_every = 25;
    std::uint64_t seed = 1;
    Hyperparams hyper{};
    double sigma = 0.5; ///< intrinsic label-noise half-width of the data
    TargetKind target = TargetKind::Product12;
    double kappa = 2.0;
    RunMode mode = RunMode::Mfld;
    int mc_samples_alignment = 2000;
    std::string out_dir = ".";
    std::string run_id;            ///< derived from mode/sigma/seed when empty
    std::string resume_from;       ///< checkpoint path to continue from
    std::string checkpoint_out;    ///< write a checkpoint here after the last step

    std::string effective_run_id() const;
    void validate() const;
};

/// Presets: "desk" (single desk-scale run), "paper-fig1" / "paper-fig2"
/// (desk-scale sweep bases), and the full-scale "paper-fig1-full" /
/// "paper-fig2-full" variants. Sweeps are expanded by the CLI.
RunConfig preset_config(const std::string& name);
std::vector<std::string> preset_names();

/// CSV column order; fixed.
extern const char* const kCsvHeader;

std::string csv_row(const std::string& run_id, std::uint64_t seed, RunMode mode,
                    const MetricsRecord& rec);

using MetricsCallback = std::function<void(const MetricsRecord&)>;

/// Run discretized mean-field Langevin training (or a variant selected by
/// config.mode) and return one metrics row per evaluation point. The final
/// step is always evaluated. Deterministic given the seed.
std::vector<MetricsRecord> run_mfld(const RunConfig& config,
                                    const MetricsCallback& on_eval = nullptr);

struct RunSummary {
    RunConfig config;
    MetricsRecord final_metrics;
    double total_wall_ms = 0.0;
    double lsi_alpha_hint = 0.0; ///< lsi_alpha at c_l = max |Y|
};

/// Run one configuration and append its rows to a CSV stream (header written
/// by the caller). Dispatches on config.mode.
RunSummary run_experiment(const RunConfig& config, std::ostream& csv);

/// Frozen-feature baseline: the cloud stays at initialization and only the
/// ridge solve runs; the same diagnostics are emitted at every evaluation
/// step. This is the fixed-kernel comparator for the feature-learning runs.
std::vector<MetricsRecord> baseline_frozen_features(const RunConfig& config,
                                                    const MetricsCallback& on_eval = nullptr);

} // namespace mfl
