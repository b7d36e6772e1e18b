#pragma once

#include "mfl/experiment.hpp"

#include <filesystem>

namespace mfl {

/// A run configuration plus optional sweep lists over the noise widths and
/// the seed. Empty lists mean "use the base value".
struct SweepConfig {
    RunConfig base;
    std::vector<double> sigmas;
    std::vector<double> tilde_sigmas;
    std::vector<std::uint64_t> seeds;

    /// Cartesian expansion, ordered sigma-major then tilde_sigma then seed.
    std::vector<RunConfig> expand() const;
};

/// Preset with its sweep lists ("paper-fig1" sweeps sigma, "paper-fig2"
/// sweeps tilde_sigma; both average over 5 seeds).
SweepConfig sweep_preset(const std::string& name);

/// Merge a flat JSON config file onto an existing configuration. Scalar keys
/// set base values; "sigma", "tilde_sigma" and "seed" also accept arrays.
/// Unknown keys are rejected.
SweepConfig load_config_file(const std::filesystem::path& path, SweepConfig initial);

} // namespace mfl
