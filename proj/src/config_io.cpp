#include "mfl/config_io.hpp"

#include "mfl/errors.hpp"

#include <json.hpp>

#include <fstream>

namespace mfl {

std::vector<RunConfig> SweepConfig::expand() const {
    const std::vector<double> sig = sigmas.empty() ? std::vector<double>{base.sigma} : sigmas;
    const std::vector<double> ts =
        tilde_sigmas.empty() ? std::vector<double>{base.hyper.tilde_sigma} : tilde_sigmas;
    const std::vector<std::uint64_t> sd = seeds.empty() ? std::vector<std::uint64_t>{base.seed} : seeds;

    std::vector<RunConfig> out;
    out.reserve(sig.size() * ts.size() * sd.size());
    for (double s : sig) {
        for (double t : ts) {
            for (std::uint64_t e : sd) {
                RunConfig cfg = base;
                cfg.sigma = s;
                cfg.hyper.tilde_sigma = t;
                cfg.seed = e;
                out.push_back(std::move(cfg));
            }
        }
    }
    return out;
}

SweepConfig sweep_preset(const std::string& name) {
    SweepConfig sweep;
    sweep.base = preset_config(name);
    if (name == "paper-fig1" || name == "paper-fig1-full") {
        sweep.sigmas = {0.0, 0.5, 1.0};
        sweep.seeds = {1, 2, 3, 4, 5};
    } else if (name == "paper-fig2" || name == "paper-fig2-full") {
        sweep.tilde_sigmas = {0.0, 0.5, 1.0};
        sweep.seeds = {1, 2, 3, 4, 5};
    } else if (name == "separation") {
        sweep.seeds = {1, 2, 3, 4, 5};
    }
    return sweep;
}

namespace {

using nlohmann::json;

double as_double(const json& v, const std::string& key) {
    if (!v.is_number()) throw config_error("config key '" + key + "' must be a number");
    return v.get<double>();
}

std::int64_t as_int(const json& v, const std::string& key) {
    if (!v.is_number_integer()) throw config_error("config key '" + key + "' must be an integer");
    return v.get<std::int64_t>();
}

std::string as_string(const json& v, const std::string& key) {
    if (!v.is_string()) throw config_error("config key '" + key + "' must be a string");
    return v.get<std::string>();
}

std::vector<double> as_double_list(const json& v, const std::string& key) {
    std::vector<double> out;
    if (v.is_array()) {
        for (const auto& item : v) out.push_back(as_double(item, key));
        if (out.empty()) throw config_error("config key '" + key + "' must not be an empty array");
    } else {
        out.push_back(as_double(v, key));
    }
    return out;
}

} // namespace

SweepConfig load_config_file(const std::filesystem::path& path, SweepConfig sweep) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open config file " + path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw config_error("cannot parse " + path.string() + ": " + e.what());
    }
    if (!doc.is_object()) throw config_error(path.string() + ": config must be a flat JSON object");

    RunConfig& cfg = sweep.base;
    for (const auto& [key, value] : doc.items()) {
        if (key == "d") cfg.d = static_cast<int>(as_int(value, key));
        else if (key == "n_train") cfg.n_train = static_cast<int>(as_int(value, key));
        else if (key == "n_test") cfg.n_test = static_cast<int>(as_int(value, key));
        else if (key == "particles") cfg.particles = static_cast<int>(as_int(value, key));
        else if (key == "steps") cfg.steps = as_int(value, key);
        else if (key == "eval_every") cfg.eval_every = static_cast<int>(as_int(value, key));
        else if (key == "eta") cfg.hyper.eta = as_double(value, key);
        else if (key == "lambda") cfg.hyper.lambda = as_double(value, key);
        else if (key == "lambda_a") cfg.hyper.lambda_a = as_double(value, key);
        else if (key == "lambda_w") cfg.hyper.lambda_w = as_double(value, key);
        else if (key == "kappa") cfg.kappa = as_double(value, key);
        else if (key == "target") cfg.target = target_kind_from_string(as_string(value, key));
        else if (key == "mode") cfg.mode = run_mode_from_string(as_string(value, key));
        else if (key == "mc_samples_alignment")
            cfg.mc_samples_alignment = static_cast<int>(as_int(value, key));
        else if (key == "out") cfg.out_dir = as_string(value, key);
        else if (key == "run_id") cfg.run_id = as_string(value, key);
        else if (key == "resume_from") cfg.resume_from = as_string(value, key);
        else if (key == "checkpoint_out") cfg.checkpoint_out = as_string(value, key);
        else if (key == "sigma") {
            auto values = as_double_list(value, key);
            if (values.size() == 1) {
                cfg.sigma = values[0];
                sweep.sigmas.clear();
            } else {
                sweep.sigmas = std::move(values);
            }
        } else if (key == "tilde_sigma") {
            auto values = as_double_list(value, key);
            if (values.size() == 1) {
                cfg.hyper.tilde_sigma = values[0];
                sweep.tilde_sigmas.clear();
            } else {
                sweep.tilde_sigmas = std::move(values);
            }
        } else if (key == "seed") {
            if (value.is_array()) {
                sweep.seeds.clear();
                for (const auto& item : value)
                    sweep.seeds.push_back(static_cast<std::uint64_t>(as_int(item, key)));
                if (sweep.seeds.empty())
                    throw config_error("config key 'seed' must not be an empty array");
            } else {
                cfg.seed = static_cast<std::uint64_t>(as_int(value, key));
                sweep.seeds.clear();
            }
        } else {
            throw config_error("unknown config key: " + key);
        }
    }
    return sweep;
}

} // namespace mfl
