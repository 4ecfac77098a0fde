#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "qpkdv/cli.hpp"
#include "qpkdv/errors.hpp"

namespace qpkdv::cli {
namespace {

std::string join(const std::string& base, const std::string& key) { return base.empty() ? key : base + "." + key; }

void reject_unknown(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
    const std::set<std::string> keys(allowed.begin(), allowed.end());
    for (const auto& [k, v] : obj.items())
        if (!keys.count(k)) throw ConfigError(join(path, k), "unknown field");
}

const json& require_object(const json& j, const std::string& path) {
    if (!j.is_object()) throw ConfigError(path.empty() ? "<root>" : path, "expected an object");
    return j;
}

double number(const json& j, const std::string& path) {
    if (!j.is_number()) throw ConfigError(path, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw ConfigError(path, "must be finite");
    return v;
}

int integer(const json& j, const std::string& path) {
    if (!j.is_number_integer()) throw ConfigError(path, "expected an integer");
    return j.get<int>();
}

std::string text(const json& j, const std::string& path) {
    if (!j.is_string()) throw ConfigError(path, "expected a string");
    return j.get<std::string>();
}

template <class Fn>
void optional_field(const json& obj, const std::string& path, const char* key, Fn&& fn) {
    if (auto it = obj.find(key); it != obj.end()) fn(*it, join(path, key));
}

std::vector<double> number_list(const json& j, const std::string& path) {
    std::vector<double> out;
    if (j.is_array()) {
        if (j.empty()) throw ConfigError(path, "list must not be empty");
        for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], path + "[" + std::to_string(i) + "]"));
    } else {
        out.push_back(number(j, path));
    }
    return out;
}

std::vector<double> lambda_values(const json& j, const std::string& path) {
    if (!j.is_object()) return number_list(j, path);
    reject_unknown(j, path, {"grid"});
    const std::string gp = join(path, "grid");
    if (!j.contains("grid")) throw ConfigError(gp, "missing");
    const json& g = require_object(j["grid"], gp);
    reject_unknown(g, gp, {"lo", "hi", "points"});
    for (const char* k : {"lo", "hi", "points"})
        if (!g.contains(k)) throw ConfigError(join(gp, k), "missing");
    const double lo = number(g["lo"], join(gp, "lo")), hi = number(g["hi"], join(gp, "hi"));
    const int points = integer(g["points"], join(gp, "points"));
    if (points < 1) throw ConfigError(join(gp, "points"), "must be at least 1");
    if (!(lo <= hi)) throw ConfigError(gp, "lo must not exceed hi");
    return solver::uniform_grid(lo, hi, points);
}

void parse_nonlinearity(const json& j, const std::string& path, ExperimentConfig& c) {
    if (j.is_string()) {
        c.nonlinearity = j.get<std::string>();
        c.builtin = true;
        return;
    }
    require_object(j, path);
    reject_unknown(j, path, {"builtin", "text", "form"});
    if (j.contains("builtin") == j.contains("text")) throw ConfigError(path, "give exactly one of builtin, text");
    if (j.contains("builtin")) {
        c.nonlinearity = text(j["builtin"], join(path, "builtin"));
        c.builtin = true;
        if (j.contains("form")) throw ConfigError(join(path, "form"), "builtins carry their own form");
    } else {
        c.nonlinearity = text(j["text"], join(path, "text"));
        c.builtin = false;
        optional_field(j, path, "form", [&](const json& v, const std::string& p) {
            try {
                c.form = nonlin::form_from_string(text(v, p));
            } catch (const DomainError& e) {
                throw ConfigError(p, e.what());
            }
        });
    }
}

void parse_frequency(const json& j, const std::string& path, ExperimentConfig& c) {
    require_object(j, path);
    reject_unknown(j, path, {"omega_bar", "preset", "gamma0", "tau0", "check_range"});
    if (j.contains("omega_bar") && j.contains("preset")) throw ConfigError(path, "give omega_bar or preset, not both");
    optional_field(j, path, "omega_bar", [&](const json& v, const std::string& p) {
        if (!v.is_array()) throw ConfigError(p, "expected a list");
        c.omega_bar = number_list(v, p);
    });
    optional_field(j, path, "preset", [&](const json& v, const std::string& p) {
        try {
            c.omega_bar = spectral::Frequency::preset(integer(v, p));
        } catch (const DomainError& e) {
            throw ConfigError(p, e.what());
        }
    });
    optional_field(j, path, "gamma0", [&](const json& v, const std::string& p) { c.gamma0 = number(v, p); });
    optional_field(j, path, "tau0", [&](const json& v, const std::string& p) { c.tau0 = number(v, p); });
    optional_field(j, path, "check_range", [&](const json& v, const std::string& p) { c.check_range = integer(v, p); });
    if (c.omega_bar.size() > static_cast<std::size_t>(spectral::kMaxNu))
        throw ConfigError(join(path, "omega_bar"), "at most " + std::to_string(spectral::kMaxNu) + " entries");
    if (!(c.gamma0 > 0)) throw ConfigError(join(path, "gamma0"), "must be positive");
    if (c.check_range < 1) throw ConfigError(join(path, "check_range"), "must be at least 1");
}

void parse_truncation(const json& j, const std::string& path, ExperimentConfig& c) {
    require_object(j, path);
    reject_unknown(j, path, {"n_phi", "n_x", "oversample"});
    optional_field(j, path, "n_phi", [&](const json& v, const std::string& p) { c.trunc.n_phi = integer(v, p); });
    optional_field(j, path, "n_x", [&](const json& v, const std::string& p) { c.trunc.n_x = integer(v, p); });
    optional_field(j, path, "oversample", [&](const json& v, const std::string& p) { c.trunc.oversample = integer(v, p); });
    if (c.trunc.n_phi < 1) throw ConfigError(join(path, "n_phi"), "must be at least 1");
    if (c.trunc.n_x < 1) throw ConfigError(join(path, "n_x"), "must be at least 1");
    if (c.trunc.oversample < 1) throw ConfigError(join(path, "oversample"), "must be at least 1");
}

void parse_kam(const json& j, const std::string& path, ExperimentConfig& c, bool& tau_given) {
    require_object(j, path);
    reject_unknown(j, path, {"N0", "chi", "gamma", "a", "tau", "target_decay", "max_steps"});
    auto& k = c.nash_moser.kam;
    if (j.contains("gamma") && j.contains("a")) throw ConfigError(path, "give gamma or a, not both");
    optional_field(j, path, "N0", [&](const json& v, const std::string& p) { k.N0 = integer(v, p); });
    optional_field(j, path, "chi", [&](const json& v, const std::string& p) { k.chi = number(v, p); });
    optional_field(j, path, "gamma", [&](const json& v, const std::string& p) { k.gamma = number(v, p); });
    optional_field(j, path, "a", [&](const json& v, const std::string& p) { c.gamma_exponent = number(v, p); });
    optional_field(j, path, "tau", [&](const json& v, const std::string& p) {
        k.tau = number(v, p);
        tau_given = true;
    });
    optional_field(j, path, "target_decay", [&](const json& v, const std::string& p) { k.target_decay = number(v, p); });
    optional_field(j, path, "max_steps", [&](const json& v, const std::string& p) { k.max_steps = integer(v, p); });
    if (k.N0 < 2) throw ConfigError(join(path, "N0"), "must be at least 2");
    if (!(k.chi > 1 && k.chi < 2)) throw ConfigError(join(path, "chi"), "must lie in (1, 2)");
    if (!(k.gamma > 0)) throw ConfigError(join(path, "gamma"), "must be positive");
    if (c.gamma_exponent && !(*c.gamma_exponent > 0 && *c.gamma_exponent < 1))
        throw ConfigError(join(path, "a"), "must lie in (0, 1)");
    if (!(k.target_decay > 0)) throw ConfigError(join(path, "target_decay"), "must be positive");
    if (k.max_steps < 1) throw ConfigError(join(path, "max_steps"), "must be at least 1");
}

void parse_nash_moser(const json& j, const std::string& path, ExperimentConfig& c) {
    require_object(j, path);
    reject_unknown(j, path, {"N0", "chi", "tol_res", "max_iters"});
    auto& nm = c.nash_moser;
    optional_field(j, path, "N0", [&](const json& v, const std::string& p) { nm.N0 = integer(v, p); });
    optional_field(j, path, "chi", [&](const json& v, const std::string& p) { nm.chi = number(v, p); });
    optional_field(j, path, "tol_res", [&](const json& v, const std::string& p) { nm.tol_res = number(v, p); });
    optional_field(j, path, "max_iters", [&](const json& v, const std::string& p) { nm.max_iters = integer(v, p); });
    if (nm.N0 < 2) throw ConfigError(join(path, "N0"), "must be at least 2");
    if (!(nm.chi > 1 && nm.chi < 2)) throw ConfigError(join(path, "chi"), "must lie in (1, 2)");
    if (nm.max_iters < 1) throw ConfigError(join(path, "max_iters"), "must be at least 1");
}

void parse_dynamics(const json& j, const std::string& path, ExperimentConfig& c) {
    require_object(j, path);
    reject_unknown(j, path, {"T", "dt", "sample_dt", "s", "amplitude", "decay"});
    auto& d = c.dynamics;
    optional_field(j, path, "T", [&](const json& v, const std::string& p) { d.T = number(v, p); });
    optional_field(j, path, "dt", [&](const json& v, const std::string& p) { d.dt = number(v, p); });
    optional_field(j, path, "sample_dt", [&](const json& v, const std::string& p) { d.sample_dt = number(v, p); });
    optional_field(j, path, "s", [&](const json& v, const std::string& p) { d.s = number(v, p); });
    optional_field(j, path, "amplitude", [&](const json& v, const std::string& p) { d.amplitude = number(v, p); });
    optional_field(j, path, "decay", [&](const json& v, const std::string& p) { d.decay = number(v, p); });
    if (!(d.T >= 0)) throw ConfigError(join(path, "T"), "must be non-negative");
    if (!(d.dt > 0)) throw ConfigError(join(path, "dt"), "must be positive");
    if (!(d.sample_dt > 0)) throw ConfigError(join(path, "sample_dt"), "must be positive");
}

}  // namespace

nonlin::NonlinearitySpec ExperimentConfig::spec(double epsilon) const {
    return builtin ? nonlin::builtin_nonlinearity(nonlinearity, epsilon)
                   : nonlin::parse_nonlinearity(nonlinearity, form, epsilon);
}

spectral::Frequency ExperimentConfig::frequency(double lambda) const {
    return spectral::Frequency(omega_bar, lambda, gamma0, tau0, check_range);
}

double ExperimentConfig::gamma_for(double epsilon) const {
    return gamma_exponent ? std::pow(epsilon, *gamma_exponent) : nash_moser.kam.gamma;
}

ExperimentConfig parse_config(const json& j) {
    require_object(j, "");
    reject_unknown(j, "", {"version", "nonlinearity", "epsilon", "frequency", "lambda", "truncation", "kam",
                           "nash_moser", "dynamics", "seed", "workers", "output_dir"});
    ExperimentConfig c;
    optional_field(j, "", "version", [&](const json& v, const std::string& p) {
        c.version = integer(v, p);
        if (c.version != kConfigVersion) throw ConfigError(p, "unsupported version " + std::to_string(c.version));
    });
    optional_field(j, "", "nonlinearity", [&](const json& v, const std::string& p) { parse_nonlinearity(v, p, c); });
    optional_field(j, "", "epsilon", [&](const json& v, const std::string& p) {
        c.epsilons = number_list(v, p);
        for (double e : c.epsilons)
            if (e < 0) throw ConfigError(p, "must be non-negative");
    });
    optional_field(j, "", "frequency", [&](const json& v, const std::string& p) { parse_frequency(v, p, c); });
    optional_field(j, "", "lambda", [&](const json& v, const std::string& p) {
        c.lambdas = lambda_values(v, p);
        for (double l : c.lambdas)
            if (l < 0.5 || l > 1.5) throw ConfigError(p, "values must lie in [0.5, 1.5]");
    });
    optional_field(j, "", "truncation", [&](const json& v, const std::string& p) { parse_truncation(v, p, c); });
    c.trunc.nu = static_cast<int>(c.omega_bar.size());

    bool tau_given = false;
    optional_field(j, "", "kam", [&](const json& v, const std::string& p) { parse_kam(v, p, c, tau_given); });
    const int nu = c.trunc.nu;
    if (!tau_given) c.nash_moser.kam.tau = nu + 2;
    if (c.nash_moser.kam.tau <= nu + 1)
        c.warnings.push_back((std::ostringstream{} << "kam.tau = " << c.nash_moser.kam.tau
                                                   << " is not above nu + 1 = " << nu + 1)
                                 .str());
    optional_field(j, "", "nash_moser", [&](const json& v, const std::string& p) { parse_nash_moser(v, p, c); });
    optional_field(j, "", "dynamics", [&](const json& v, const std::string& p) { parse_dynamics(v, p, c); });

    optional_field(j, "", "seed", [&](const json& v, const std::string& p) {
        if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0))
            throw ConfigError(p, "expected a non-negative integer");
        c.seed = v.get<std::uint64_t>();
    });
    optional_field(j, "", "workers", [&](const json& v, const std::string& p) {
        c.workers = integer(v, p);
        if (c.workers < 1) throw ConfigError(p, "must be at least 1");
    });
    optional_field(j, "", "output_dir", [&](const json& v, const std::string& p) { c.output_dir = text(v, p); });

    // Fail early on nonlinearities and frequencies that cannot be built.
    try {
        (void)c.spec(c.epsilons.front());
    } catch (const Error& e) {
        throw ConfigError("nonlinearity", e.what());
    }
    try {
        (void)c.frequency(c.lambdas.front());
    } catch (const Error& e) {
        throw ConfigError("frequency", e.what());
    }
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("--config", "cannot open " + path.string());
    json j;
    try {
        j = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError("--config", std::string("malformed JSON: ") + e.what());
    }
    return parse_config(j);
}

json to_json(const ExperimentConfig& c) {
    json nl = c.builtin ? json{{"builtin", c.nonlinearity}}
                        : json{{"text", c.nonlinearity}, {"form", nonlin::to_string(c.form)}};
    const auto& k = c.nash_moser.kam;
    json kam = {{"N0", k.N0}, {"chi", k.chi}, {"tau", k.tau}, {"target_decay", k.target_decay},
                {"max_steps", k.max_steps}};
    if (c.gamma_exponent)
        kam["a"] = *c.gamma_exponent;
    else
        kam["gamma"] = k.gamma;
    const auto& d = c.dynamics;
    return {
        {"version", c.version},
        {"nonlinearity", nl},
        {"epsilon", c.epsilons},
        {"frequency",
         {{"omega_bar", c.omega_bar}, {"gamma0", c.gamma0}, {"tau0", c.tau0}, {"check_range", c.check_range}}},
        {"lambda", c.lambdas},
        {"truncation", {{"n_phi", c.trunc.n_phi}, {"n_x", c.trunc.n_x}, {"oversample", c.trunc.oversample}}},
        {"kam", kam},
        {"nash_moser",
         {{"N0", c.nash_moser.N0},
          {"chi", c.nash_moser.chi},
          {"tol_res", c.nash_moser.tol_res},
          {"max_iters", c.nash_moser.max_iters}}},
        {"dynamics",
         {{"T", d.T}, {"dt", d.dt}, {"sample_dt", d.sample_dt}, {"s", d.s}, {"amplitude", d.amplitude},
          {"decay", d.decay}}},
        {"seed", c.seed},
        {"workers", c.workers},
        {"output_dir", c.output_dir},
    };
}

}  // namespace qpkdv::cli
