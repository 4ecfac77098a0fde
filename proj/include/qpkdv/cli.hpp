#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qpkdv/dynamics.hpp"
#include "qpkdv/solver.hpp"

namespace qpkdv::cli {

using nlohmann::json;

inline constexpr int kConfigVersion = 1;

struct DynamicsConfig {
    double T = 100;
    double dt = 1e-2;
    double sample_dt = 1;
    double s = 2;
    double amplitude = 1;  // h0_j ~ amplitude <j>^-decay
    double decay = 3;
};

struct ExperimentConfig {
    int version = kConfigVersion;
    std::string nonlinearity = "quasilinear_cubic";
    bool builtin = true;
    nonlin::DeclaredForm form = nonlin::DeclaredForm::raw_f;
    std::vector<double> epsilons{1e-3};

    std::vector<double> omega_bar{1.0};
    double gamma0 = 0.1;
    double tau0 = 1.0;
    int check_range = 16;
    std::vector<double> lambdas{1.25};

    spectral::Truncation trunc{1, 8, 8, 2};
    solver::NashMoserConfig nash_moser;  // nash_moser.kam holds the reducibility schedule
    std::optional<double> gamma_exponent;  // gamma = eps^a when set
    DynamicsConfig dynamics;

    std::uint64_t seed = 0;
    int workers = 1;
    std::string output_dir = "out";
    std::vector<std::string> warnings;

    nonlin::NonlinearitySpec spec(double epsilon) const;
    spectral::Frequency frequency(double lambda) const;
    double gamma_for(double epsilon) const;
};

// Throws ConfigError naming the offending field.
ExperimentConfig parse_config(const json& j);
ExperimentConfig load_config(const std::filesystem::path& path);
json to_json(const ExperimentConfig& c);

json to_json(const spectral::FourierField& u);
spectral::FourierField field_from_json(const json& j);
json to_json(const opalg::DiagonalOperator& eigs);
json to_json(const solver::SolveReport& r);
json to_json(const kam::Reduction& r);
json to_json(const kam::EigenvalueReport& r);
json to_json(const solver::MeasureReport& r);
json to_json(const dynamics::StabilityReport& r);

enum class Command { solve, reduce, measure, stability, verify };
Command command_from_string(const std::string& s);
std::string to_string(Command c);

struct Check {
    std::string module, name;
    double value = 0, threshold = 0;
    bool pass = false;
};

struct RunResult {
    int exit_code = 0;  // 0 ok, 2 some lambda excluded, 1 error
    json report;
    std::string trace_csv;
    std::map<std::string, json> fields;
    std::vector<Check> checks;
};

RunResult run(const ExperimentConfig& cfg, Command cmd);
std::vector<Check> verify_suite(const ExperimentConfig& cfg);
std::string check_table(const std::vector<Check>& checks);

// report.json, trace.csv and fields/<name>.json under dir.
void write_artifacts(const RunResult& r, const std::filesystem::path& dir);

}  // namespace qpkdv::cli
