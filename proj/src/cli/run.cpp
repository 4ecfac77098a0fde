#include <fstream>
#include <iomanip>
#include <sstream>

#include "qpkdv/cli.hpp"
#include "qpkdv/errors.hpp"

namespace qpkdv::cli {
namespace {

struct Point {
    double epsilon, lambda;
};

std::vector<Point> grid_points(const ExperimentConfig& c) {
    std::vector<Point> pts;
    for (double e : c.epsilons)
        for (double l : c.lambdas) pts.push_back({e, l});
    return pts;
}

solver::NashMoserConfig nm_config(const ExperimentConfig& c, double eps) {
    solver::NashMoserConfig nm = c.nash_moser;
    nm.kam.gamma = c.gamma_for(eps);
    return nm;
}

std::string tag(std::size_t i) {
    std::ostringstream os;
    os << std::setw(3) << std::setfill('0') << i;
    return os.str();
}

std::string num(double v) {
    std::ostringstream os;
    os << std::setprecision(12) << v;
    return os.str();
}

// Solution, regularization and reduction at one (epsilon, lambda).
struct Linearized {
    solver::SolveReport sol;
    std::optional<regularize::Regularization> reg;
    std::optional<kam::Reduction> red;
};

Linearized linearize_at(const ExperimentConfig& c, const Point& p) {
    const auto spec = c.spec(p.epsilon);
    const auto flags = nonlin::structure_flags(spec, c.trunc.nu);
    const auto w = c.frequency(p.lambda);
    const auto nm = nm_config(c, p.epsilon);
    Linearized out{solver::nash_moser(spec, flags, w, c.trunc, nm), std::nullopt, std::nullopt};
    if (!out.sol.converged || out.sol.excluded_lambda) return out;
    out.reg.emplace(regularize::run_regularization(spec, flags, w, out.sol.solution, nm.regularize));
    out.red.emplace(kam::reduce(*out.reg, w, nm.kam));
    return out;
}

json point_json(const Point& p) { return {{"epsilon", p.epsilon}, {"lambda", p.lambda}}; }

json error_json(const Point& p, const std::exception& e) {
    json j = point_json(p);
    j["error"] = e.what();
    return j;
}

json regularization_json(const regularize::Regularization& reg) {
    json steps = json::array();
    for (const auto& s : reg.reports) {
        json norms = json::object();
        for (const auto& [k, v] : s.norms) norms[k] = v;
        steps.push_back({{"name", s.name}, {"identity_residual", s.identity_residual}, {"norms", norms}});
    }
    return {{"mode", regularize::to_string(reg.mode)},
            {"m3", reg.m3},
            {"m1", reg.m1},
            {"step3_skipped", reg.step3_skipped},
            {"steps", steps}};
}

// Tracks the overall exit status: errors dominate exclusions.
struct Outcome {
    bool error = false, excluded = false;
    int code() const { return error ? 1 : excluded ? 2 : 0; }
};

RunResult run_solve(const ExperimentConfig& c) {
    RunResult r;
    Outcome out;
    json runs = json::array();
    std::ostringstream csv;
    csv << "epsilon,lambda,n,N,gamma,u_norm,residual\n";
    const auto pts = grid_points(c);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto& p = pts[i];
        try {
            const auto spec = c.spec(p.epsilon);
            const auto flags = nonlin::structure_flags(spec, c.trunc.nu);
            const auto rep = solver::nash_moser(spec, flags, c.frequency(p.lambda), c.trunc, nm_config(c, p.epsilon));
            out.excluded |= rep.excluded_lambda;
            out.error |= !rep.converged && !rep.excluded_lambda;
            runs.push_back(to_json(rep));
            for (const auto& it : rep.iterates)
                csv << num(p.epsilon) << ',' << num(p.lambda) << ',' << it.n << ',' << it.N << ',' << num(it.gamma)
                    << ',' << num(it.u_norm) << ',' << num(it.residual) << '\n';
            if (rep.converged) r.fields["u_" + tag(i)] = to_json(rep.solution);
        } catch (const Error& e) {
            out.error = true;
            runs.push_back(error_json(p, e));
        }
    }
    r.report = {{"runs", runs}};
    r.trace_csv = csv.str();
    r.exit_code = out.code();
    return r;
}

RunResult run_reduce(const ExperimentConfig& c) {
    RunResult r;
    Outcome out;
    json runs = json::array();
    std::ostringstream csv;
    csv << "epsilon,lambda," << kam::trace_csv({}).substr(0, kam::trace_csv({}).find('\n')) << '\n';
    const auto pts = grid_points(c);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto& p = pts[i];
        try {
            const auto lin = linearize_at(c, p);
            json run = point_json(p);
            run["solve"] = to_json(lin.sol);
            if (!lin.red) {
                out.excluded |= lin.sol.excluded_lambda;
                out.error |= !lin.sol.excluded_lambda;
                runs.push_back(run);
                continue;
            }
            run["regularization"] = regularization_json(*lin.reg);
            run["reduction"] = to_json(*lin.red);
            run["eigenvalue_report"] = to_json(kam::eigenvalue_report(lin.red->eigs, lin.reg->m3, lin.reg->m1, p.epsilon));
            out.excluded |= lin.red->excluded;
            runs.push_back(run);
            std::istringstream rows(kam::trace_csv(lin.red->trace));
            std::string line;
            std::getline(rows, line);  // header
            while (std::getline(rows, line)) csv << num(p.epsilon) << ',' << num(p.lambda) << ',' << line << '\n';
            r.fields["eigenvalues_" + tag(i)] = to_json(lin.red->eigs);
        } catch (const Error& e) {
            out.error = true;
            runs.push_back(error_json(p, e));
        }
    }
    r.report = {{"runs", runs}};
    r.trace_csv = csv.str();
    r.exit_code = out.code();
    return r;
}

RunResult run_measure(const ExperimentConfig& c) {
    RunResult r;
    solver::MeasureConfig mc;
    mc.epsilons = c.epsilons;
    mc.lambdas = c.lambdas;
    mc.a = c.gamma_exponent.value_or(0.5);
    mc.trunc = c.trunc;
    mc.nash_moser = c.nash_moser;
    mc.workers = c.workers;
    const auto spec = c.spec(c.epsilons.front());
    const auto flags = nonlin::structure_flags(spec, c.trunc.nu);
    const auto rep = solver::cantor_measure(spec, flags, c.frequency(c.lambdas.front()), mc);
    r.report = to_json(rep);
    r.report["lambdas"] = c.lambdas;

    std::ostringstream csv;
    csv << "lambda";
    for (const auto& row : rep.rows) csv << ",accepted_" << num(row.epsilon) << ",baseline_" << num(row.epsilon);
    csv << '\n';
    for (std::size_t i = 0; i < c.lambdas.size(); ++i) {
        csv << num(c.lambdas[i]);
        for (const auto& row : rep.rows) csv << ',' << int(row.accepted[i]) << ',' << int(row.baseline[i]);
        csv << '\n';
    }
    r.trace_csv = csv.str();
    return r;
}

RunResult run_stability(const ExperimentConfig& c) {
    RunResult r;
    Outcome out;
    json runs = json::array();
    std::ostringstream csv;
    csv << "epsilon,lambda,t,h_H1,h_Hs,v_Hs,discrepancy\n";
    std::mt19937_64 rng(c.seed);
    const auto h0 = dynamics::random_state(c.trunc.n_x, rng, c.dynamics.amplitude, c.dynamics.decay);
    dynamics::IntegrateOptions opt;
    opt.dt = c.dynamics.dt;
    opt.sample_dt = c.dynamics.sample_dt;
    const auto pts = grid_points(c);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto& p = pts[i];
        try {
            const auto lin = linearize_at(c, p);
            json run = point_json(p);
            if (!lin.red || lin.red->excluded) {
                const bool excluded = lin.sol.excluded_lambda || (lin.red && lin.red->excluded);
                out.excluded |= excluded;
                out.error |= !excluded;
                run["solve"] = to_json(lin.sol);
                runs.push_back(run);
                continue;
            }
            const auto spec = c.spec(p.epsilon);
            const auto coeffs = nonlin::linearized_coefficients(spec, lin.sol.solution);
            const auto rep = dynamics::stability_report(coeffs, *lin.reg, *lin.red, h0, c.dynamics.T, c.dynamics.s, opt);
            run["stability"] = to_json(rep);
            runs.push_back(run);
            for (const auto& row : rep.rows)
                csv << num(p.epsilon) << ',' << num(p.lambda) << ',' << num(row.t) << ',' << num(row.h_h1) << ','
                    << num(row.h_hs) << ',' << num(row.v_hs) << ',' << num(row.discrepancy) << '\n';
        } catch (const Error& e) {
            out.error = true;
            runs.push_back(error_json(p, e));
        }
    }
    r.report = {{"runs", runs}};
    r.trace_csv = csv.str();
    r.exit_code = out.code();
    r.fields["h0"] = {{"n_x", c.trunc.n_x}, {"re", json::array()}, {"im", json::array()}};
    for (const auto& v : h0.h) {
        r.fields["h0"]["re"].push_back(v.real());
        r.fields["h0"]["im"].push_back(v.imag());
    }
    return r;
}

RunResult run_verify(const ExperimentConfig& c) {
    RunResult r;
    r.checks = verify_suite(c);
    json rows = json::array();
    std::ostringstream csv;
    csv << "module,check,value,threshold,pass\n";
    bool all = true;
    for (const auto& k : r.checks) {
        all &= k.pass;
        rows.push_back({{"module", k.module}, {"check", k.name}, {"value", k.value}, {"threshold", k.threshold},
                        {"pass", k.pass}});
        csv << k.module << ',' << k.name << ',' << num(k.value) << ',' << num(k.threshold) << ','
            << (k.pass ? "PASS" : "FAIL") << '\n';
    }
    r.report = {{"checks", rows}, {"all_pass", all}};
    r.trace_csv = csv.str();
    r.exit_code = all ? 0 : 1;
    return r;
}

}  // namespace

Command command_from_string(const std::string& s) {
    if (s == "solve") return Command::solve;
    if (s == "reduce") return Command::reduce;
    if (s == "measure") return Command::measure;
    if (s == "stability") return Command::stability;
    if (s == "verify") return Command::verify;
    throw DomainError("unknown subcommand '" + s + "'");
}

std::string to_string(Command c) {
    switch (c) {
        case Command::solve: return "solve";
        case Command::reduce: return "reduce";
        case Command::measure: return "measure";
        case Command::stability: return "stability";
        case Command::verify: return "verify";
    }
    return "?";
}

RunResult run(const ExperimentConfig& cfg, Command cmd) {
    RunResult r;
    switch (cmd) {
        case Command::solve: r = run_solve(cfg); break;
        case Command::reduce: r = run_reduce(cfg); break;
        case Command::measure: r = run_measure(cfg); break;
        case Command::stability: r = run_stability(cfg); break;
        case Command::verify: r = run_verify(cfg); break;
    }
    // Where and how fast a run executes does not change its payload.
    json echo = to_json(cfg);
    echo.erase("output_dir");
    echo.erase("workers");
    json head = {{"command", to_string(cmd)}, {"seed", cfg.seed}, {"config", echo},
                 {"warnings", cfg.warnings}, {"exit_code", r.exit_code}};
    head.update(r.report);
    r.report = std::move(head);
    return r;
}

std::string check_table(const std::vector<Check>& checks) {
    std::ostringstream os;
    os << std::left << std::setw(11) << "module" << std::setw(34) << "check" << std::setw(14) << "value"
       << std::setw(12) << "threshold" << "result\n";
    for (const auto& k : checks)
        os << std::left << std::setw(11) << k.module << std::setw(34) << k.name << std::setw(14)
           << std::setprecision(4) << k.value << std::setw(12) << k.threshold << (k.pass ? "PASS" : "FAIL") << '\n';
    return os.str();
}

void write_artifacts(const RunResult& r, const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    auto write = [](const fs::path& p, const std::string& body) {
        std::ofstream f(p, std::ios::binary);
        if (!f) throw Error("cannot write " + p.string());
        f << body;
    };
    write(dir / "report.json", r.report.dump(2) + "\n");
    write(dir / "trace.csv", r.trace_csv);
    if (!r.fields.empty()) {
        fs::create_directories(dir / "fields");
        for (const auto& [name, body] : r.fields) write(dir / "fields" / (name + ".json"), body.dump() + "\n");
    }
}

}  // namespace qpkdv::cli
