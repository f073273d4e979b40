/*
 Copyright 2026 The bslq Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

// Command-line driver: solve | reduce | simulate | verify | oracle | value.
//
// Exit status: 0 success, 1 contract violation (the failing check is
// named on stderr), 2 usage or input error. Every output is CSV
// (RFC 4180, CRLF records, 17 significant digits) and depends only on the
// scenario and the flags, never on the worker count.

#pragma once

#include "bslq/oracle.hpp"
#include "bslq/scenario_io.hpp"
#include "bslq/verification.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

namespace bslq
{

struct RunConfig
{
    std::string command;
    std::string scenario;
    long paths = 10000;
    int steps = 200;
    int substeps = 4;
    std::uint64_t seed = 42;
    std::vector<double> eps{-1.0, -0.5, -0.1, 0.1, 0.5, 1.0};
    int trials = 64;
    int perturbations = 20;
    unsigned workers = 0;
    std::string out = ".";
    bool per_path = false;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitContract = 1;
inline constexpr int kExitUsage = 2;

/// Thrown for bad flags or unusable input; maps to exit status 2.
class UsageError : public Error
{
public:
    using Error::Error;
};

// ---------------------------------------------------------------------------
// CSV

class CsvWriter
{
public:
    explicit CsvWriter(const std::filesystem::path &file) : out_(file, std::ios::binary)
    {
        if (!out_)
            throw Error("cannot write " + file.string());
    }

    static std::string escape(const std::string &field)
    {
        if (field.find_first_of(",\"\r\n") == std::string::npos)
            return field;
        std::string s = "\"";
        for (char c : field)
        {
            if (c == '"')
                s += '"';
            s += c;
        }
        return s + "\"";
    }

    void header(const std::vector<std::string> &names)
    {
        for (std::size_t i = 0; i < names.size(); ++i)
            out_ << (i ? "," : "") << escape(names[i]);
        out_ << "\r\n";
    }

    void row(const std::vector<std::string> &fields)
    {
        for (std::size_t i = 0; i < fields.size(); ++i)
            out_ << (i ? "," : "") << escape(fields[i]);
        out_ << "\r\n";
    }

    void row(const std::vector<double> &values)
    {
        for (std::size_t i = 0; i < values.size(); ++i)
            out_ << (i ? "," : "") << format_double(values[i]);
        out_ << "\r\n";
    }

private:
    std::ofstream out_;
};

/// "name[i,j]" column names of a rows x cols matrix, row-major.
inline std::vector<std::string> matrix_columns(const std::string &name, Eigen::Index rows, Eigen::Index cols)
{
    std::vector<std::string> c;
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j)
            c.push_back(name + "[" + std::to_string(i) + "," + std::to_string(j) + "]");
    return c;
}

inline void append_row_major(std::vector<double> &row, const Matrix &m)
{
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            row.push_back(m(i, j));
}

/// Writes a deterministic matrix path sampled on grid nodes.
inline void write_matrix_csv(const std::filesystem::path &file, const std::string &name, const Lattice &lattice,
                             const std::vector<Matrix> &pointValues)
{
    CsvWriter csv(file);
    std::vector<std::string> head{"t"};
    const auto cols = matrix_columns(name, pointValues.front().rows(), pointValues.front().cols());
    head.insert(head.end(), cols.begin(), cols.end());
    csv.header(head);
    for (int k = 0; k <= lattice.grid.steps; ++k)
    {
        const std::size_t i = lattice.node_point(k);
        std::vector<double> row{lattice.time(i)};
        append_row_major(row, pointValues[i]);
        csv.row(row);
    }
}

// ---------------------------------------------------------------------------
// Commands

namespace detail
{

inline std::filesystem::path output_dir(const RunConfig &c)
{
    std::filesystem::path dir(c.out);
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::vector<Matrix> vector_values(const std::vector<Vector> &v)
{
    return {v.begin(), v.end()};
}

inline int cmd_solve(const RunConfig &c, const Scenario &scenario, std::ostream &os)
{
    const auto dir = output_dir(c);
    if (const auto *spec = std::get_if<ProblemSpec>(&scenario))
    {
        const auto sol = solve_optimal(*spec, c.substeps);
        const auto value = value_formula(sol);
        const Lattice &lat = sol.reduced.lattice;
        write_matrix_csv(dir / "sigma.csv", "Sigma", lat, sol.sigma.Sigma.values);
        write_matrix_csv(dir / "H.csv", "H", lat, sol.reduced.h.H.values);
        write_matrix_csv(dir / "phi_a.csv", "a", lat, vector_values(sol.phi.a));
        write_matrix_csv(dir / "phi_b.csv", "b", lat, vector_values(sol.phi.b));
        os << "value              " << format_double(value.value) << "\n";
        os << "reduced value      " << format_double(value.reduced) << "\n";
        os << "cost shift         " << format_double(value.shift) << "\n";
        os << "riccati residual   " << format_double(riccati_residual(sol.sigma, sol.reduced.table)) << "\n";
        os << "sigma min eig      " << format_double(sol.sigma.min_eigenvalue) << "\n";
        os << "phi residual       " << format_double(affine_bsde_residual(sol.phi)) << "\n";
        return kExitOk;
    }
    const auto &spec = std::get<ForwardProblemSpec>(scenario);
    const auto table = ForwardCoefficientTable::build(spec, Lattice(spec.grid, c.substeps));
    const auto P = solve_forward_riccati(spec, table);
    const auto etaZeta = solve_eta_zeta(spec, table, P);
    write_matrix_csv(dir / "P.csv", "P", table.lattice, P.P.values);
    write_matrix_csv(dir / "eta_a.csv", "a", table.lattice, vector_values(etaZeta.a));
    write_matrix_csv(dir / "eta_b.csv", "b", table.lattice, vector_values(etaZeta.b));
    os << "value <P(0)x0,x0>  " << format_double(forward_value(P, spec.x0)) << "\n";
    os << "P min eig          " << format_double(P.min_eigenvalue) << "\n";
    os << "R + D'PD min eig   " << format_double(P.min_weight_eigenvalue) << "\n";
    return kExitOk;
}

inline int cmd_reduce(const RunConfig &c, const Scenario &scenario, std::ostream &os)
{
    const auto *spec = std::get_if<ProblemSpec>(&scenario);
    if (!spec)
        throw UsageError("reduce: needs a backward scenario");
    const auto dir = output_dir(c);
    const auto r = reduce(*spec, c.substeps);
    save_scenario(r.base, (dir / "reduced.json").string());
    write_matrix_csv(dir / "H.csv", "H", r.lattice, r.h.H.values);
    os << (r.identity ? "already in reduced form\n" : "reduced\n");
    os << "H(T)               " << format_double(sup_norm(r.h.terminal())) << " (sup norm)\n";
    os << "cost shift         " << format_double(r.constantShift) << "\n";
    return kExitOk;
}

/// Mean and std of every component, node by node, in path order.
inline void write_summary(const std::filesystem::path &file, const TimeGrid &grid,
                          const std::vector<std::pair<std::string, const std::vector<Matrix> *>> &series)
{
    CsvWriter csv(file);
    std::vector<std::string> head{"t"};
    for (const auto &[name, data] : series)
        for (Eigen::Index i = 0; i < data->front().rows(); ++i)
        {
            head.push_back(name + "[" + std::to_string(i) + "]_mean");
            head.push_back(name + "[" + std::to_string(i) + "]_std");
        }
    csv.header(head);
    std::vector<double> column;
    for (int k = 0; k <= grid.steps; ++k)
    {
        std::vector<double> row{grid.node(k)};
        for (const auto &[name, data] : series)
            for (Eigen::Index i = 0; i < data->front().rows(); ++i)
            {
                column.clear();
                for (const auto &m : *data)
                    column.push_back(m(i, k));
                const auto s = sample_stats(column);
                row.push_back(s.mean);
                row.push_back(s.std);
            }
        csv.row(row);
    }
}

inline void write_paths(const std::filesystem::path &file, const TimeGrid &grid, const std::vector<Vector> &W,
                        const std::vector<std::pair<std::string, const std::vector<Matrix> *>> &series)
{
    CsvWriter csv(file);
    std::vector<std::string> head{"path", "t", "W"};
    for (const auto &[name, data] : series)
        for (Eigen::Index i = 0; i < data->front().rows(); ++i)
            head.push_back(name + "[" + std::to_string(i) + "]");
    csv.header(head);
    for (std::size_t p = 0; p < W.size(); ++p)
        for (int k = 0; k <= grid.steps; ++k)
        {
            std::vector<double> row{static_cast<double>(p), grid.node(k), W[p](k)};
            for (const auto &[name, data] : series)
                for (Eigen::Index i = 0; i < data->front().rows(); ++i)
                    row.push_back((*data)[p](i, k));
            csv.row(row);
        }
}

inline int cmd_simulate(const RunConfig &c, const Scenario &scenario, std::ostream &os)
{
    const auto dir = output_dir(c);
    if (const auto *spec = std::get_if<ProblemSpec>(&scenario))
    {
        const auto sol = solve_optimal(*spec, c.substeps);
        const BrownianEnsemble W(c.seed, c.paths, spec->grid);
        const auto e = simulate_optimal(sol, W, {c.workers});
        const std::vector<std::pair<std::string, const std::vector<Matrix> *>> series{
            {"X", &e.X}, {"Y", &e.Y}, {"Z", &e.Z}, {"u", &e.u}};
        write_summary(dir / "summary.csv", e.grid, series);
        if (c.per_path)
            write_paths(dir / "paths.csv", e.grid, e.W, series);
        const auto cost = evaluate_cost(*spec, CoefficientTable::build(*spec, sol.reduced.lattice), e, false, c.workers);
        os << "paths " << e.paths() << ", steps " << e.grid.steps << ", seed " << c.seed << "\n";
        os << "cost estimate      " << format_double(cost.estimate) << " +- " << format_double(cost.stderr_) << "\n";
        return kExitOk;
    }
    const auto &spec = std::get<ForwardProblemSpec>(scenario);
    const auto table = ForwardCoefficientTable::build(spec, Lattice(spec.grid, c.substeps));
    const auto P = solve_forward_riccati(spec, table);
    const auto etaZeta = solve_eta_zeta(spec, table, P);
    const BrownianEnsemble W(c.seed, c.paths, spec.grid);
    const auto e = simulate_forward_closed_loop(spec, table, P, etaZeta, W, {c.workers});
    const std::vector<std::pair<std::string, const std::vector<Matrix> *>> series{{"X", &e.X}, {"v", &e.v}};
    write_summary(dir / "summary.csv", e.grid, series);
    if (c.per_path)
        write_paths(dir / "paths.csv", e.grid, e.W, series);
    const auto cost = forward_cost(spec, table, e, c.seed);
    os << "paths " << e.paths() << ", steps " << e.grid.steps << ", seed " << c.seed << "\n";
    os << "cost estimate      " << format_double(cost.estimate) << " +- " << format_double(cost.stderr_) << "\n";
    return kExitOk;
}

inline VerifyOptions verify_options(const RunConfig &c)
{
    VerifyOptions o;
    o.paths = c.paths;
    o.steps = c.steps;
    o.substeps = c.substeps;
    o.seed = c.seed;
    o.workers = c.workers;
    o.trials = c.trials;
    o.perturbations = c.perturbations;
    o.eps = c.eps;
    return o;
}

inline int cmd_verify(const RunConfig &c, const Scenario &scenario, std::ostream &os, std::ostream &err)
{
    const auto dir = output_dir(c);
    const auto table = std::visit([&](const auto &spec) { return verify(spec, verify_options(c), c.scenario); },
                                  scenario);
    print_table(os, table);
    CsvWriter csv(dir / "verify.csv");
    csv.header({"check", "value", "tolerance", "status", "note"});
    for (const auto &r : table.rows)
        csv.row({r.name, format_double(r.value), format_double(r.tolerance), r.passed ? "pass" : "fail", r.note});
    if (table.passed())
        return kExitOk;
    for (const auto &f : table.failures())
        err << "contract violated: " << f << "\n";
    return kExitContract;
}

inline int cmd_oracle(const RunConfig &c, const Scenario &scenario, std::ostream &os, std::ostream &err)
{
    const auto *spec = std::get_if<ProblemSpec>(&scenario);
    if (!spec)
        throw UsageError("oracle: needs a backward scenario");
    if (c.steps > kOracleMaxSteps)
        throw UsageError("oracle: --steps must be at most " + std::to_string(kOracleMaxSteps));
    const auto sol = solve_discrete(*spec, c.steps);
    os << "status             " << to_string(sol.status) << "\n";
    os << "hessian min eig    " << format_double(sol.min_eigenvalue) << "\n";
    if (sol.status != OracleStatus::ok)
    {
        err << "contract violated: " << to_string(sol.status) << "\n";
        return kExitContract;
    }
    os << "value              " << format_double(sol.value) << "\n";
    os << "gradient norm      " << format_double(sol.gradient_norm) << "\n";
    os << "replay value       " << format_double(sol.replay_value) << "\n";
    const auto dir = output_dir(c);
    CsvWriter csv(dir / "oracle.csv");
    std::vector<std::string> head{"node", "level", "t", "probability", "W"};
    for (int i = 0; i < spec->m; ++i)
        head.push_back("u[" + std::to_string(i) + "]");
    for (int i = 0; i < spec->n; ++i)
        head.push_back("Y[" + std::to_string(i) + "]");
    for (int i = 0; i < spec->n; ++i)
        head.push_back("Z[" + std::to_string(i) + "]");
    csv.header(head);
    for (std::size_t j = 0; j < sol.nodes.size(); ++j)
    {
        const auto &nd = sol.nodes[j];
        std::vector<double> row{static_cast<double>(j), static_cast<double>(nd.level),
                                spec->grid.T * nd.level / c.steps, nd.probability, nd.w};
        append_row_major(row, nd.u);
        append_row_major(row, nd.Y);
        append_row_major(row, nd.Z);
        csv.row(row);
    }
    return kExitOk;
}

inline int cmd_value(const RunConfig &c, const Scenario &scenario, std::ostream &os)
{
    const auto dir = output_dir(c);
    CsvWriter csv(dir / "value.csv");
    csv.header({"quantity", "value"});
    if (const auto *spec = std::get_if<ProblemSpec>(&scenario))
    {
        const auto runs = coupled_runs(*spec, c.paths, c.steps, c.substeps, c.seed, c.workers);
        const auto vc = value_check(runs);
        os << "formula            " << format_double(vc.formula.value) << "\n";
        os << "monte carlo        " << format_double(vc.mc.estimate) << " +- " << format_double(vc.mc.stderr_)
           << "\n";
        os << "monte carlo (2N)   " << format_double(vc.mcFine.estimate) << " +- "
           << format_double(vc.mcFine.stderr_) << "\n";
        os << "gap                " << format_double(vc.gap()) << " (tolerance " << format_double(vc.tolerance)
           << ")\n";
        csv.row({"formula", format_double(vc.formula.value)});
        csv.row({"mc", format_double(vc.mc.estimate)});
        csv.row({"mc_stderr", format_double(vc.mc.stderr_)});
        csv.row({"mc_fine", format_double(vc.mcFine.estimate)});
        csv.row({"mc_fine_stderr", format_double(vc.mcFine.stderr_)});
        csv.row({"gap", format_double(vc.gap())});
        csv.row({"tolerance", format_double(vc.tolerance)});
        return kExitOk;
    }
    const auto &spec = std::get<ForwardProblemSpec>(scenario);
    const auto table = ForwardCoefficientTable::build(spec, Lattice(spec.grid, c.substeps));
    const auto P = solve_forward_riccati(spec, table);
    const auto etaZeta = solve_eta_zeta(spec, table, P);
    const BrownianEnsemble W(c.seed, c.paths, spec.grid);
    const auto e = simulate_forward_closed_loop(spec, table, P, etaZeta, W, {c.workers});
    const auto cost = forward_cost(spec, table, e, c.seed);
    const double value = forward_value(P, spec.x0);
    os << "formula            " << format_double(value) << "\n";
    os << "monte carlo        " << format_double(cost.estimate) << " +- " << format_double(cost.stderr_) << "\n";
    csv.row({"formula", format_double(value)});
    csv.row({"mc", format_double(cost.estimate)});
    csv.row({"mc_stderr", format_double(cost.stderr_)});
    return kExitOk;
}

} // namespace detail

/// Executes one command. Errors are reported on `err`.
inline int run(const RunConfig &c, std::ostream &os = std::cout, std::ostream &err = std::cerr)
{
    try
    {
        if (c.paths <= 0 || c.steps <= 0 || c.substeps <= 0 || c.trials <= 0 || c.perturbations <= 0)
            throw UsageError("paths, steps, substeps, trials and perturbations must be positive");
        Scenario scenario;
        try
        {
            scenario = with_steps(load_scenario(c.scenario), c.steps);
        }
        catch (const ValidationError &e)
        {
            throw UsageError(e.what());
        }
        catch (const ScenarioError &e)
        {
            throw UsageError(e.what());
        }
        if (c.command == "solve")
            return detail::cmd_solve(c, scenario, os);
        if (c.command == "reduce")
            return detail::cmd_reduce(c, scenario, os);
        if (c.command == "simulate")
            return detail::cmd_simulate(c, scenario, os);
        if (c.command == "verify")
            return detail::cmd_verify(c, scenario, os, err);
        if (c.command == "oracle")
            return detail::cmd_oracle(c, scenario, os, err);
        if (c.command == "value")
            return detail::cmd_value(c, scenario, os);
        throw UsageError("unknown command \"" + c.command + "\"");
    }
    catch (const UsageError &e)
    {
        err << "usage error: " << e.what() << "\n";
        return kExitUsage;
    }
    catch (const std::exception &e)
    {
        err << "contract violated: " << e.what() << "\n";
        return kExitContract;
    }
}

/// Parses argv into a RunConfig and runs it.
inline int main_entry(int argc, const char *const *argv, std::ostream &os = std::cout, std::ostream &err = std::cerr)
{
    CLI::App app{"Backward stochastic LQ solver, simulator and verifier"};
    app.require_subcommand(1);
    RunConfig c;
    std::string scenarioFlag;
    const std::vector<std::pair<std::string, std::string>> commands{
        {"solve", "Solve the Riccati system and print the value"},
        {"reduce", "Write the reduced scenario and H"},
        {"simulate", "Simulate the optimal pair and write summary CSVs"},
        {"verify", "Run every numerical contract and print the table"},
        {"oracle", "Solve the binomial-tree discretization exactly"},
        {"value", "Compare the value formula with Monte Carlo"}};
    for (const auto &[name, help] : commands)
    {
        auto *sub = app.add_subcommand(name, help);
        sub->add_option("SCENARIO", c.scenario, "Scenario file or builtin:NAME");
        sub->add_option("--scenario", scenarioFlag, "Scenario file or builtin:NAME");
        sub->add_option("--paths", c.paths, "Monte Carlo paths")->capture_default_str();
        sub->add_option("--steps", c.steps, "Time steps")->capture_default_str();
        sub->add_option("--substeps", c.substeps, "ODE substeps per time step")->capture_default_str();
        sub->add_option("--seed", c.seed, "Random seed")->capture_default_str();
        sub->add_option("--eps", c.eps, "Perturbation sizes")->delimiter(',');
        sub->add_option("--trials", c.trials, "Convexity probe controls")->capture_default_str();
        sub->add_option("--perturbations", c.perturbations, "Perturbation directions")->capture_default_str();
        sub->add_option("--workers", c.workers, "Worker threads (0 = all cores)")->capture_default_str();
        sub->add_option("--out", c.out, "Output directory")->capture_default_str();
        sub->add_flag("--per-path", c.per_path, "Also write every path (simulate)");
        sub->callback([&c, name] { c.command = name; });
    }
    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        // --help and friends come through here with exit code 0
        if (e.get_exit_code() == 0)
            return app.exit(e, os, err);
        err << "usage error: " << e.what() << "\n";
        return kExitUsage;
    }
    if (!scenarioFlag.empty())
    {
        if (!c.scenario.empty() && c.scenario != scenarioFlag)
        {
            err << "usage error: scenario given twice\n";
            return kExitUsage;
        }
        c.scenario = scenarioFlag;
    }
    if (c.scenario.empty())
    {
        err << "usage error: no scenario given\n";
        return kExitUsage;
    }
    return run(c, os, err);
}

} // namespace bslq
