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

// End-to-end verification: every numerical contract of the pipeline run on
// one scenario and collected into a table of (check, value, tolerance).
//
// Monte Carlo checks share one pair of coupled ensembles: N steps and 2N
// steps driven by the same fine Brownian increments. The difference of
// the two estimates calibrates the discretization allowance c * dt.

#pragma once

#include "bslq/evaluation.hpp"

#include <iomanip>
#include <ostream>

namespace bslq
{

inline constexpr double kResidualTol = 1e-6;
inline constexpr double kAlgebraicTol = 1e-10;
/// Extra allowance of the forward closed-loop value comparison.
inline constexpr double kForwardValueAllowance = 0.01;
/// Allowance of the cost-shift identity on Monte Carlo paths (the identity
/// is exact in continuous time; the left-point sums carry an O(dt) error).
inline constexpr double kCostShiftAllowance = 0.02;

struct CheckRow
{
    std::string name;
    double value = 0.0;
    double tolerance = 0.0;
    bool passed = false;
    std::string note;
};

struct VerificationTable
{
    std::string scenario;
    std::vector<CheckRow> rows;

    bool passed() const
    {
        return std::all_of(rows.begin(), rows.end(), [](const CheckRow &r) { return r.passed; });
    }

    std::vector<std::string> failures() const
    {
        std::vector<std::string> out;
        for (const auto &r : rows)
            if (!r.passed)
                out.push_back(r.name);
        return out;
    }

    /// `upper`: value <= tolerance passes; otherwise value >= tolerance.
    void add(std::string name, double value, double tolerance, bool upper = true, std::string note = {})
    {
        const bool ok = std::isfinite(value) && (upper ? value <= tolerance : value >= tolerance);
        rows.push_back({std::move(name), value, tolerance, ok, std::move(note)});
    }
};

inline void print_table(std::ostream &os, const VerificationTable &t)
{
    std::size_t width = 5;
    for (const auto &r : t.rows)
        width = std::max(width, r.name.size());
    os << "scenario " << t.scenario << "\n";
    os << std::left << std::setw(static_cast<int>(width)) << "check"
       << "  " << std::setw(24) << "value" << std::setw(24) << "tolerance"
       << "status\n";
    for (const auto &r : t.rows)
    {
        os << std::left << std::setw(static_cast<int>(width)) << r.name << "  " << std::setw(24) << format_double(r.value)
           << std::setw(24) << format_double(r.tolerance) << (r.passed ? "pass" : "FAIL");
        if (!r.note.empty())
            os << "  (" << r.note << ")";
        os << "\n";
    }
    os << (t.passed() ? "all checks passed" : "contract violated") << "\n";
}

struct VerifyOptions
{
    long paths = 10000;
    int steps = 200;
    int substeps = 4;
    std::uint64_t seed = 42;
    unsigned workers = 0;
    /// Random controls of the convexity probe.
    int trials = 64;
    /// Random directions of the perturbation expansion.
    int perturbations = 20;
    std::vector<double> eps{-1.0, -0.5, -0.1, 0.1, 0.5, 1.0};
};

/// One Monte Carlo run of the synthesized optimum.
struct OptimalRun
{
    ProblemSpec spec;
    OptimalSolution sol;
    CoefficientTable table; // source data on the solver lattice
    PathEnsemble ensemble;
    CostReport cost;
};

inline OptimalRun run_optimal(const ProblemSpec &spec, int steps, const BrownianEnsemble &brownian, int substeps,
                              unsigned workers)
{
    OptimalRun r;
    r.spec = spec;
    r.spec.grid = TimeGrid(spec.grid.T, steps);
    r.sol = solve_optimal(r.spec, substeps);
    r.table = CoefficientTable::build(r.spec, r.sol.reduced.lattice);
    r.ensemble = simulate_optimal(r.sol, brownian, {workers});
    r.cost = evaluate_cost(r.spec, r.table, r.ensemble, false, workers);
    return r;
}

/// N-step and 2N-step runs on coupled Brownian paths.
struct CoupledRuns
{
    OptimalRun coarse, fine;
};

inline CoupledRuns coupled_runs(const ProblemSpec &spec, long paths, int steps, int substeps, std::uint64_t seed,
                                unsigned workers)
{
    const BrownianEnsemble fineW(seed, paths, TimeGrid(spec.grid.T, 2 * steps));
    CoupledRuns c;
    c.coarse = run_optimal(spec, steps, fineW.coarsened(2), substeps, workers);
    c.fine = run_optimal(spec, 2 * steps, fineW, substeps, workers);
    return c;
}

inline ValueCheck value_check(const CoupledRuns &runs)
{
    ValueCheck c;
    c.formula = value_formula(runs.coarse.sol);
    c.mc = runs.coarse.cost;
    c.mcFine = runs.fine.cost;
    c.allowance = calibrated_allowance(c.mc.estimate, c.mcFine.estimate);
    c.tolerance = 3.0 * c.mc.stderr_ + c.allowance + kRoundoffFloor * (1.0 + std::abs(c.formula.value));
    return c;
}

struct PerturbationCheck
{
    std::vector<PerturbationRow> rows;
    /// The same rows on the 2N-step ensemble.
    std::vector<PerturbationRow> fine;
    /// c * dt = max over rows of the calibrated allowance of the defects.
    double allowance = 0.0;
    /// Per-row tolerance 3 stderr + c dt + roundoff floor.
    std::vector<double> tolerance;

    /// min over rows of difference + tolerance (dominance holds iff >= 0).
    double dominance_margin() const
    {
        double worst = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < rows.size(); ++i)
            worst = std::min(worst, rows[i].difference + tolerance[i]);
        return worst;
    }

    /// max over rows of |defect| - tolerance (expansion holds iff <= 0).
    double expansion_excess() const
    {
        double worst = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < rows.size(); ++i)
            worst = std::max(worst, std::abs(rows[i].defect()) - tolerance[i]);
        return worst;
    }

    bool passed() const { return dominance_margin() >= 0.0 && expansion_excess() <= 0.0; }
};

/// J(u* + eps v) - J(u*) >= 0 and = eps^2 J0(0; v) for `count` seeded
/// random affine directions v, within the calibrated tolerance.
inline PerturbationCheck perturbation_check(const CoupledRuns &runs, int count, std::span<const double> eps,
                                            std::uint64_t seed, unsigned workers)
{
    const auto controls_on = [&](const OptimalRun &r) {
        std::vector<AffineControl> v;
        for (int c = 0; c < count; ++c)
            v.push_back(random_affine_control(r.sol.reduced.lattice, r.spec.m, seed, static_cast<std::uint64_t>(c)));
        return v;
    };
    const auto coarseV = controls_on(runs.coarse);
    const auto fineV = controls_on(runs.fine);
    PerturbationCheck pc;
    pc.rows = perturbation_identity(runs.coarse.spec, runs.coarse.table, runs.coarse.ensemble, coarseV, eps, workers);
    pc.fine = perturbation_identity(runs.fine.spec, runs.fine.table, runs.fine.ensemble, fineV, eps, workers);
    for (std::size_t i = 0; i < pc.rows.size(); ++i)
        pc.allowance = std::max(pc.allowance, calibrated_allowance(pc.rows[i].defect(), pc.fine[i].defect()));
    for (const auto &r : pc.rows)
        pc.tolerance.push_back(3.0 * r.difference_stderr + pc.allowance +
                               kRoundoffFloor * (1.0 + std::abs(r.quadratic)));
    return pc;
}

inline VerificationTable verify(const ProblemSpec &input, const VerifyOptions &o, std::string name = {})
{
    VerificationTable t;
    t.scenario = std::move(name);
    const auto runs = coupled_runs(input, o.paths, o.steps, o.substeps, o.seed, o.workers);
    const auto &run = runs.coarse;
    const auto &sol = run.sol;

    const auto bps = breakpoints(run.spec);
    t.add("riccati residual", riccati_residual(sol.sigma, sol.reduced.table, 2, bps), kResidualTol);
    t.add("sigma psd margin", sol.sigma.min_eigenvalue, -kPositivityTol, false);
    t.add("sigma symmetry", sigma_asymmetry(sol.sigma), kAlgebraicTol);
    t.add("sigma commutation", sigma_commutation_defect(sol.sigma), kAlgebraicTol);
    t.add("H residual", sol.reduced.identity ? 0.0 : h_residual(sol.reduced.h, run.spec), kResidualTol,
          true, sol.reduced.identity ? "reduced form, H = 0" : "");
    t.add("phi residual", affine_bsde_residual(sol.phi, bps), kResidualTol);
    t.add("drift form defect", drift_form_defect(sol.reduced.table, sol.sigma, sol.phi.drift), kAlgebraicTol);
    t.add("stationarity sup", stationarity_residual(run.table, run.ensemble).sup, kAlgebraicTol);

    const auto vc = value_check(runs);
    t.add("value gap", vc.gap(), vc.tolerance, true,
          "formula " + format_double(vc.formula.value) + ", mc " + format_double(vc.mc.estimate) + " +- " +
              format_double(vc.mc.stderr_));

    {
        PathEnsemble e = run.ensemble;
        attach_reduced_control(e, sol.reduced);
        const auto sc = cost_shift_identity_check(run.spec, sol.reduced, e, o.workers);
        t.add("cost shift residual", std::abs(sc.residual), 3.0 * sc.stderr_ + kCostShiftAllowance);
    }

    const auto probe = convexity_probe(run.spec, o.trials, o.seed, o.substeps);
    t.add("convexity delta_hat", probe.delta_hat, -kRoundoffFloor, false);

    const auto pc = perturbation_check(runs, o.perturbations, o.eps, o.seed, o.workers);
    t.add("perturbation dominance margin", pc.dominance_margin(), 0.0, false);
    t.add("perturbation expansion excess", pc.expansion_excess(), 0.0);

    const auto ab = apriori_bound_check(run.spec, run.table, run.ensemble);
    t.add("a-priori bound ratio", ab.rhs > 0.0 ? ab.lhs / ab.rhs : 0.0, ab.constant, true,
          ab.rhs > 0.0 ? "" : "zero data");
    return t;
}

inline bool forward_data_homogeneous(const ForwardProblemSpec &s)
{
    return s.b.is_zero() && s.sigma.is_zero() && s.qTilde.is_zero() && s.rhoTilde.is_zero() && s.gTilde.isZero(0.0);
}

inline VerificationTable verify(const ForwardProblemSpec &input, const VerifyOptions &o, std::string name = {})
{
    VerificationTable t;
    t.scenario = std::move(name);
    ForwardProblemSpec spec = input;
    spec.grid = TimeGrid(input.grid.T, o.steps);
    const auto table = ForwardCoefficientTable::build(spec, Lattice(spec.grid, o.substeps));
    const auto P = solve_forward_riccati(spec, table);
    t.add("R + D'PD margin", P.min_weight_eigenvalue, kPositivityTol, false);
    if (P.positivity_conditions)
        t.add("P psd margin", P.min_eigenvalue, -kPositivityTol, false);
    const auto etaZeta = solve_eta_zeta(spec, table, P);
    t.add("eta residual", affine_bsde_residual(etaZeta, breakpoints(spec)), kResidualTol);

    if (forward_data_homogeneous(spec))
    {
        const BrownianEnsemble W(o.seed, o.paths, spec.grid);
        const auto e = simulate_forward_closed_loop(spec, table, P, etaZeta, W, {o.workers});
        const auto cost = forward_cost(spec, table, e, o.seed);
        const double value = forward_value(P, spec.x0);
        t.add("value gap", std::abs(value - cost.estimate), 3.0 * cost.stderr_ + kForwardValueAllowance, true,
              "formula " + format_double(value) + ", mc " + format_double(cost.estimate) + " +- " +
                  format_double(cost.stderr_));
    }
    return t;
}

} // namespace bslq
