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

#include "test_support.hpp"

#include <gtest/gtest.h>

namespace bslq
{
namespace
{

struct Simulated
{
    OptimalSolution sol;
    CoefficientTable table;
    PathEnsemble ensemble;
};

Simulated simulate(const ProblemSpec &spec, long paths, std::uint64_t seed, unsigned workers = 1)
{
    Simulated s;
    s.sol = solve_optimal(spec);
    s.table = CoefficientTable::build(spec, s.sol.reduced.lattice);
    s.ensemble = simulate_optimal(s.sol, BrownianEnsemble(seed, paths, spec.grid), {workers});
    return s;
}

TEST(Synthesis, StationarityOnBenchmarks)
{
    for (const auto &spec : {benchmarks::S1(), benchmarks::S2(), benchmarks::S4(), benchmarks::S5(), benchmarks::SX(),
                             benchmarks::SH()})
    {
        const auto s = simulate(spec, 200, 42);
        EXPECT_LE(stationarity_residual(s.table, s.ensemble).sup, 1e-10);
    }
}

TEST(Synthesis, StationarityOnRandomProblems)
{
    testing::ProblemGenerator gen(77);
    for (int trial = 0; trial < 15; ++trial)
    {
        const auto spec = gen.problem(40, 3);
        const auto s = simulate(spec, 50, static_cast<std::uint64_t>(trial));
        EXPECT_LE(stationarity_residual(s.table, s.ensemble).sup, 1e-10) << trial;
    }
}

TEST(Synthesis, ClosedFormsOnS2)
{
    // u* = 1, Y = 1 - (1 - t) = t, Z = 0 for c = 1.
    const auto s = simulate(benchmarks::S2(), 20, 3);
    for (const auto &Y : s.ensemble.Y)
        for (int k = 0; k <= 200; k += 20)
            EXPECT_NEAR(Y(0, k), k / 200.0, 1e-10);
    for (const auto &u : s.ensemble.u)
        EXPECT_NEAR(u(0, 100), 1.0, 1e-10);
}

TEST(Synthesis, TerminalConditionHolds)
{
    const auto s = simulate(benchmarks::SX(), 100, 8);
    for (long p = 0; p < s.ensemble.paths(); ++p)
    {
        const auto pi = static_cast<std::size_t>(p);
        EXPECT_NEAR(s.ensemble.Y[pi](0, 200), s.ensemble.W[pi](200), 1e-12);
    }
}

TEST(Synthesis, WorkerCountDoesNotChangeBits)
{
    testing::ProblemGenerator gen(5);
    const auto spec = gen.problem(30, 2);
    const auto a = simulate(spec, 97, 11, 1);
    const auto b = simulate(spec, 97, 11, 4);
    EXPECT_TRUE(testing::bitwise_equal(a.ensemble.Y, b.ensemble.Y));
    EXPECT_TRUE(testing::bitwise_equal(a.ensemble.Z, b.ensemble.Z));
    EXPECT_TRUE(testing::bitwise_equal(a.ensemble.u, b.ensemble.u));
    EXPECT_TRUE(testing::bitwise_equal(a.ensemble.X, b.ensemble.X));
    const auto ca = evaluate_cost(spec, a.table, a.ensemble, false, 1);
    const auto cb = evaluate_cost(spec, b.table, b.ensemble, false, 3);
    EXPECT_EQ(ca.estimate, cb.estimate);
    EXPECT_EQ(ca.stderr_, cb.stderr_);
}

/// Root-mean-square gap of the dual process between N and 2N steps on
/// coupled paths, over the coarse nodes.
double coupled_gap(int steps, long paths)
{
    const auto fineSpec = benchmarks::S4(2 * steps);
    const auto coarseSpec = benchmarks::S4(steps);
    const BrownianEnsemble fineW(21, paths, fineSpec.grid);
    const auto fine = simulate_dual_sde(solve_optimal(fineSpec), fineW);
    const auto coarse = simulate_dual_sde(solve_optimal(coarseSpec), fineW.coarsened(2));
    double ss = 0.0;
    for (std::size_t p = 0; p < fine.size(); ++p)
        for (int k = 0; k <= steps; ++k)
            ss = std::max(ss, (coarse[p].col(k) - fine[p].col(2 * k)).squaredNorm());
    return std::sqrt(ss);
}

TEST(Synthesis, EulerStrongOrderAtLeastHalf)
{
    const double g1 = coupled_gap(25, 400), g2 = coupled_gap(50, 400), g3 = coupled_gap(100, 400);
    EXPECT_GE(std::log2(g1 / g2), 0.5) << g1 << " " << g2;
    EXPECT_GE(std::log2(g2 / g3), 0.5) << g2 << " " << g3;
}

TEST(Synthesis, GridMismatchRejected)
{
    const auto sol = solve_optimal(benchmarks::S4());
    EXPECT_THROW(simulate_optimal(sol, BrownianEnsemble(1, 10, TimeGrid(1.0, 100))), Error);
}

TEST(ForwardLoop, ClosedLoopCostMatchesValue)
{
    const auto spec = benchmarks::SF();
    const auto table = ForwardCoefficientTable::build(spec, Lattice(spec.grid, 4));
    const auto P = solve_forward_riccati(spec, table);
    const auto eta = solve_eta_zeta(spec, table, P);
    const BrownianEnsemble W(42, 2000, spec.grid);
    const auto e = simulate_forward_closed_loop(spec, table, P, eta, W);
    const auto cost = forward_cost(spec, table, e, 42);
    EXPECT_NEAR(cost.estimate, forward_value(P, spec.x0), 3.0 * cost.stderr_ + 0.01);
    // deterministic data: every path is the same
    EXPECT_EQ(e.X.front(), e.X.back());
}

} // namespace
} // namespace bslq
