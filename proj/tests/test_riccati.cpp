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

double sigma_error(const RiccatiSolution &sol, const std::function<double(double)> &exact)
{
    double worst = 0.0;
    const auto &lat = sol.lattice();
    for (std::size_t i = 0; i < lat.points(); ++i)
        worst = std::max(worst, std::abs(sol.Sigma.values[i](0, 0) - exact(lat.time(i))));
    return worst;
}

TEST(Sigma, ScalarBenchmarksFollowOneMinusT)
{
    for (const auto &spec : {benchmarks::S1(), benchmarks::S4(), benchmarks::S5()})
    {
        const auto r = reduce(spec);
        const auto sol = solve_sigma(r);
        EXPECT_LE(sigma_error(sol, [](double t) { return 1.0 - t; }), 1e-8);
        EXPECT_LE(riccati_residual(sol, r.table), 1e-6);
        EXPECT_GE(sol.min_eigenvalue, -1e-10);
    }
}

TEST(Sigma, ReducedS4HasRofSigmaTwoMinusT)
{
    const auto sol = solve_sigma(reduce(benchmarks::S4()));
    const auto &lat = sol.lattice();
    for (std::size_t i = 0; i < lat.points(); i += 7)
        EXPECT_NEAR(sol.RofSigma[i](0, 0), 2.0 - lat.time(i), 1e-8);
}

TEST(Sigma, ResidualShrinksWithRefinement)
{
    // SH carries a curved solution; the stencil residual must at least quarter.
    const auto coarse = reduce(benchmarks::SH(1.0, 200));
    const auto fine = reduce(benchmarks::SH(1.0, 400));
    const double r1 = riccati_residual(solve_sigma(coarse), coarse.table);
    const double r2 = riccati_residual(solve_sigma(fine), fine.table);
    EXPECT_LE(r1, 1e-6);
    EXPECT_GE(r1 / r2, 4.0) << r1 << " " << r2;
}

TEST(Sigma, PropertiesOnRandomProblems)
{
    testing::ProblemGenerator gen(2026);
    for (int trial = 0; trial < 30; ++trial)
    {
        const auto spec = gen.problem(60, 3);
        const auto r = reduce(spec);
        const auto sol = solve_sigma(r);
        const auto bps = breakpoints(spec);
        EXPECT_LE(sigma_asymmetry(sol), 1e-10) << trial;
        EXPECT_GE(sol.min_eigenvalue, -1e-10) << trial;
        EXPECT_LE(sigma_commutation_defect(sol), 1e-10) << trial;
        EXPECT_LE(riccati_residual(sol, r.table, 2, bps), 1e-6) << trial;
    }
}

TEST(Sigma, IndefiniteR22Rejected)
{
    auto s = benchmarks::S4();
    s.R22 = MatrixPath::scalar(-1.0);
    EXPECT_THROW(reduce(s), PositivityError);
}

TEST(ShiftEquation, ClosedForms)
{
    const auto r = reduce(benchmarks::SH(1.0));
    double worst = 0.0;
    for (std::size_t i = 0; i < r.lattice.points(); ++i)
        worst = std::max(worst, std::abs(r.h.H.values[i](0, 0) + r.lattice.time(i)));
    EXPECT_LE(worst, 1e-10);
    EXPECT_LE(h_residual(r.h, r.source), 1e-6);

    auto g2 = benchmarks::SH(1.0);
    g2.G = Matrix::Constant(1, 1, 2.0);
    const auto r2 = reduce(g2);
    EXPECT_EQ(r2.h.H.values.front()(0, 0), -2.0);
    worst = 0.0;
    for (std::size_t i = 0; i < r2.lattice.points(); ++i)
        worst = std::max(worst, std::abs(r2.h.H.values[i](0, 0) + 2.0 + r2.lattice.time(i)));
    EXPECT_LE(worst, 1e-10);
}

TEST(ShiftEquation, VanishesWithoutGAndQ)
{
    auto s = benchmarks::S4();
    s.A = MatrixPath::scalar(0.7);
    const auto h = solve_h(s, Lattice(s.grid, 4));
    for (const auto &v : h.H.values)
        EXPECT_EQ(v(0, 0), 0.0);
}

TEST(ForwardRiccati, ScalarFixture)
{
    const auto spec = benchmarks::SF();
    const auto sol = solve_forward_riccati(spec);
    double worst = 0.0;
    for (std::size_t i = 0; i < sol.lattice().points(); ++i)
        worst = std::max(worst, std::abs(sol.P.values[i](0, 0) - 1.0 / (2.0 - sol.lattice().time(i))));
    EXPECT_LE(worst, 1e-8);
    EXPECT_NEAR(forward_value(sol, spec.x0), 0.5, 1e-8);
    // Q - S'R^-1 S = 0 here, so the strict positivity premise does not hold
    EXPECT_FALSE(sol.positivity_conditions);
}

TEST(ForwardRiccati, PositiveDataGivesPositiveSolution)
{
    auto spec = benchmarks::SF();
    spec.cQ = MatrixPath::scalar(1.0);
    spec.cC = MatrixPath::scalar(0.5);
    spec.cD = MatrixPath::scalar(0.3);
    const auto sol = solve_forward_riccati(spec);
    EXPECT_TRUE(sol.positivity_conditions);
    EXPECT_GE(sol.min_eigenvalue, 0.0);
    EXPECT_GT(sol.min_weight_eigenvalue, 0.0);
}

} // namespace
} // namespace bslq
