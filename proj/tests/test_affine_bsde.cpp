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

TEST(AffineBsde, PhiResidualOnBenchmarksAndRandomProblems)
{
    for (const auto &spec : {benchmarks::S2(), benchmarks::S4(), benchmarks::S5(), benchmarks::SX(), benchmarks::SH()})
    {
        const auto sol = solve_optimal(spec);
        EXPECT_LE(affine_bsde_residual(sol.phi), 1e-6);
        EXPECT_LE(drift_form_defect(sol.reduced.table, sol.sigma, sol.phi.drift), 1e-10);
    }
    testing::ProblemGenerator gen(31);
    for (int trial = 0; trial < 15; ++trial)
    {
        const auto spec = gen.problem(50, 3);
        const auto sol = solve_optimal(spec);
        EXPECT_LE(affine_bsde_residual(sol.phi, breakpoints(spec)), 1e-6) << trial;
        EXPECT_LE(drift_form_defect(sol.reduced.table, sol.sigma, sol.phi.drift), 1e-10) << trial;
    }
}

TEST(AffineBsde, Superposition)
{
    testing::ProblemGenerator gen(32);
    const int n = 2;
    const Lattice lat(TimeGrid(1.0, 40), 4);
    DriftSpec base{lat, {}, {}, {}, {}};
    const Matrix M = gen.matrix(n, n, 0.5), N = gen.matrix(n, n, 0.5);
    for (std::size_t i = 0; i < lat.points(); ++i)
    {
        base.M.push_back(M * (1.0 + lat.time(i)));
        base.N.push_back(N);
        base.r0.push_back(Vector::Zero(n));
        base.r1.push_back(Vector::Zero(n));
    }
    auto d1 = base, d2 = base, d12 = base;
    for (std::size_t i = 0; i < lat.points(); ++i)
    {
        d1.r0[i] = gen.vector(n, 1.0);
        d1.r1[i] = gen.vector(n, 1.0);
        d2.r0[i] = gen.vector(n, 1.0);
        d2.r1[i] = gen.vector(n, 1.0);
        d12.r0[i] = d1.r0[i] + 2.0 * d2.r0[i];
        d12.r1[i] = d1.r1[i] + 2.0 * d2.r1[i];
    }
    const Vector a1 = gen.vector(n, 1.0), b1 = gen.vector(n, 1.0), a2 = gen.vector(n, 1.0), b2 = gen.vector(n, 1.0);
    const auto s1 = solve_affine_bsde(d1, a1, b1);
    const auto s2 = solve_affine_bsde(d2, a2, b2);
    const auto s12 = solve_affine_bsde(d12, a1 + 2.0 * a2, b1 + 2.0 * b2);
    for (std::size_t i = 0; i < lat.points(); ++i)
    {
        EXPECT_LE(sup_norm(s12.a[i] - s1.a[i] - 2.0 * s2.a[i]), 1e-10);
        EXPECT_LE(sup_norm(s12.b[i] - s1.b[i] - 2.0 * s2.b[i]), 1e-10);
    }
}

TEST(AffineBsde, LoadingIsTheMartingaleIntegrand)
{
    // Z(t_k) ~ E[(Y_{k+1} - Y_k) dW_k] / dt for Y = a + b W.
    const auto spec = benchmarks::SX(50);
    const auto sol = solve_optimal(spec);
    const BrownianEnsemble W(3, 20000, spec.grid);
    const double dt = spec.grid.dt();
    const auto &lat = sol.reduced.lattice;
    std::vector<double> acc(static_cast<std::size_t>(spec.grid.steps), 0.0);
    for (long p = 0; p < W.paths(); ++p)
    {
        const auto w = W.path(p);
        for (int k = 0; k < spec.grid.steps; ++k)
        {
            const double y0 = sol.phi.phi(lat.node_point(k), w[static_cast<std::size_t>(k)])(0);
            const double y1 = sol.phi.phi(lat.node_point(k + 1), w[static_cast<std::size_t>(k + 1)])(0);
            acc[static_cast<std::size_t>(k)] += (y1 - y0) * (w[static_cast<std::size_t>(k + 1)] - w[static_cast<std::size_t>(k)]);
        }
    }
    for (int k = 0; k < spec.grid.steps; ++k)
    {
        const double z = acc[static_cast<std::size_t>(k)] / (static_cast<double>(W.paths()) * dt);
        EXPECT_NEAR(z, sol.phi.beta(lat.node_point(k))(0), 5.0 * std::sqrt(dt)) << k;
    }
}

TEST(AffineBsde, ForwardEtaClosedForm)
{
    auto spec = benchmarks::SF();
    spec.gTilde = Vector::Constant(1, 1.0);
    const auto table = ForwardCoefficientTable::build(spec, Lattice(spec.grid, 4));
    const auto P = solve_forward_riccati(spec, table);
    const auto eta = solve_eta_zeta(spec, table, P);
    double worst = 0.0;
    for (std::size_t i = 0; i < table.lattice.points(); ++i)
    {
        worst = std::max(worst, std::abs(eta.a[i](0) - 1.0 / (2.0 - table.lattice.time(i))));
        EXPECT_EQ(eta.b[i](0), 0.0);
    }
    EXPECT_LE(worst, 1e-8);
    EXPECT_LE(affine_bsde_residual(eta), 1e-6);
}

TEST(AffineBsde, StateUnderControlMatchesClosedForm)
{
    // S2 with u = 1: Y(t) = c - (1 - t), Z = 0.
    const auto spec = benchmarks::S2(3.0);
    const Lattice lat(spec.grid, 4);
    const auto table = CoefficientTable::build(spec, lat);
    auto u = AffineControl::zero(lat, 1);
    for (auto &a : u.a)
        a.setOnes();
    const auto s = solve_state_under_affine_control(table, u, spec.xi_mean(), spec.xi_loading(), true);
    for (std::size_t i = 0; i < lat.points(); i += 5)
    {
        EXPECT_NEAR(s.a[i](0), 3.0 - (1.0 - lat.time(i)), 1e-12);
        EXPECT_EQ(s.b[i](0), 0.0);
    }
}

} // namespace
} // namespace bslq
