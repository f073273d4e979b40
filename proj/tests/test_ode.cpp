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

Matrix one() { return Matrix::Constant(1, 1, 1.0); }

auto growth() { return [](const LatticePoint &, const Matrix &y) -> Matrix { return y; }; }

double exp_error(int steps, int substeps)
{
    const Lattice lat(TimeGrid(1.0, steps), substeps);
    const auto path = integrate(lat, Direction::forward, one(), growth());
    return std::abs(path.values.back()(0, 0) - std::exp(1.0));
}

TEST(Rk4, ExponentialToTolerance)
{
    EXPECT_LE(exp_error(16, 4), 1e-8);
    EXPECT_LE(exp_error(64, 1), 1e-8);
    EXPECT_LE(exp_error(8, 8), 1e-8);
}

TEST(Rk4, FourthOrder)
{
    const double ratio = exp_error(8, 1) / exp_error(16, 1);
    EXPECT_GE(ratio, 14.0);
    EXPECT_LE(ratio, 18.0);
}

TEST(Rk4, ForwardThenBackwardReturns)
{
    const Lattice lat(TimeGrid(1.0, 50), 4);
    auto rhs = [](const LatticePoint &p, const Matrix &y) -> Matrix { return -y * std::cos(p.t) + Matrix::Constant(1, 1, p.t); };
    const auto fwd = integrate(lat, Direction::forward, one(), rhs);
    const auto back = integrate(lat, Direction::backward, fwd.values.back(), rhs);
    EXPECT_LE(std::abs(back.values.front()(0, 0) - 1.0), 1e-9);
}

TEST(Rk4, AnchorsAreExactAndMidpointsAccurate)
{
    const Lattice lat(TimeGrid(1.0, 10), 2);
    const auto path = integrate(lat, Direction::backward, one(), growth());
    EXPECT_EQ(path.values.back()(0, 0), 1.0);
    double worst = 0.0;
    for (std::size_t i = 0; i < lat.points(); ++i)
        worst = std::max(worst, std::abs(path.values[i](0, 0) - std::exp(lat.time(i) - 1.0)));
    EXPECT_LE(worst, 1e-7);
    EXPECT_EQ(lat.time(lat.points() - 1), 1.0);
}

TEST(Rk4, NonFiniteThrows)
{
    const Lattice lat(TimeGrid(1.0, 10), 1);
    auto blowup = [](const LatticePoint &, const Matrix &y) -> Matrix { return y * y * 1e200; };
    EXPECT_THROW(integrate(lat, Direction::forward, Matrix::Constant(1, 1, 1e200), blowup), IntegrationError);
}

TEST(Stencil, FiveStepDerivativeIsFourthOrder)
{
    std::vector<double> y;
    const double h = 0.01;
    for (int i = 0; i < 5; ++i)
        y.push_back(std::sin(1.0 + (i - 2) * h));
    EXPECT_NEAR(stencil_derivative(y, 2, 1, h), std::cos(1.0), 1e-9);
    const std::vector<double> bps{0.5};
    EXPECT_TRUE(straddles(bps, 0.4, 0.6));
    EXPECT_FALSE(straddles(bps, 0.5, 0.6));
    EXPECT_FALSE(straddles(bps, 0.3, 0.5));
}

} // namespace
} // namespace bslq
