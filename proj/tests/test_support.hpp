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

// Shared fixtures and hand-rolled generators for property tests.

#pragma once

#include "bslq/bslq.hpp"

#include <random>

namespace bslq::testing
{

/// Seeded generator of small well-posed problems.
class ProblemGenerator
{
public:
    explicit ProblemGenerator(std::uint64_t seed) : rng_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

    Matrix matrix(Eigen::Index r, Eigen::Index c, double scale)
    {
        Matrix m(r, c);
        for (Eigen::Index i = 0; i < r; ++i)
            for (Eigen::Index j = 0; j < c; ++j)
                m(i, j) = uniform(-scale, scale);
        return m;
    }

    Matrix psd(Eigen::Index n, double scale)
    {
        const Matrix l = matrix(n, n, scale);
        return l * l.transpose();
    }

    Vector vector(Eigen::Index n, double scale) { return matrix(n, 1, scale); }

    /// A time-varying path: constant or grid-sampled on three points.
    MatrixPath path(const Matrix &base, double wobble)
    {
        if (integer(0, 1) == 0)
            return MatrixPath::constant(base);
        const Matrix mid = base + matrix(base.rows(), base.cols(), wobble);
        return MatrixPath::grid_sampled({0.0, 0.5, 1.0}, {base, mid, base});
    }

    MatrixPath symmetric_path(const Matrix &base, double wobble)
    {
        if (integer(0, 1) == 0)
            return MatrixPath::constant(base);
        const Matrix d = psd(base.rows(), wobble);
        return MatrixPath::grid_sampled({0.0, 0.5, 1.0}, {base, base + d, base});
    }

    AffineProcess process(Eigen::Index dim, double scale)
    {
        return AffineProcess::constant(vector(dim, scale), vector(dim, scale));
    }

    /// Uniformly convex problem (positive semidefinite cost block, R22 >= I)
    /// with every kind of data present. n, m in [1, maxDim].
    ProblemSpec problem(int steps, int maxDim = 2)
    {
        const int n = integer(1, maxDim);
        const int m = integer(1, maxDim);
        ProblemSpec s = ProblemSpec::zeros(n, m, TimeGrid(1.0, steps));
        s.A = path(matrix(n, n, 0.5), 0.2);
        s.B = path(matrix(n, m, 1.0), 0.2);
        s.C = path(matrix(n, n, 0.3), 0.1);
        s.f = process(n, 0.3);
        s.G = psd(n, 0.5);
        s.g = vector(n, 0.5);
        s.Q = symmetric_path(psd(n, 0.5), 0.2);
        const Matrix r22 = Matrix::Identity(m, m) + psd(m, 0.3);
        const Matrix r21 = matrix(m, n, 0.3);
        const Matrix r11 = psd(n, 0.5) + r21.transpose() * r22.inverse() * r21;
        s.R11 = MatrixPath::constant(symmetrized(r11));
        s.R12 = MatrixPath::constant(r21.transpose());
        s.R21 = MatrixPath::constant(r21);
        s.R22 = MatrixPath::constant(r22);
        s.q = process(n, 0.3);
        s.rho1 = process(n, 0.3);
        s.rho2 = process(m, 0.3);
        s.xi = process(n, 1.0);
        return s;
    }

    std::mt19937_64 &engine() { return rng_; }

private:
    std::mt19937_64 rng_;
};

inline double max_abs_diff(const std::vector<Matrix> &a, const std::vector<Matrix> &b)
{
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        worst = std::max(worst, sup_norm(a[i] - b[i]));
    return worst;
}

inline bool bitwise_equal(const std::vector<Matrix> &a, const std::vector<Matrix> &b)
{
    if (a.size() != b.size())
        return false;
    for (std::size_t i = 0; i < a.size(); ++i)
    {
        if (a[i].rows() != b[i].rows() || a[i].cols() != b[i].cols())
            return false;
        if (std::memcmp(a[i].data(), b[i].data(), sizeof(double) * static_cast<std::size_t>(a[i].size())) != 0)
            return false;
    }
    return true;
}

inline bool bitwise_equal(const std::vector<Vector> &a, const std::vector<Vector> &b)
{
    return bitwise_equal(std::vector<Matrix>(a.begin(), a.end()), std::vector<Matrix>(b.begin(), b.end()));
}

} // namespace bslq::testing
