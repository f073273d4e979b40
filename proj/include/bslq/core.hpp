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

// Shared linear-algebra helpers, error types and numeric utilities.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace bslq
{

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Base class of every error raised by the library.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Malformed scenario document or unknown builtin.
class ScenarioError : public Error
{
public:
    using Error::Error;
};

/// ODE integration produced a non-finite derivative or state.
class IntegrationError : public Error
{
public:
    IntegrationError(const std::string &what, int node)
        : Error(what + " (node " + std::to_string(node) + ")"), node_(node) {}
    int node() const noexcept { return node_; }

private:
    int node_;
};

/// A matrix that must be inverted is numerically singular.
class SingularMatrixError : public Error
{
public:
    SingularMatrixError(const std::string &what, double cond)
        : Error(what), cond_(cond) {}
    double condition() const noexcept { return cond_; }

private:
    double cond_;
};

/// A positivity requirement (R22 > 0, PSD Riccati solution, ...) failed.
class PositivityError : public Error
{
public:
    PositivityError(const std::string &what, int node)
        : Error(what + " (node " + std::to_string(node) + ")"), node_(node) {}
    int node() const noexcept { return node_; }

private:
    int node_;
};

/// Monte Carlo state blew up.
class SimulationError : public Error
{
public:
    SimulationError(const std::string &what, long path, int step)
        : Error(what + " (path " + std::to_string(path) + ", step " + std::to_string(step) + ")"),
          path_(path), step_(step) {}
    long path() const noexcept { return path_; }
    int step() const noexcept { return step_; }

private:
    long path_;
    int step_;
};

/// Singularity threshold on the 1-norm condition number.
inline constexpr double kMaxCondition = 1e12;

struct CheckedInverse
{
    Matrix inverse;
    double condition = 1.0;
};

/// Inverse through full-pivoting LU together with the exact 1-norm
/// condition number. Throws SingularMatrixError above kMaxCondition.
inline CheckedInverse checked_inverse(const Matrix &m, const std::string &what)
{
    Eigen::FullPivLU<Matrix> lu(m);
    if (!lu.isInvertible())
        throw SingularMatrixError(what + ": matrix is singular", std::numeric_limits<double>::infinity());
    CheckedInverse out;
    out.inverse = lu.inverse();
    const double norm = m.cwiseAbs().colwise().sum().maxCoeff();
    const double inv_norm = out.inverse.cwiseAbs().colwise().sum().maxCoeff();
    out.condition = norm * inv_norm;
    if (!std::isfinite(out.condition) || out.condition > kMaxCondition)
        throw SingularMatrixError(what + ": condition number " + std::to_string(out.condition) +
                                      " exceeds 1e12",
                                  out.condition);
    return out;
}

inline Matrix symmetrized(const Matrix &m) { return 0.5 * (m + m.transpose()); }

/// Smallest eigenvalue of the symmetric part of `m`.
inline double min_sym_eigenvalue(const Matrix &m)
{
    if (m.size() == 0)
        return std::numeric_limits<double>::infinity();
    if (m.rows() == 1)
        return m(0, 0);
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(m), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

inline double sup_norm(const Matrix &m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

inline bool all_finite(const Matrix &m) { return m.allFinite(); }

/// Pairwise summation; the result depends only on the order of `values`.
inline double pairwise_sum(std::span<const double> values)
{
    constexpr std::size_t kBlock = 32;
    if (values.size() <= kBlock)
    {
        double s = 0.0;
        for (double v : values)
            s += v;
        return s;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.subspan(0, half)) + pairwise_sum(values.subspan(half));
}

struct SampleStats
{
    double mean = 0.0;
    double stderr_ = 0.0;
    double std = 0.0;
};

/// Mean, sample standard deviation and standard error (std/sqrt(P)).
inline SampleStats sample_stats(std::span<const double> values)
{
    SampleStats s;
    const auto count = values.size();
    if (count == 0)
        return s;
    s.mean = pairwise_sum(values) / static_cast<double>(count);
    if (count > 1)
    {
        std::vector<double> sq(count);
        for (std::size_t i = 0; i < count; ++i)
        {
            const double d = values[i] - s.mean;
            sq[i] = d * d;
        }
        s.std = std::sqrt(pairwise_sum(sq) / static_cast<double>(count - 1));
        s.stderr_ = s.std / std::sqrt(static_cast<double>(count));
    }
    return s;
}

/// Formats a double with 17 significant digits ('.' decimal point).
inline std::string format_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace bslq
