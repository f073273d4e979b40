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

// Time grids, deterministic matrix-valued coefficient paths and the
// affine-in-W process class a(t) + b(t) W(t).

#pragma once

#include "bslq/core.hpp"

#include <algorithm>
#include <cstring>
#include <utility>

namespace bslq
{

/// Uniform grid t_k = k T / N on [0, T].
struct TimeGrid
{
    double T = 1.0;
    int steps = 200;

    TimeGrid() = default;
    TimeGrid(double horizon, int n) : T(horizon), steps(n)
    {
        if (!(horizon > 0.0) || !std::isfinite(horizon))
            throw Error("TimeGrid: horizon must be positive and finite");
        if (n <= 0)
            throw Error("TimeGrid: steps must be positive");
    }

    double dt() const { return T / steps; }
    int nodes() const { return steps + 1; }
    /// Exact at both ends: node(0) == 0 and node(steps) == T.
    double node(int k) const { return k == steps ? T : T * static_cast<double>(k) / steps; }

    std::vector<double> node_times() const
    {
        std::vector<double> t(static_cast<std::size_t>(nodes()));
        for (int k = 0; k <= steps; ++k)
            t[static_cast<std::size_t>(k)] = node(k);
        return t;
    }

    TimeGrid refined(int factor) const { return TimeGrid(T, steps * factor); }

    bool operator==(const TimeGrid &) const = default;
};

enum class PathKind
{
    constant,
    piecewise_constant,
    grid_sampled
};

inline const char *to_string(PathKind k)
{
    switch (k)
    {
    case PathKind::constant:
        return "constant";
    case PathKind::piecewise_constant:
        return "piecewise-constant";
    case PathKind::grid_sampled:
        return "grid-sampled";
    }
    return "?";
}

/// Deterministic matrix-valued function of time.
///
/// Piecewise-constant paths hold the left sample on [t_i, t_{i+1}); grid
/// sampled paths interpolate linearly between samples. Both are held
/// constant outside the sampled range.
class MatrixPath
{
public:
    MatrixPath() : MatrixPath(Matrix::Zero(0, 0)) {}

    static MatrixPath constant(Matrix value)
    {
        MatrixPath p;
        p.kind_ = PathKind::constant;
        p.times_ = {0.0};
        p.samples_ = {std::move(value)};
        return p;
    }

    static MatrixPath scalar(double v) { return constant(Matrix::Constant(1, 1, v)); }

    static MatrixPath zero(Eigen::Index rows, Eigen::Index cols) { return constant(Matrix::Zero(rows, cols)); }

    static MatrixPath piecewise_constant(std::vector<double> times, std::vector<Matrix> samples)
    {
        return make(PathKind::piecewise_constant, std::move(times), std::move(samples));
    }

    static MatrixPath grid_sampled(std::vector<double> times, std::vector<Matrix> samples)
    {
        return make(PathKind::grid_sampled, std::move(times), std::move(samples));
    }

    PathKind kind() const noexcept { return kind_; }
    Eigen::Index rows() const noexcept { return samples_.front().rows(); }
    Eigen::Index cols() const noexcept { return samples_.front().cols(); }
    const std::vector<double> &times() const noexcept { return times_; }
    const std::vector<Matrix> &samples() const noexcept { return samples_; }

    Matrix at(double t) const
    {
        if (kind_ == PathKind::constant || samples_.size() == 1)
            return samples_.front();
        if (t <= times_.front())
            return samples_.front();
        if (t >= times_.back())
            return samples_.back();
        auto it = std::upper_bound(times_.begin(), times_.end(), t);
        const auto hi = static_cast<std::size_t>(it - times_.begin());
        const auto lo = hi - 1;
        if (kind_ == PathKind::piecewise_constant)
            return samples_[lo];
        const double span = times_[hi] - times_[lo];
        // snap onto samples so that lattice-aligned queries are exact
        const double tol = 1e-9 * span;
        if (t - times_[lo] <= tol)
            return samples_[lo];
        if (times_[hi] - t <= tol)
            return samples_[hi];
        const double theta = (t - times_[lo]) / span;
        return samples_[lo] + theta * (samples_[hi] - samples_[lo]);
    }

    bool is_zero() const
    {
        return std::all_of(samples_.begin(), samples_.end(), [](const Matrix &m) { return m.isZero(0.0); });
    }

    bool all_finite() const
    {
        return std::all_of(samples_.begin(), samples_.end(), [](const Matrix &m) { return m.allFinite(); });
    }

    /// Largest absolute entry over all samples.
    double bound() const
    {
        double b = 0.0;
        for (const auto &m : samples_)
            b = std::max(b, sup_norm(m));
        return b;
    }

    bool operator==(const MatrixPath &o) const
    {
        if (kind_ != o.kind_ || times_ != o.times_ || samples_.size() != o.samples_.size())
            return false;
        for (std::size_t i = 0; i < samples_.size(); ++i)
        {
            if (samples_[i].rows() != o.samples_[i].rows() || samples_[i].cols() != o.samples_[i].cols())
                return false;
            // bitwise comparison, NaN included
            if (std::memcmp(samples_[i].data(), o.samples_[i].data(),
                            sizeof(double) * static_cast<std::size_t>(samples_[i].size())) != 0)
                return false;
        }
        return true;
    }

private:
    explicit MatrixPath(Matrix value) : times_{0.0}, samples_{std::move(value)} {}

    static MatrixPath make(PathKind kind, std::vector<double> times, std::vector<Matrix> samples)
    {
        if (times.empty() || times.size() != samples.size())
            throw Error("MatrixPath: need one sample per time and at least one sample");
        for (std::size_t i = 1; i < times.size(); ++i)
            if (!(times[i] > times[i - 1]))
                throw Error("MatrixPath: sample times must be strictly increasing");
        for (const auto &s : samples)
            if (s.rows() != samples.front().rows() || s.cols() != samples.front().cols())
                throw Error("MatrixPath: sample dimensions differ");
        MatrixPath p;
        p.kind_ = kind;
        p.times_ = std::move(times);
        p.samples_ = std::move(samples);
        return p;
    }

    PathKind kind_ = PathKind::constant;
    std::vector<double> times_;
    std::vector<Matrix> samples_;
};

/// Vector process a(t) + b(t) W(t) with deterministic a, b (b is the
/// loading on the one-dimensional Brownian motion).
struct AffineProcess
{
    MatrixPath a;
    MatrixPath b;

    static AffineProcess zero(Eigen::Index dim) { return {MatrixPath::zero(dim, 1), MatrixPath::zero(dim, 1)}; }

    static AffineProcess deterministic(MatrixPath a)
    {
        const auto dim = a.rows();
        return {std::move(a), MatrixPath::zero(dim, 1)};
    }

    static AffineProcess constant(const Vector &a, const Vector &b) { return {MatrixPath::constant(a), MatrixPath::constant(b)}; }

    Eigen::Index dim() const { return a.rows(); }
    bool is_deterministic() const { return b.is_zero(); }
    bool is_zero() const { return a.is_zero() && b.is_zero(); }

    Vector mean_part(double t) const { return a.at(t); }
    Vector loading(double t) const { return b.at(t); }
    Vector value(double t, double w) const { return a.at(t) + b.at(t) * w; }

    bool operator==(const AffineProcess &) const = default;
};

/// E<M x, y> for x = xa + xb W(t), y = ya + yb W(t), using E W = 0, E W^2 = t.
inline double affine_expectation(const Matrix &m, const Vector &xa, const Vector &xb, const Vector &ya,
                                 const Vector &yb, double t)
{
    return xa.dot(m * ya) + t * xb.dot(m * yb);
}

} // namespace bslq
