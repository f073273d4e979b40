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

// Fixed-step classical Runge-Kutta integration of matrix ODEs on a lattice
// that refines the solver TimeGrid.
//
// Every grid interval is split into `substeps` RK4 steps of size h. The
// RK4 stages live at t, t + h/2 and t + h, so the stage times all belong to
// the lattice of spacing h/2. The integrator records the solution on that
// whole lattice (midpoints by cubic Hermite interpolation), which lets any
// later ODE whose coefficients depend on this solution evaluate them at its
// own stage times without further interpolation error.

#pragma once

#include "bslq/paths.hpp"

#include <algorithm>
#include <functional>
#include <span>

namespace bslq
{

enum class Direction
{
    forward,
    backward
};

/// Half-substep refinement of a TimeGrid.
struct Lattice
{
    TimeGrid grid;
    int substeps = 4;

    Lattice() = default;
    Lattice(TimeGrid g, int sub) : grid(g), substeps(sub)
    {
        if (sub <= 0)
            throw Error("Lattice: substeps must be positive");
    }

    /// Lattice points per grid interval.
    int stride() const { return 2 * substeps; }
    int intervals() const { return grid.steps * stride(); }
    std::size_t points() const { return static_cast<std::size_t>(intervals()) + 1; }
    /// RK4 step size.
    double h() const { return grid.dt() / substeps; }

    double time(std::size_t i) const
    {
        const auto last = static_cast<std::size_t>(intervals());
        return i == last ? grid.T : grid.T * static_cast<double>(i) / intervals();
    }

    std::size_t node_point(int k) const { return static_cast<std::size_t>(k) * static_cast<std::size_t>(stride()); }
    /// Grid interval containing lattice point i (used in error messages).
    int node_of(std::size_t i) const { return static_cast<int>(i / static_cast<std::size_t>(stride())); }

    std::vector<double> times() const
    {
        std::vector<double> t(points());
        for (std::size_t i = 0; i < t.size(); ++i)
            t[i] = time(i);
        return t;
    }

    bool operator==(const Lattice &) const = default;
};

/// Location handed to right-hand sides: the lattice index and its time.
struct LatticePoint
{
    std::size_t index;
    double t;
};

/// Solution sampled at every lattice point.
struct StatePath
{
    Lattice lattice;
    std::vector<Matrix> values;

    const Matrix &at_point(std::size_t i) const { return values[i]; }
    const Matrix &at_node(int k) const { return values[lattice.node_point(k)]; }

    std::vector<Matrix> node_values() const
    {
        std::vector<Matrix> out;
        out.reserve(static_cast<std::size_t>(lattice.grid.nodes()));
        for (int k = 0; k <= lattice.grid.steps; ++k)
            out.push_back(at_node(k));
        return out;
    }

    /// Grid-sampled MatrixPath over the lattice times.
    MatrixPath to_matrix_path() const { return MatrixPath::grid_sampled(lattice.times(), values); }
};

struct OdeOptions
{
    std::string name = "ode";
    /// Replace the state by its symmetric part after every step.
    bool symmetrize = false;
};

using OdeRhs = std::function<Matrix(const LatticePoint &, const Matrix &)>;

/// Generic description of an ODE integration task.
struct OdeProblem
{
    Direction direction = Direction::forward;
    Lattice lattice;
    OdeRhs rhs;
    OdeOptions options;
};

namespace detail
{

inline void require_finite(const Matrix &m, const OdeOptions &opt, const char *what, int node)
{
    if (!m.allFinite())
        throw IntegrationError(opt.name + ": non-finite " + what, node);
}

} // namespace detail

/// Integrates from the anchor (t = 0 forward, t = T backward) across the
/// lattice. The anchor sample equals `anchor` exactly.
template <class Rhs>
StatePath integrate(const Lattice &lattice, Direction direction, const Matrix &anchor, Rhs &&rhs,
                    const OdeOptions &opt = {})
{
    const std::size_t points = lattice.points();
    const int stride = 2; // lattice points per RK4 step
    const std::size_t last = points - 1;

    StatePath path{lattice, std::vector<Matrix>(points)};
    std::vector<Matrix> deriv(points);

    const bool fwd = direction == Direction::forward;
    const double h = fwd ? lattice.h() : -lattice.h();
    const auto at = [&](std::size_t i) { return LatticePoint{i, lattice.time(i)}; };
    const auto eval = [&](std::size_t i, const Matrix &y) {
        Matrix d = rhs(at(i), y);
        detail::require_finite(d, opt, "derivative", lattice.node_of(i));
        return d;
    };

    std::size_t cur = fwd ? 0 : last;
    Matrix y = anchor;
    detail::require_finite(y, opt, "anchor", lattice.node_of(cur));
    path.values[cur] = y;
    deriv[cur] = eval(cur, y);

    const std::size_t steps = last / stride;
    for (std::size_t s = 0; s < steps; ++s)
    {
        const std::size_t mid = fwd ? cur + 1 : cur - 1;
        const std::size_t next = fwd ? cur + 2 : cur - 2;

        const Matrix &k1 = deriv[cur];
        const Matrix k2 = eval(mid, y + 0.5 * h * k1);
        const Matrix k3 = eval(mid, y + 0.5 * h * k2);
        const Matrix k4 = eval(next, y + h * k3);
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (opt.symmetrize)
            y = symmetrized(y);
        detail::require_finite(y, opt, "state", lattice.node_of(next));

        path.values[next] = y;
        deriv[next] = eval(next, y);

        // cubic Hermite midpoint; (lo, hi) ordered in time
        const std::size_t lo = std::min(cur, next), hi = std::max(cur, next);
        const double span = lattice.h();
        path.values[mid] = 0.5 * (path.values[lo] + path.values[hi]) + (span / 8.0) * (deriv[lo] - deriv[hi]);
        if (opt.symmetrize)
            path.values[mid] = symmetrized(path.values[mid]);
        cur = next;
    }
    return path;
}

inline StatePath integrate(const OdeProblem &problem, const Matrix &anchor)
{
    return integrate(problem.lattice, problem.direction, anchor, problem.rhs, problem.options);
}

/// Fourth-order five-point derivative of lattice samples at point i, the
/// samples being `stride` points apart (`step` in time). Requires
/// 2 stride <= i < size - 2 stride.
template <class Value>
Value stencil_derivative(const std::vector<Value> &y, std::size_t i, std::size_t stride, double step)
{
    const std::size_t s = stride;
    return (-y[i + 2 * s] + 8.0 * y[i + s] - 8.0 * y[i - s] + y[i - 2 * s]) / (12.0 * step);
}

/// True when some breakpoint lies strictly inside (lo, hi).
inline bool straddles(std::span<const double> breakpoints, double lo, double hi)
{
    const auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), lo);
    return it != breakpoints.end() && *it < hi;
}

} // namespace bslq
