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

// The three deterministic matrix ODEs of the construction:
//
//   shift equation    H' + H A + A'H + Q = 0,               H(0) = -G,
//   backward Riccati  S' - A S - S A' + BS R22^-1 BS'
//                        + CS RS^-1 S CS' = 0,              S(T) = 0,
//     with BS = B + S S2', CS = C + S S1', RS = I + S R11,
//   forward Riccati   P' + P A + A'P + C'PC + Q
//                        - (PB + C'PD + S')(R + D'PD)^-1 (B'P + D'PC + S) = 0,
//                                                           P(T) = G.

#pragma once

#include "bslq/coefficients.hpp"

namespace bslq
{

struct HSolution
{
    StatePath H;

    const Matrix &at_node(int k) const { return H.at_node(k); }
    const Matrix &terminal() const { return H.values.back(); }
};

/// Integrates the shift equation forward from H(0) = -G. When G = 0 and
/// Q = 0 the result is exactly zero.
inline HSolution solve_h(const ProblemSpec &spec, const Lattice &lattice)
{
    const auto A = sample(spec.A, lattice);
    const auto Q = sample(spec.Q, lattice);
    const Matrix anchor = -spec.G;
    auto rhs = [&](const LatticePoint &p, const Matrix &h) -> Matrix {
        return -(h * A[p.index] + A[p.index].transpose() * h + Q[p.index]);
    };
    return {integrate(lattice, Direction::forward, anchor, rhs, {"shift equation", true})};
}

/// Residual of the shift equation at interior RK4 points (five-point
/// stencil derivative); stencils straddling a data breakpoint are skipped.
inline double h_residual(const HSolution &sol, const ProblemSpec &spec)
{
    const auto &lat = sol.H.lattice;
    const auto A = sample(spec.A, lat);
    const auto Q = sample(spec.Q, lat);
    const auto bps = breakpoints(spec);
    double worst = 0.0;
    for (std::size_t i = 4; i + 4 < lat.points(); i += 2)
    {
        if (straddles(bps, lat.time(i - 4), lat.time(i + 4)))
            continue;
        const Matrix &h = sol.H.values[i];
        const Matrix dh = stencil_derivative(sol.H.values, i, 2, lat.h());
        worst = std::max(worst, sup_norm(dh + h * A[i] + A[i].transpose() * h + Q[i]));
    }
    return worst;
}

struct RiccatiSolution
{
    StatePath Sigma;
    /// Derived quantities on every lattice point.
    std::vector<Matrix> BofSigma, CofSigma, RofSigma, RofSigmaInv;
    /// min over lattice points of 1 / cond(RS).
    double conditioning = 1.0;
    /// min over lattice points of the smallest eigenvalue of Sigma.
    double min_eigenvalue = 0.0;

    const Lattice &lattice() const { return Sigma.lattice; }
    const Matrix &at_point(std::size_t i) const { return Sigma.values[i]; }
    const Matrix &at_node(int k) const { return Sigma.at_node(k); }
};

namespace detail
{

inline Matrix riccati_rhs(const CoefficientTable &c, std::size_t i, const Matrix &sigma)
{
    const Eigen::Index n = sigma.rows();
    const Matrix bs = c.B[i] + sigma * c.S2[i].transpose();
    const Matrix cs = c.C[i] + sigma * c.S1[i].transpose();
    const Matrix rs = Matrix::Identity(n, n) + sigma * c.R11[i];
    const Matrix rsInv =
        checked_inverse(rs, "R(Sigma) at node " + std::to_string(c.lattice.node_of(i))).inverse;
    return c.A[i] * sigma + sigma * c.A[i].transpose() - bs * c.R22inv[i] * bs.transpose() -
           cs * rsInv * sigma * cs.transpose();
}

} // namespace detail

/// Solves the backward Riccati equation of a problem already in reduced
/// form (G = 0, Q = 0, R12 = R21' = 0); `table` holds its coefficients.
/// Throws SingularMatrixError when RS loses invertibility and
/// PositivityError when Sigma leaves the PSD cone by more than 1e-10.
inline RiccatiSolution solve_sigma(const CoefficientTable &table)
{
    const Lattice &lat = table.lattice;
    const Eigen::Index n = table.A.front().rows();
    auto rhs = [&](const LatticePoint &p, const Matrix &s) { return detail::riccati_rhs(table, p.index, s); };

    RiccatiSolution sol;
    sol.Sigma = integrate(lat, Direction::backward, Matrix::Zero(n, n), rhs, {"Riccati equation", true});

    const std::size_t points = lat.points();
    sol.BofSigma.resize(points);
    sol.CofSigma.resize(points);
    sol.RofSigma.resize(points);
    sol.RofSigmaInv.resize(points);
    sol.min_eigenvalue = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < points; ++i)
    {
        const Matrix &s = sol.Sigma.values[i];
        const int node = lat.node_of(i);
        sol.BofSigma[i] = table.B[i] + s * table.S2[i].transpose();
        sol.CofSigma[i] = table.C[i] + s * table.S1[i].transpose();
        sol.RofSigma[i] = Matrix::Identity(n, n) + s * table.R11[i];
        const auto inv = checked_inverse(sol.RofSigma[i], "R(Sigma) at node " + std::to_string(node));
        sol.RofSigmaInv[i] = inv.inverse;
        sol.conditioning = std::min(sol.conditioning, 1.0 / inv.condition);
        const double ev = min_sym_eigenvalue(s);
        sol.min_eigenvalue = std::min(sol.min_eigenvalue, ev);
        if (ev < -kPositivityTol)
            throw PositivityError("Riccati solution is not positive semidefinite", node);
    }
    return sol;
}

/// Sup-norm residual of the Riccati equation at interior lattice points,
/// the derivative taken by the five-point stencil over samples `stride`
/// points apart (2 = one RK4 step, lattice.stride() = one grid step).
/// Stencils straddling one of `breakpoints` are skipped.
inline double riccati_residual(const RiccatiSolution &sol, const CoefficientTable &table, int stride = 2,
                               std::span<const double> breakpoints = {})
{
    const auto &lat = sol.lattice();
    const auto s = static_cast<std::size_t>(stride);
    const double step = s * (lat.grid.T / lat.intervals());
    double worst = 0.0;
    for (std::size_t i = 2 * s; i + 2 * s < lat.points(); i += s)
    {
        if (straddles(breakpoints, lat.time(i - 2 * s), lat.time(i + 2 * s)))
            continue;
        const Matrix ds = stencil_derivative(sol.Sigma.values, i, s, step);
        worst = std::max(worst, sup_norm(ds - detail::riccati_rhs(table, i, sol.Sigma.values[i])));
    }
    return worst;
}

/// max over lattice points of |RS^-1 S - S RS^-T|.
inline double sigma_commutation_defect(const RiccatiSolution &sol)
{
    double worst = 0.0;
    for (std::size_t i = 0; i < sol.Sigma.values.size(); ++i)
    {
        const Matrix &s = sol.Sigma.values[i];
        worst = std::max(worst, sup_norm(sol.RofSigmaInv[i] * s - s * sol.RofSigmaInv[i].transpose()));
    }
    return worst;
}

/// max over lattice points of |S - S'|.
inline double sigma_asymmetry(const RiccatiSolution &sol)
{
    double worst = 0.0;
    for (const auto &s : sol.Sigma.values)
        worst = std::max(worst, sup_norm(s - s.transpose()));
    return worst;
}

// ---------------------------------------------------------------------------
// Forward Riccati equation

struct ForwardRiccatiSolution
{
    StatePath P;
    /// On every lattice point: K = (R + D'PD)^-1 (B'P + D'PC + S),
    /// Kt = (PB + C'PD + S')(R + D'PD)^-1 and (R + D'PD)^-1.
    std::vector<Matrix> gain, gainTilde, weightInv;
    /// min over the path of the smallest eigenvalue of R + D'PD.
    double min_weight_eigenvalue = 0.0;
    /// min over the path of the smallest eigenvalue of P.
    double min_eigenvalue = 0.0;
    /// Whether G > 0, R > 0 and Q - S'R^-1 S > 0 hold on the data.
    bool positivity_conditions = false;

    const Lattice &lattice() const { return P.lattice; }
};

/// G > 0, R(t) > 0, Q(t) - S(t)' R(t)^-1 S(t) > 0 at every lattice point.
inline bool forward_positivity_conditions(const ForwardProblemSpec &spec, const ForwardCoefficientTable &t)
{
    if (min_sym_eigenvalue(spec.cG) <= kPositivityTol)
        return false;
    for (std::size_t i = 0; i < t.lattice.points(); ++i)
    {
        if (min_sym_eigenvalue(t.cR[i]) <= kPositivityTol)
            return false;
        const Matrix rInv = t.cR[i].inverse();
        if (min_sym_eigenvalue(t.cQ[i] - t.cS[i].transpose() * rInv * t.cS[i]) <= kPositivityTol)
            return false;
    }
    return true;
}

namespace detail
{

struct ForwardGain
{
    Matrix weight;    // R + D'PD
    Matrix weightInv; // (R + D'PD)^-1
    Matrix coupling;  // B'P + D'PC + S
};

inline ForwardGain forward_gain(const ForwardCoefficientTable &c, std::size_t i, const Matrix &p)
{
    ForwardGain g;
    g.weight = c.cR[i] + c.cD[i].transpose() * p * c.cD[i];
    const int node = c.lattice.node_of(i);
    if (min_sym_eigenvalue(g.weight) <= 0.0)
        throw PositivityError("R + D'PD lost positivity", node);
    g.weightInv = checked_inverse(g.weight, "R + D'PD at node " + std::to_string(node)).inverse;
    g.coupling = c.cB[i].transpose() * p + c.cD[i].transpose() * p * c.cC[i] + c.cS[i];
    return g;
}

inline Matrix forward_riccati_rhs(const ForwardCoefficientTable &c, std::size_t i, const Matrix &p)
{
    const auto g = forward_gain(c, i, p);
    return -(p * c.cA[i] + c.cA[i].transpose() * p + c.cC[i].transpose() * p * c.cC[i] + c.cQ[i]) +
           g.coupling.transpose() * g.weightInv * g.coupling;
}

} // namespace detail

inline ForwardRiccatiSolution solve_forward_riccati(const ForwardProblemSpec &spec, const ForwardCoefficientTable &table)
{
    const Lattice &lat = table.lattice;
    auto rhs = [&](const LatticePoint &p, const Matrix &x) { return detail::forward_riccati_rhs(table, p.index, x); };

    ForwardRiccatiSolution sol;
    sol.P = integrate(lat, Direction::backward, spec.cG, rhs, {"forward Riccati equation", true});
    sol.positivity_conditions = forward_positivity_conditions(spec, table);

    const std::size_t points = lat.points();
    sol.gain.resize(points);
    sol.gainTilde.resize(points);
    sol.weightInv.resize(points);
    sol.min_weight_eigenvalue = std::numeric_limits<double>::infinity();
    sol.min_eigenvalue = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < points; ++i)
    {
        const Matrix &p = sol.P.values[i];
        const auto g = detail::forward_gain(table, i, p);
        sol.weightInv[i] = g.weightInv;
        sol.gain[i] = g.weightInv * g.coupling;
        sol.gainTilde[i] = g.coupling.transpose() * g.weightInv;
        sol.min_weight_eigenvalue = std::min(sol.min_weight_eigenvalue, min_sym_eigenvalue(g.weight));
        const double ev = min_sym_eigenvalue(p);
        sol.min_eigenvalue = std::min(sol.min_eigenvalue, ev);
        if (sol.positivity_conditions && ev < -kPositivityTol)
            throw PositivityError("forward Riccati solution is not positive semidefinite", lat.node_of(i));
    }
    return sol;
}

inline ForwardRiccatiSolution solve_forward_riccati(const ForwardProblemSpec &spec, int substeps = 4)
{
    return solve_forward_riccati(spec, ForwardCoefficientTable::build(spec, Lattice(spec.grid, substeps)));
}

} // namespace bslq
