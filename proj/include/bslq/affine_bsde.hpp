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

// Linear BSDEs with deterministic coefficients and affine-in-W data,
//
//   d phi = (M phi + N beta + r0 + r1 W) dt + beta dW,   phi(T) = a_T + b_T W(T).
//
// With the ansatz phi = a(t) + b(t) W(t), beta = b(t), Ito's formula gives
// d phi = (a' + b' W) dt + b dW, and matching coefficients of W yields the
// backward ODE pair
//
//   b' = M b + r1,        a' = M a + N b + r0,
//
// which is exact: no regression or Monte Carlo is involved.

#pragma once

#include "bslq/reduction.hpp"

namespace bslq
{

/// Canonical-form coefficients on every lattice point.
struct DriftSpec
{
    Lattice lattice;
    std::vector<Matrix> M, N;
    std::vector<Vector> r0, r1;
};

struct AffineBsdeSolution
{
    Lattice lattice;
    /// phi = a + b W, beta = b, on every lattice point.
    std::vector<Vector> a, b;
    DriftSpec drift;

    Vector phi(std::size_t point, double w) const { return a[point] + b[point] * w; }
    const Vector &beta(std::size_t point) const { return b[point]; }

    /// phi as a grid-sampled affine process.
    AffineProcess phi_process() const
    {
        return {MatrixPath::grid_sampled(lattice.times(), {a.begin(), a.end()}),
                MatrixPath::grid_sampled(lattice.times(), {b.begin(), b.end()})};
    }

    /// beta as an affine process: deterministic part b, zero loading.
    AffineProcess beta_process() const
    {
        return AffineProcess::deterministic(MatrixPath::grid_sampled(lattice.times(), {b.begin(), b.end()}));
    }
};

/// Assembles M = A - BS R22^-1 S2 - CS RS^-1 S S1, N = CS RS^-1 and
/// r = -CS RS^-1 S rho1 - BS R22^-1 rho2 + S q + f split into its constant
/// and W-loading parts, for the reduced problem in `table`.
inline DriftSpec assemble_drift(const CoefficientTable &table, const RiccatiSolution &sigma)
{
    if (!(table.lattice == sigma.lattice()))
        throw Error("assemble_drift: lattice mismatch");
    const std::size_t points = table.lattice.points();
    DriftSpec d;
    d.lattice = table.lattice;
    d.M.resize(points);
    d.N.resize(points);
    d.r0.resize(points);
    d.r1.resize(points);
    for (std::size_t i = 0; i < points; ++i)
    {
        const Matrix &s = sigma.at_point(i);
        const Matrix &bs = sigma.BofSigma[i];
        const Matrix &cs = sigma.CofSigma[i];
        const Matrix &rsInv = sigma.RofSigmaInv[i];
        const Matrix bsR = bs * table.R22inv[i];
        const Matrix csRs = cs * rsInv;
        d.M[i] = table.A[i] - bsR * table.S2[i] - csRs * s * table.S1[i];
        d.N[i] = csRs;
        d.r0[i] = -csRs * s * table.rho1.a[i] - bsR * table.rho2.a[i] + s * table.q.a[i] + table.f.a[i];
        d.r1[i] = -csRs * s * table.rho1.b[i] - bsR * table.rho2.b[i] + s * table.q.b[i] + table.f.b[i];
    }
    return d;
}

inline DriftSpec assemble_drift(const ReducedProblem &r, const RiccatiSolution &sigma)
{
    return assemble_drift(r.table, sigma);
}

/// Largest difference between the expanded inhomogeneity
///   -C RS^-1 S rho1 - S S1' RS^-1 S rho1 - B R22^-1 rho2 - S S2' R22^-1 rho2 + S q + f
/// and the collapsed form used by assemble_drift, over both affine parts.
inline double drift_form_defect(const CoefficientTable &table, const RiccatiSolution &sigma, const DriftSpec &d)
{
    double worst = 0.0;
    for (std::size_t i = 0; i < table.lattice.points(); ++i)
    {
        const Matrix &s = sigma.at_point(i);
        const Matrix &rsInv = sigma.RofSigmaInv[i];
        const Matrix &r22inv = table.R22inv[i];
        const auto expanded = [&](const Vector &rho1, const Vector &rho2, const Vector &q, const Vector &f) -> Vector {
            return -table.C[i] * rsInv * s * rho1 - s * table.S1[i].transpose() * rsInv * s * rho1 -
                   table.B[i] * r22inv * rho2 - s * table.S2[i].transpose() * r22inv * rho2 + s * q + f;
        };
        const Vector e0 = expanded(table.rho1.a[i], table.rho2.a[i], table.q.a[i], table.f.a[i]);
        const Vector e1 = expanded(table.rho1.b[i], table.rho2.b[i], table.q.b[i], table.f.b[i]);
        worst = std::max({worst, sup_norm(e0 - d.r0[i]), sup_norm(e1 - d.r1[i])});
    }
    return worst;
}

/// Solves the canonical-form BSDE backward from phi(T) = aT + bT W(T).
inline AffineBsdeSolution solve_affine_bsde(const DriftSpec &drift, const Vector &aT, const Vector &bT)
{
    const Eigen::Index n = aT.size();
    if (bT.size() != n || drift.M.front().rows() != n)
        throw Error("solve_affine_bsde: dimension mismatch");
    // state columns: [a, b]
    Matrix terminal(n, 2);
    terminal.col(0) = aT;
    terminal.col(1) = bT;
    auto rhs = [&](const LatticePoint &p, const Matrix &y) -> Matrix {
        const std::size_t i = p.index;
        Matrix d(n, 2);
        d.col(0) = drift.M[i] * y.col(0) + drift.N[i] * y.col(1) + drift.r0[i];
        d.col(1) = drift.M[i] * y.col(1) + drift.r1[i];
        return d;
    };
    const StatePath path = integrate(drift.lattice, Direction::backward, terminal, rhs, {"affine BSDE", false});

    AffineBsdeSolution sol;
    sol.lattice = drift.lattice;
    sol.drift = drift;
    sol.a.resize(path.values.size());
    sol.b.resize(path.values.size());
    for (std::size_t i = 0; i < path.values.size(); ++i)
    {
        sol.a[i] = path.values[i].col(0);
        sol.b[i] = path.values[i].col(1);
    }
    // the anchor is exact; restate it to avoid any column copy surprises
    sol.a.back() = aT;
    sol.b.back() = bT;
    return sol;
}

inline AffineBsdeSolution solve_affine_bsde(const DriftSpec &drift, const AffineProcess &xi, double T)
{
    return solve_affine_bsde(drift, xi.a.at(T), xi.b.at(T));
}

/// (phi, beta) for the reduced problem.
inline AffineBsdeSolution solve_phi(const ReducedProblem &r, const RiccatiSolution &sigma)
{
    return solve_affine_bsde(assemble_drift(r, sigma), r.base.xi_mean(), r.base.xi_loading());
}

/// Residual of the coefficient ODEs at interior RK4 points (five-point
/// stencil derivative), max over both affine components. Stencils
/// straddling one of `breakpoints` are skipped.
inline double affine_bsde_residual(const AffineBsdeSolution &sol, std::span<const double> breakpoints = {})
{
    const auto &lat = sol.lattice;
    const auto &d = sol.drift;
    double worst = 0.0;
    for (std::size_t i = 4; i + 4 < lat.points(); i += 2)
    {
        if (straddles(breakpoints, lat.time(i - 4), lat.time(i + 4)))
            continue;
        const Vector da = stencil_derivative(sol.a, i, 2, lat.h());
        const Vector db = stencil_derivative(sol.b, i, 2, lat.h());
        const Vector fa = d.M[i] * sol.a[i] + d.N[i] * sol.b[i] + d.r0[i];
        const Vector fb = d.M[i] * sol.b[i] + d.r1[i];
        worst = std::max({worst, sup_norm(da - fa), sup_norm(db - fb)});
    }
    return worst;
}

/// Canonical form of the (eta, zeta) BSDE of the forward problem:
///   M = -(A' - Kt B'),  N = -(C' - Kt D'),
///   r = -[(C' - Kt D') P sigma - Kt rho + P b + q],
/// with Kt = (PB + C'PD + S')(R + D'PD)^-1.
inline DriftSpec assemble_eta_drift(const ForwardCoefficientTable &t, const ForwardRiccatiSolution &P)
{
    if (!(t.lattice == P.lattice()))
        throw Error("assemble_eta_drift: lattice mismatch");
    const std::size_t points = t.lattice.points();
    DriftSpec d;
    d.lattice = t.lattice;
    d.M.resize(points);
    d.N.resize(points);
    d.r0.resize(points);
    d.r1.resize(points);
    for (std::size_t i = 0; i < points; ++i)
    {
        const Matrix &p = P.P.values[i];
        const Matrix &kt = P.gainTilde[i];
        const Matrix cPart = t.cC[i].transpose() - kt * t.cD[i].transpose();
        d.M[i] = -(t.cA[i].transpose() - kt * t.cB[i].transpose());
        d.N[i] = -cPart;
        d.r0[i] = -(cPart * p * t.sigma.a[i] - kt * t.rhoTilde.a[i] + p * t.b.a[i] + t.qTilde.a[i]);
        d.r1[i] = -(cPart * p * t.sigma.b[i] - kt * t.rhoTilde.b[i] + p * t.b.b[i] + t.qTilde.b[i]);
    }
    return d;
}

/// (eta, zeta) with eta(T) = gTilde.
inline AffineBsdeSolution solve_eta_zeta(const ForwardProblemSpec &spec, const ForwardCoefficientTable &t,
                                         const ForwardRiccatiSolution &P)
{
    return solve_affine_bsde(assemble_eta_drift(t, P), spec.gTilde, Vector::Zero(spec.n));
}

/// State (Y, Z) driven by an affine control u = ua + ub W with terminal
/// value xi: the canonical form with M = A, N = C, r0 = B ua + fa,
/// r1 = B ub + fb. `withData` = false drops f (and the caller passes the
/// terminal value it wants, typically zero for the homogeneous problem).
struct AffineControl
{
    std::vector<Vector> a, b; // on every lattice point

    Vector value(std::size_t point, double w) const { return a[point] + b[point] * w; }

    static AffineControl zero(const Lattice &lattice, Eigen::Index m)
    {
        return {std::vector<Vector>(lattice.points(), Vector::Zero(m)),
                std::vector<Vector>(lattice.points(), Vector::Zero(m))};
    }
};

inline AffineBsdeSolution solve_state_under_affine_control(const CoefficientTable &t, const AffineControl &u,
                                                           const Vector &xiA, const Vector &xiB, bool withData)
{
    const std::size_t points = t.lattice.points();
    DriftSpec d;
    d.lattice = t.lattice;
    d.M = t.A;
    d.N = t.C;
    d.r0.resize(points);
    d.r1.resize(points);
    for (std::size_t i = 0; i < points; ++i)
    {
        d.r0[i] = t.B[i] * u.a[i];
        d.r1[i] = t.B[i] * u.b[i];
        if (withData)
        {
            d.r0[i] += t.f.a[i];
            d.r1[i] += t.f.b[i];
        }
    }
    return solve_affine_bsde(d, xiA, xiB);
}

} // namespace bslq
