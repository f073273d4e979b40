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

// Monte Carlo synthesis of the optimal pair.
//
// The dual process of the reduced problem,
//
//   dX = { [S1' RS^-1 S CS' + S2' R22^-1 BS' - A'] X
//          - [S1' RS^-1 S S1 + S2' R22^-1 S2] phi
//          + S1' RS^-1 beta - S1' RS^-1 S rho1 - S2' R22^-1 rho2 + q } dt
//        - RS^-T [CS' X - S1 phi - R11 beta - rho1] dW,        X(0) = g,
//
// is stepped by left-point Euler-Maruyama, and the optimal quantities are
// read off algebraically at every node:
//
//   v = R22^-1 [BS' X - S2 phi - rho2],   Y = -S X + phi,
//   Z = RS^-1 [S CS' X - S S1 phi - S rho1 + beta],
//   u = v - R22^-1 R21 Z   (source R21, R22),
//
// and the adjoint of the source problem is X - H Y.

#pragma once

#include "bslq/affine_bsde.hpp"
#include "bslq/brownian.hpp"
#include "bslq/parallel.hpp"

namespace bslq
{

/// Trajectories on the grid nodes; every per-path matrix is dim x (N+1).
struct PathEnsemble
{
    TimeGrid grid;
    int n = 1;
    int m = 1;
    std::uint64_t seed = 0;
    std::vector<Vector> W;
    /// Adjoint of the source problem (empty when not simulated).
    std::vector<Matrix> X;
    std::vector<Matrix> Y, Z, u;
    /// Control of the reduced problem (equals u when no cross weight).
    std::vector<Matrix> v;

    long paths() const noexcept { return static_cast<long>(Y.size()); }
    bool has_adjoint() const noexcept { return !X.empty(); }
};

/// Deterministic part of the optimal construction.
struct OptimalSolution
{
    ReducedProblem reduced;
    RiccatiSolution sigma;
    AffineBsdeSolution phi;
};

inline OptimalSolution solve_optimal(const ProblemSpec &spec, int substeps = 4)
{
    OptimalSolution s;
    s.reduced = reduce(spec, substeps);
    s.sigma = solve_sigma(s.reduced);
    s.phi = solve_phi(s.reduced, s.sigma);
    return s;
}

struct SimulationOptions
{
    unsigned workers = 0;
};

namespace detail
{

/// Node-wise affine coefficients of the dual SDE and the synthesis maps.
struct SynthesisNode
{
    Matrix Dx, Gx, Vx, Zx, Sigma, K, H;
    Vector dA, dB, gA, gB, vA, vB, zA, zB, phiA, phiB;
};

inline std::vector<SynthesisNode> synthesis_plan(const OptimalSolution &sol)
{
    const auto &r = sol.reduced;
    const auto &t = r.table;
    const auto &lat = r.lattice;
    std::vector<SynthesisNode> plan(static_cast<std::size_t>(lat.grid.nodes()));
    for (int k = 0; k <= lat.grid.steps; ++k)
    {
        const std::size_t i = lat.node_point(k);
        auto &p = plan[static_cast<std::size_t>(k)];
        const Matrix &S = sol.sigma.at_point(i);
        const Matrix &rsInv = sol.sigma.RofSigmaInv[i];
        const Matrix rsInvT = rsInv.transpose();
        const Matrix &bs = sol.sigma.BofSigma[i];
        const Matrix &cs = sol.sigma.CofSigma[i];
        const Matrix &r22inv = t.R22inv[i];
        const Matrix s1tR = t.S1[i].transpose() * rsInv;
        const Matrix s2tR = t.S2[i].transpose() * r22inv;
        const Vector &phiA = sol.phi.a[i];
        const Vector &phiB = sol.phi.b[i];
        const Vector &beta = sol.phi.b[i];

        p.Dx = s1tR * S * cs.transpose() + s2tR * bs.transpose() - t.A[i].transpose();
        const Matrix dphi = -(s1tR * S * t.S1[i] + s2tR * t.S2[i]);
        p.dA = dphi * phiA + s1tR * beta - s1tR * S * t.rho1.a[i] - s2tR * t.rho2.a[i] + t.q.a[i];
        p.dB = dphi * phiB - s1tR * S * t.rho1.b[i] - s2tR * t.rho2.b[i] + t.q.b[i];

        p.Gx = -rsInvT * cs.transpose();
        p.gA = rsInvT * (t.S1[i] * phiA + t.R11[i] * beta + t.rho1.a[i]);
        p.gB = rsInvT * (t.S1[i] * phiB + t.rho1.b[i]);

        p.Vx = r22inv * bs.transpose();
        p.vA = -r22inv * (t.S2[i] * phiA + t.rho2.a[i]);
        p.vB = -r22inv * (t.S2[i] * phiB + t.rho2.b[i]);

        p.Zx = rsInv * S * cs.transpose();
        p.zA = rsInv * (-S * t.S1[i] * phiA - S * t.rho1.a[i] + beta);
        p.zB = rsInv * (-S * t.S1[i] * phiB - S * t.rho1.b[i]);

        p.Sigma = S;
        p.phiA = phiA;
        p.phiB = phiB;
        p.K = r.crossGain[i];
        p.H = r.h.H.values[i];
    }
    return plan;
}

inline void check_grid(const TimeGrid &a, const TimeGrid &b, const char *who)
{
    if (!(a == b))
        throw Error(std::string(who) + ": Brownian grid differs from the solver grid");
}

} // namespace detail

/// Simulates the dual SDE and synthesizes (u, Y, Z) on every path.
inline PathEnsemble simulate_optimal(const OptimalSolution &sol, const BrownianEnsemble &brownian,
                                     const SimulationOptions &opt = {})
{
    const auto &r = sol.reduced;
    const TimeGrid &grid = r.lattice.grid;
    detail::check_grid(grid, brownian.grid(), "simulate_optimal");
    const auto plan = detail::synthesis_plan(sol);
    const int N = grid.steps;
    const double dt = grid.dt();
    const Eigen::Index n = r.source.n, m = r.source.m;
    const long P = brownian.paths();

    PathEnsemble e;
    e.grid = grid;
    e.n = r.source.n;
    e.m = r.source.m;
    e.seed = brownian.seed();
    e.W.resize(static_cast<std::size_t>(P));
    e.X.resize(static_cast<std::size_t>(P));
    e.Y.resize(static_cast<std::size_t>(P));
    e.Z.resize(static_cast<std::size_t>(P));
    e.u.resize(static_cast<std::size_t>(P));
    e.v.resize(static_cast<std::size_t>(P));

    parallel_blocks(P, opt.workers, [&](unsigned, long begin, long end) {
        std::vector<double> dw(static_cast<std::size_t>(N));
        Vector x(n), drift(n), diff(n), y(n), z(n), vv(m), tmp(n);
        for (long p = begin; p < end; ++p)
        {
            const auto pi = static_cast<std::size_t>(p);
            brownian.increments(p, dw);
            Vector W(N + 1);
            Matrix X(n, N + 1), Y(n, N + 1), Z(n, N + 1), U(m, N + 1), V(m, N + 1);
            x = r.base.g;
            double w = 0.0;
            for (int k = 0; k <= N; ++k)
            {
                const auto &nd = plan[static_cast<std::size_t>(k)];
                W(k) = w;
                y.noalias() = -nd.Sigma * x;
                y += nd.phiA + nd.phiB * w;
                z.noalias() = nd.Zx * x;
                z += nd.zA + nd.zB * w;
                vv.noalias() = nd.Vx * x;
                vv += nd.vA + nd.vB * w;
                Y.col(k) = y;
                Z.col(k) = z;
                V.col(k) = vv;
                U.col(k).noalias() = vv - nd.K * z;
                X.col(k).noalias() = x - nd.H * y;
                if (k == N)
                    break;
                const double dwk = dw[static_cast<std::size_t>(k)];
                drift.noalias() = nd.Dx * x;
                drift += nd.dA + nd.dB * w;
                diff.noalias() = nd.Gx * x;
                diff += nd.gA + nd.gB * w;
                x += drift * dt + diff * dwk;
                if (!x.allFinite())
                    throw SimulationError("dual process is not finite", p, k + 1);
                w += dwk;
            }
            // Sigma(T) = 0, so Y(T) = phi(T) = xi on the path
            e.W[pi] = std::move(W);
            e.X[pi] = std::move(X);
            e.Y[pi] = std::move(Y);
            e.Z[pi] = std::move(Z);
            e.u[pi] = std::move(U);
            e.v[pi] = std::move(V);
        }
    });
    return e;
}

/// Dual process of the reduced problem only (X of the reduced problem on
/// every node), for callers that need the raw Euler-Maruyama output.
inline std::vector<Matrix> simulate_dual_sde(const OptimalSolution &sol, const BrownianEnsemble &brownian,
                                             const SimulationOptions &opt = {})
{
    const auto e = simulate_optimal(sol, brownian, opt);
    std::vector<Matrix> out(e.X.size());
    const auto plan = detail::synthesis_plan(sol);
    for (std::size_t p = 0; p < out.size(); ++p)
    {
        out[p] = e.X[p];
        for (Eigen::Index k = 0; k < out[p].cols(); ++k)
            out[p].col(k) += plan[static_cast<std::size_t>(k)].H * e.Y[p].col(k);
    }
    return out;
}

/// Exact (Y, Z) on every path under an affine control u = a + b W, with
/// the problem's own f and xi. No adjoint is produced.
inline PathEnsemble simulate_affine_control(const ProblemSpec &spec, const CoefficientTable &table,
                                            const AffineControl &control, const BrownianEnsemble &brownian)
{
    const TimeGrid &grid = table.lattice.grid;
    detail::check_grid(grid, brownian.grid(), "simulate_affine_control");
    const auto state = solve_state_under_affine_control(table, control, spec.xi_mean(), spec.xi_loading(), true);
    const int N = grid.steps;
    const long P = brownian.paths();

    PathEnsemble e;
    e.grid = grid;
    e.n = spec.n;
    e.m = spec.m;
    e.seed = brownian.seed();
    e.W.resize(static_cast<std::size_t>(P));
    e.Y.resize(static_cast<std::size_t>(P));
    e.Z.resize(static_cast<std::size_t>(P));
    e.u.resize(static_cast<std::size_t>(P));
    for (long p = 0; p < P; ++p)
    {
        const auto pi = static_cast<std::size_t>(p);
        const auto w = brownian.path(p);
        Vector W(N + 1);
        Matrix Y(spec.n, N + 1), Z(spec.n, N + 1), U(spec.m, N + 1);
        for (int k = 0; k <= N; ++k)
        {
            const std::size_t i = table.lattice.node_point(k);
            const double wk = w[static_cast<std::size_t>(k)];
            W(k) = wk;
            Y.col(k) = state.phi(i, wk);
            Z.col(k) = state.beta(i);
            U.col(k) = control.value(i, wk);
        }
        e.W[pi] = std::move(W);
        e.Y[pi] = std::move(Y);
        e.Z[pi] = std::move(Z);
        e.u[pi] = std::move(U);
    }
    return e;
}

/// The reduced control v = u + R22^-1 R21 Z on every path and node.
inline void attach_reduced_control(PathEnsemble &e, const ReducedProblem &r)
{
    e.v.resize(e.u.size());
    for (std::size_t p = 0; p < e.u.size(); ++p)
    {
        e.v[p] = e.u[p];
        for (Eigen::Index k = 0; k < e.u[p].cols(); ++k)
            e.v[p].col(k) =
                unmap_control(r, r.lattice.node_point(static_cast<int>(k)), e.u[p].col(k), e.Z[p].col(k));
    }
}

/// One-step Euler defect |Y_{k+1} - Y_k - (AY + Bu + CZ + f) dt - Z dW| of
/// the state equation; returns the largest over k of its RMS over paths.
inline double bsde_euler_defect(const CoefficientTable &t, const PathEnsemble &e)
{
    const int N = e.grid.steps;
    const double dt = e.grid.dt();
    double worst = 0.0;
    for (int k = 0; k < N; ++k)
    {
        const std::size_t i = t.lattice.node_point(k);
        double ss = 0.0;
        for (std::size_t p = 0; p < e.Y.size(); ++p)
        {
            const double w = e.W[p](k);
            const double dw = e.W[p](k + 1) - w;
            const Vector y = e.Y[p].col(k), z = e.Z[p].col(k);
            const Vector f = t.f.value(i, w);
            const Vector d = e.Y[p].col(k + 1) - y - (t.A[i] * y + t.B[i] * e.u[p].col(k) + t.C[i] * z + f) * dt -
                             z * dw;
            ss += d.squaredNorm();
        }
        worst = std::max(worst, std::sqrt(ss / static_cast<double>(e.Y.size())));
    }
    return worst;
}

/// Pointwise residual S2 Y + R21 Z - B' X + R22 u + rho2 of the source
/// problem over every path and node.
struct StationarityReport
{
    double sup = 0.0;
    double rms = 0.0;
};

inline StationarityReport stationarity_residual(const CoefficientTable &t, const PathEnsemble &e)
{
    if (!e.has_adjoint())
        throw Error("stationarity_residual: ensemble carries no adjoint process");
    StationarityReport rep;
    double ss = 0.0;
    long count = 0;
    for (std::size_t p = 0; p < e.Y.size(); ++p)
    {
        for (int k = 0; k <= e.grid.steps; ++k)
        {
            const std::size_t i = t.lattice.node_point(k);
            const double w = e.W[p](k);
            const Vector res = t.S2[i] * e.Y[p].col(k) + t.R21[i] * e.Z[p].col(k) -
                               t.B[i].transpose() * e.X[p].col(k) + t.R22[i] * e.u[p].col(k) + t.rho2.value(i, w);
            rep.sup = std::max(rep.sup, sup_norm(res));
            ss += res.squaredNorm();
            ++count;
        }
    }
    rep.rms = std::sqrt(ss / static_cast<double>(std::max(1L, count)));
    return rep;
}

// ---------------------------------------------------------------------------
// Forward closed loop

struct ForwardEnsemble
{
    TimeGrid grid;
    std::vector<Vector> W;
    std::vector<Matrix> X, v;

    long paths() const noexcept { return static_cast<long>(X.size()); }
};

/// Euler-Maruyama for the closed loop with feedback
/// v* = -K X - (R + D'PD)^-1 (B' eta + D' zeta + D' P sigma + rho).
inline ForwardEnsemble simulate_forward_closed_loop(const ForwardProblemSpec &spec, const ForwardCoefficientTable &t,
                                                    const ForwardRiccatiSolution &P,
                                                    const AffineBsdeSolution &etaZeta,
                                                    const BrownianEnsemble &brownian, const SimulationOptions &opt = {})
{
    const TimeGrid &grid = t.lattice.grid;
    detail::check_grid(grid, brownian.grid(), "simulate_forward_closed_loop");
    const int N = grid.steps;
    const double dt = grid.dt();
    const long paths = brownian.paths();

    // v* = -K X - oA - oB W at every node
    struct Node
    {
        Matrix K, Fx, Gx, B, D;
        Vector oA, oB, bA, bB, sA, sB;
    };
    std::vector<Node> plan(static_cast<std::size_t>(N + 1));
    for (int k = 0; k <= N; ++k)
    {
        const std::size_t i = t.lattice.node_point(k);
        auto &nd = plan[static_cast<std::size_t>(k)];
        const Matrix &p = P.P.values[i];
        const Matrix &wInv = P.weightInv[i];
        const Vector &ea = etaZeta.a[i];
        const Vector &eb = etaZeta.b[i];
        const Vector &zeta = etaZeta.b[i];
        nd.K = P.gain[i];
        nd.B = t.cB[i];
        nd.D = t.cD[i];
        nd.Fx = t.cA[i] - t.cB[i] * nd.K;
        nd.Gx = t.cC[i] - t.cD[i] * nd.K;
        nd.oA = wInv * (t.cB[i].transpose() * ea + t.cD[i].transpose() * zeta +
                        t.cD[i].transpose() * p * t.sigma.a[i] + t.rhoTilde.a[i]);
        nd.oB = wInv * (t.cB[i].transpose() * eb + t.cD[i].transpose() * p * t.sigma.b[i] + t.rhoTilde.b[i]);
        nd.bA = t.b.a[i];
        nd.bB = t.b.b[i];
        nd.sA = t.sigma.a[i];
        nd.sB = t.sigma.b[i];
    }

    ForwardEnsemble e;
    e.grid = grid;
    e.W.resize(static_cast<std::size_t>(paths));
    e.X.resize(static_cast<std::size_t>(paths));
    e.v.resize(static_cast<std::size_t>(paths));
    parallel_blocks(paths, opt.workers, [&](unsigned, long begin, long end) {
        std::vector<double> dw(static_cast<std::size_t>(N));
        Vector x(spec.n), vv(spec.m), drift(spec.n), diff(spec.n);
        for (long p = begin; p < end; ++p)
        {
            brownian.increments(p, dw);
            Vector W(N + 1);
            Matrix X(spec.n, N + 1), V(spec.m, N + 1);
            x = spec.x0;
            double w = 0.0;
            for (int k = 0; k <= N; ++k)
            {
                const auto &nd = plan[static_cast<std::size_t>(k)];
                W(k) = w;
                vv.noalias() = -nd.K * x;
                vv -= nd.oA + nd.oB * w;
                X.col(k) = x;
                V.col(k) = vv;
                if (k == N)
                    break;
                const double dwk = dw[static_cast<std::size_t>(k)];
                drift.noalias() = nd.Fx * x;
                drift.noalias() -= nd.B * (nd.oA + nd.oB * w);
                drift += nd.bA + nd.bB * w;
                diff.noalias() = nd.Gx * x;
                diff.noalias() -= nd.D * (nd.oA + nd.oB * w);
                diff += nd.sA + nd.sB * w;
                x += drift * dt + diff * dwk;
                if (!x.allFinite())
                    throw SimulationError("closed-loop state is not finite", p, k + 1);
                w += dwk;
            }
            const auto pi = static_cast<std::size_t>(p);
            e.W[pi] = std::move(W);
            e.X[pi] = std::move(X);
            e.v[pi] = std::move(V);
        }
    });
    return e;
}

} // namespace bslq
