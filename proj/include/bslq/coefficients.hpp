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

// Problem coefficients tabulated on a Lattice, so that right-hand sides and
// simulators look up samples by index instead of re-interpolating paths.

#pragma once

#include "bslq/ode.hpp"
#include "bslq/problem.hpp"

namespace bslq
{

/// Smallest eigenvalue accepted for matrices that must be positive definite.
inline constexpr double kPositivityTol = 1e-10;

/// Samples of an affine process: value = a + b W.
struct AffineSamples
{
    std::vector<Vector> a;
    std::vector<Vector> b;

    Vector value(std::size_t i, double w) const { return a[i] + b[i] * w; }
};

inline std::vector<Matrix> sample(const MatrixPath &p, const Lattice &lattice)
{
    std::vector<Matrix> out(lattice.points());
    if (p.kind() == PathKind::constant)
    {
        std::fill(out.begin(), out.end(), p.samples().front());
        return out;
    }
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = p.at(lattice.time(i));
    return out;
}

inline AffineSamples sample(const AffineProcess &p, const Lattice &lattice)
{
    AffineSamples s;
    const auto a = sample(p.a, lattice);
    const auto b = sample(p.b, lattice);
    s.a.assign(a.begin(), a.end());
    s.b.assign(b.begin(), b.end());
    return s;
}

/// Backward-problem coefficients on every lattice point.
struct CoefficientTable
{
    Lattice lattice;
    std::vector<Matrix> A, B, C, Q, S1, S2, R11, R12, R21, R22, R22inv;
    AffineSamples f, q, rho1, rho2;

    /// With `invert_r22` the table also holds R22^{-1} and rejects R22 that
    /// is not positive definite.
    static CoefficientTable build(const ProblemSpec &spec, const Lattice &lattice, bool invert_r22 = true)
    {
        CoefficientTable t;
        t.lattice = lattice;
        t.A = sample(spec.A, lattice);
        t.B = sample(spec.B, lattice);
        t.C = sample(spec.C, lattice);
        t.Q = sample(spec.Q, lattice);
        t.S1 = sample(spec.S1, lattice);
        t.S2 = sample(spec.S2, lattice);
        t.R11 = sample(spec.R11, lattice);
        t.R12 = sample(spec.R12, lattice);
        t.R21 = sample(spec.R21, lattice);
        t.R22 = sample(spec.R22, lattice);
        t.f = sample(spec.f, lattice);
        t.q = sample(spec.q, lattice);
        t.rho1 = sample(spec.rho1, lattice);
        t.rho2 = sample(spec.rho2, lattice);
        if (!invert_r22)
            return t;
        t.R22inv.resize(t.R22.size());
        for (std::size_t i = 0; i < t.R22.size(); ++i)
        {
            const int node = lattice.node_of(i);
            if (min_sym_eigenvalue(t.R22[i]) < kPositivityTol)
                throw PositivityError("R22 is not positive definite", node);
            t.R22inv[i] = checked_inverse(t.R22[i], "R22 at node " + std::to_string(node)).inverse;
        }
        return t;
    }
};

/// Forward-problem coefficients on every lattice point.
struct ForwardCoefficientTable
{
    Lattice lattice;
    std::vector<Matrix> cA, cB, cC, cD, cQ, cS, cR;
    AffineSamples b, sigma, qTilde, rhoTilde;

    static ForwardCoefficientTable build(const ForwardProblemSpec &spec, const Lattice &lattice)
    {
        ForwardCoefficientTable t;
        t.lattice = lattice;
        t.cA = sample(spec.cA, lattice);
        t.cB = sample(spec.cB, lattice);
        t.cC = sample(spec.cC, lattice);
        t.cD = sample(spec.cD, lattice);
        t.cQ = sample(spec.cQ, lattice);
        t.cS = sample(spec.cS, lattice);
        t.cR = sample(spec.cR, lattice);
        t.b = sample(spec.b, lattice);
        t.sigma = sample(spec.sigma, lattice);
        t.qTilde = sample(spec.qTilde, lattice);
        t.rhoTilde = sample(spec.rhoTilde, lattice);
        return t;
    }
};

} // namespace bslq
