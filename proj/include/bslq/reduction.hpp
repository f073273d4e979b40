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

// Transformation of a general problem into the reduced form
// G = 0, Q = 0, R12 = R21' = 0.
//
// Step 1 removes the (Z, u) cross weight with v = u + R22^-1 R21 Z:
//
//   scriptC   = C - B R22^-1 R21,
//   scriptS1  = S1 - R12 R22^-1 S2,
//   scriptR11 = R11 - R12 R22^-1 R21,
//   rho1      -> rho1 - R12 R22^-1 rho2      (the linear term 2<rho2, u>
//                                            produces a Z-term under v).
//
// Step 2 absorbs G and Q with the solution H of H' + HA + A'H + Q = 0,
// H(0) = -G, applying Ito's formula to <H Y, Y>:
//
//   S1H = scriptS1 + scriptC' H,  S2H = S2 + B' H,  R11H = scriptR11 + H,
//   qH  = q + H f,
//
// and J_original(u) = J_reduced(v) - E<H(T) xi, xi>.

#pragma once

#include "bslq/riccati.hpp"

namespace bslq
{

struct ReducedProblem
{
    ProblemSpec source;
    /// Problem in reduced form, solved by the Riccati construction.
    ProblemSpec base;
    Lattice lattice;
    /// True when the source already has G = 0, Q = 0, R12 = R21 = 0; the
    /// base is then a copy of the source and H vanishes identically.
    bool identity = false;
    HSolution h;

    MatrixPath scriptC, scriptS1, scriptR11, S1H, S2H, R11H;
    AffineProcess qH, rho1R;
    /// E<H(T) xi, xi>.
    double constantShift = 0.0;

    /// Base coefficients on the lattice.
    CoefficientTable table;
    /// R22^-1 R21 of the source on the lattice.
    std::vector<Matrix> crossGain;
};

inline bool is_reduced_form(const ProblemSpec &spec)
{
    return spec.G.isZero(0.0) && spec.Q.is_zero() && spec.R12.is_zero() && spec.R21.is_zero();
}

namespace detail
{

inline MatrixPath lattice_path(const Lattice &lattice, std::vector<Matrix> samples)
{
    return MatrixPath::grid_sampled(lattice.times(), std::move(samples));
}

inline AffineProcess lattice_affine(const Lattice &lattice, const std::vector<Vector> &a, const std::vector<Vector> &b)
{
    return {lattice_path(lattice, {a.begin(), a.end()}), lattice_path(lattice, {b.begin(), b.end()})};
}

} // namespace detail

/// Builds the reduced problem. Throws PositivityError when R22 is not
/// positive definite at some lattice point.
inline ReducedProblem reduce(const ProblemSpec &spec, int substeps = 4)
{
    if (auto report = validate(spec); !report.ok())
        throw ValidationError(std::move(report));

    ReducedProblem r;
    r.source = spec;
    r.lattice = Lattice(spec.grid, substeps);
    const Lattice &lat = r.lattice;
    const CoefficientTable src = CoefficientTable::build(spec, lat);
    const std::size_t points = lat.points();

    r.crossGain.resize(points);
    for (std::size_t i = 0; i < points; ++i)
        r.crossGain[i] = src.R22inv[i] * src.R21[i];

    r.identity = is_reduced_form(spec);
    if (r.identity)
    {
        r.base = spec;
        const auto n = static_cast<Eigen::Index>(spec.n);
        r.h.H = StatePath{lat, std::vector<Matrix>(points, Matrix::Zero(n, n))};
        r.scriptC = spec.C;
        r.scriptS1 = spec.S1;
        r.scriptR11 = spec.R11;
        r.S1H = spec.S1;
        r.S2H = spec.S2;
        r.R11H = spec.R11;
        r.qH = spec.q;
        r.rho1R = spec.rho1;
        r.constantShift = 0.0;
        r.table = src;
        return r;
    }

    r.h = solve_h(spec, lat);

    std::vector<Matrix> sC(points), sS1(points), sR11(points), s1h(points), s2h(points), r11h(points);
    std::vector<Vector> qa(points), qb(points), r1a(points), r1b(points);
    for (std::size_t i = 0; i < points; ++i)
    {
        const Matrix &H = r.h.H.values[i];
        const Matrix r12r22inv = src.R12[i] * src.R22inv[i];
        sC[i] = src.C[i] - src.B[i] * r.crossGain[i];
        sS1[i] = src.S1[i] - r12r22inv * src.S2[i];
        sR11[i] = symmetrized(src.R11[i] - r12r22inv * src.R21[i]);
        s1h[i] = sS1[i] + sC[i].transpose() * H;
        s2h[i] = src.S2[i] + src.B[i].transpose() * H;
        r11h[i] = symmetrized(sR11[i] + H);
        qa[i] = src.q.a[i] + H * src.f.a[i];
        qb[i] = src.q.b[i] + H * src.f.b[i];
        r1a[i] = src.rho1.a[i] - r12r22inv * src.rho2.a[i];
        r1b[i] = src.rho1.b[i] - r12r22inv * src.rho2.b[i];
    }
    r.scriptC = detail::lattice_path(lat, sC);
    r.scriptS1 = detail::lattice_path(lat, sS1);
    r.scriptR11 = detail::lattice_path(lat, sR11);
    r.S1H = detail::lattice_path(lat, s1h);
    r.S2H = detail::lattice_path(lat, s2h);
    r.R11H = detail::lattice_path(lat, r11h);
    r.qH = detail::lattice_affine(lat, qa, qb);
    r.rho1R = detail::lattice_affine(lat, r1a, r1b);

    const Matrix &HT = r.h.terminal();
    const Vector aT = spec.xi_mean(), bT = spec.xi_loading();
    r.constantShift = aT.dot(HT * aT) + spec.grid.T * bT.dot(HT * bT);

    ProblemSpec &b = r.base;
    b = ProblemSpec::zeros(spec.n, spec.m, spec.grid);
    b.A = spec.A;
    b.B = spec.B;
    b.C = r.scriptC;
    b.f = spec.f;
    b.g = spec.g;
    b.S1 = r.S1H;
    b.S2 = r.S2H;
    b.R11 = r.R11H;
    b.R22 = spec.R22;
    b.q = r.qH;
    b.rho1 = r.rho1R;
    b.rho2 = spec.rho2;
    b.xi = spec.xi;
    r.table = CoefficientTable::build(b, lat);
    return r;
}

/// Original control from the reduced one at lattice point `point`:
/// u = v - R22^-1 R21 Z.
inline Vector map_control(const ReducedProblem &r, std::size_t point, const Vector &v, const Vector &Z)
{
    if (v.size() != r.source.m || Z.size() != r.source.n)
        throw Error("map_control: shape mismatch");
    return v - r.crossGain[point] * Z;
}

/// Reduced control from the original one: v = u + R22^-1 R21 Z.
inline Vector unmap_control(const ReducedProblem &r, std::size_t point, const Vector &u, const Vector &Z)
{
    if (u.size() != r.source.m || Z.size() != r.source.n)
        throw Error("unmap_control: shape mismatch");
    return u + r.crossGain[point] * Z;
}

/// Riccati solution of the reduced problem.
inline RiccatiSolution solve_sigma(const ReducedProblem &r) { return solve_sigma(r.table); }

} // namespace bslq
