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

// Brute-force reference: the problem discretized on a binomial tree with
// increments +-sqrt(dt) (probability 1/2 each) and solved exactly as a
// finite-dimensional quadratic program.
//
// Per non-terminal node, with children values Y+ and Y-,
//
//   Z = (Y+ - Y-) / (2 sqrt(dt)),
//   (I + A dt) Y = (Y+ + Y-) / 2 - (B u + C Z + f) dt,
//
// and the leaves carry xi evaluated at the leaf's W(T). Every (Y, Z) is an
// affine function of the controls in its subtree, so the cost is an
// explicit quadratic in the stacked controls.
//
// Nodes are numbered in depth-first preorder: node j at level k owns a
// contiguous block of 2^(N-k) - 1 indices (itself and its descendants);
// its children are j + 1 and j + 1 + (2^(N-k-1) - 1).
//
// The quadratic is assembled in the normalized coordinates
// w_j = sqrt(p_j dt) u_j (p_j = 2^-k the node probability), in which the
// control-energy norm E sum |u|^2 dt is the Euclidean norm, so the smallest
// Hessian eigenvalue approximates the uniform-convexity constant.

#pragma once

#include "bslq/evaluation.hpp"

namespace bslq
{

inline constexpr int kOracleMaxSteps = 12;
inline constexpr int kOracleMaxDim = 3;
inline constexpr long kOracleMaxVariables = 4096;
/// Eigenvalue threshold below which the discrete problem is nonconvex.
inline constexpr double kOracleConvexityTol = 1e-9;

enum class OracleStatus
{
    ok,
    nonconvex,
    nonunique
};

inline const char *to_string(OracleStatus s)
{
    switch (s)
    {
    case OracleStatus::ok:
        return "ok";
    case OracleStatus::nonconvex:
        return "discrete problem nonconvex";
    case OracleStatus::nonunique:
        return "non-unique optimum";
    }
    return "?";
}

/// One non-terminal tree node (depth-first preorder).
struct OracleNode
{
    int level = 0;
    double w = 0.0;
    double probability = 1.0;
    Vector u, Y, Z;
};

struct DiscreteSolution
{
    int steps = 0;
    OracleStatus status = OracleStatus::ok;
    /// Optimal cost; NaN unless status == ok.
    double value = std::numeric_limits<double>::quiet_NaN();
    /// Normalized-coordinate quadratic J = w'Hw + 2h'w + c.
    Matrix hessian;
    Vector linear;
    double constant = 0.0;
    double min_eigenvalue = 0.0;
    /// |2 (H w + h)| at the reported optimum.
    double gradient_norm = 0.0;
    /// Cost of the optimal controls recomputed by direct recursion.
    double replay_value = std::numeric_limits<double>::quiet_NaN();
    /// Controls in physical units, stacked by node.
    Vector u;
    std::vector<OracleNode> nodes;
};

namespace detail
{

struct AffineMap
{
    Vector c; // offset
    Matrix L; // n x (m * subtree size), columns aligned to the subtree block
};

class TreeAssembler
{
public:
    TreeAssembler(const ProblemSpec &spec, int steps)
        : spec_(spec), N_(steps), n_(spec.n), m_(spec.m), dt_(spec.grid.T / steps), sq_(std::sqrt(dt_))
    {
        const long controls = (1L << N_) - 1;
        vars_ = static_cast<Eigen::Index>(controls * m_);
        H_ = Matrix::Zero(vars_, vars_);
        h_ = Vector::Zero(vars_);
        level_.resize(static_cast<std::size_t>(N_));
        for (int k = 0; k < N_; ++k)
        {
            const double t = spec.grid.T * k / N_;
            auto &L = level_[static_cast<std::size_t>(k)];
            L.A = spec.A.at(t);
            L.B = spec.B.at(t);
            L.C = spec.C.at(t);
            L.Minv = checked_inverse(Matrix::Identity(n_, n_) + L.A * dt_, "oracle I + A dt").inverse;
            L.weight.resize(2 * n_ + m_, 2 * n_ + m_);
            L.weight << spec.Q.at(t), spec.S1.at(t).transpose(), spec.S2.at(t).transpose(), spec.S1.at(t),
                spec.R11.at(t), spec.R12.at(t), spec.S2.at(t), spec.R21.at(t), spec.R22.at(t);
            L.f = {spec.f.a.at(t), spec.f.b.at(t)};
            L.l = {stack(spec.q.a.at(t), spec.rho1.a.at(t), spec.rho2.a.at(t)),
                   stack(spec.q.b.at(t), spec.rho1.b.at(t), spec.rho2.b.at(t))};
        }
        xiA_ = spec.xi_mean();
        xiB_ = spec.xi_loading();
    }

    static long subtree(int steps, int level) { return (1L << (steps - level)) - 1; }

    void assemble()
    {
        const AffineMap y0 = node(0, 0, 0.0);
        // initial terms <G Y0, Y0> + 2 <g, Y0>; the root map spans all controls
        H_ += y0.L.transpose() * spec_.G * y0.L;
        h_ += y0.L.transpose() * (spec_.G * y0.c + spec_.g);
        c_ += y0.c.dot(spec_.G * y0.c) + 2.0 * spec_.g.dot(y0.c);
    }

    Eigen::Index variables() const { return vars_; }
    const Matrix &H() const { return H_; }
    const Vector &h() const { return h_; }
    double c() const { return c_; }

    /// sqrt(p dt) for every stacked variable.
    Vector scaling() const
    {
        Vector s(vars_);
        fill_scaling(0, 0, s);
        return s;
    }

    /// Direct recursion for given controls; returns the cost and fills nodes.
    double replay(const Vector &u, std::vector<OracleNode> &nodes) const
    {
        nodes.assign(static_cast<std::size_t>((1L << N_) - 1), OracleNode{});
        double running = 0.0;
        const Vector y0 = replay_node(0, 0, 0.0, 1.0, u, nodes, running);
        return y0.dot(spec_.G * y0) + 2.0 * spec_.g.dot(y0) + running;
    }

private:
    struct Level
    {
        Matrix A, B, C, Minv, weight;
        std::pair<Vector, Vector> f, l;
    };

    static Vector stack(const Vector &a, const Vector &b, const Vector &c)
    {
        Vector s(a.size() + b.size() + c.size());
        s << a, b, c;
        return s;
    }

    void fill_scaling(int level, long j, Vector &s) const
    {
        if (level == N_)
            return;
        const double p = std::ldexp(1.0, -level);
        s.segment(j * m_, m_).setConstant(std::sqrt(p * dt_));
        const long child = subtree(N_, level + 1);
        fill_scaling(level + 1, j + 1, s);
        fill_scaling(level + 1, j + 1 + child, s);
    }

    /// Affine map of Y at node j (level k, Brownian value w) over the
    /// node's subtree block; assembles the node's running cost.
    AffineMap node(int k, long j, double w)
    {
        if (k == N_)
            return {xiA_ + xiB_ * w, Matrix(n_, 0)};
        const long child = subtree(N_, k + 1);
        const AffineMap up = node(k + 1, j + 1, w + sq_);
        const AffineMap dn = node(k + 1, j + 1 + child, w - sq_);
        const auto &L = level_[static_cast<std::size_t>(k)];
        const Eigen::Index width = m_ * (1 + 2 * child);
        const Eigen::Index cw = m_ * child;

        AffineMap Z;
        Z.c = (up.c - dn.c) / (2.0 * sq_);
        Z.L = Matrix::Zero(n_, width);
        Z.L.middleCols(m_, cw) = up.L / (2.0 * sq_);
        Z.L.middleCols(m_ + cw, cw) = -dn.L / (2.0 * sq_);

        AffineMap Y;
        const Vector fk = L.f.first + L.f.second * w;
        Y.c = L.Minv * (0.5 * (up.c + dn.c) - (L.C * Z.c + fk) * dt_);
        Matrix rhs = -L.C * Z.L * dt_;
        rhs.leftCols(m_) -= L.B * dt_;
        rhs.middleCols(m_, cw) += 0.5 * up.L;
        rhs.middleCols(m_ + cw, cw) += 0.5 * dn.L;
        Y.L = L.Minv * rhs;

        // running cost p dt [z'Wz + 2 l'z], z = (Y, Z, u_j)
        const Eigen::Index d = 2 * n_ + m_;
        Vector zc(d);
        zc << Y.c, Z.c, Vector::Zero(m_);
        Matrix zL(d, width);
        zL.topRows(n_) = Y.L;
        zL.middleRows(n_, n_) = Z.L;
        zL.bottomRows(m_).setZero();
        zL.bottomRows(m_).leftCols(m_).setIdentity();
        const Vector lk = L.l.first + L.l.second * w;
        const double scale = std::ldexp(1.0, -k) * dt_;
        const Eigen::Index offset = j * m_;
        const Matrix WzL = L.weight * zL;
        H_.block(offset, offset, width, width).noalias() += scale * (zL.transpose() * WzL);
        h_.segment(offset, width).noalias() += scale * (zL.transpose() * (L.weight * zc + lk));
        c_ += scale * (zc.dot(L.weight * zc) + 2.0 * lk.dot(zc));
        return Y;
    }

    Vector replay_node(int k, long j, double w, double p, const Vector &u, std::vector<OracleNode> &nodes,
                       double &running) const
    {
        if (k == N_)
            return xiA_ + xiB_ * w;
        const long child = subtree(N_, k + 1);
        const Vector yu = replay_node(k + 1, j + 1, w + sq_, 0.5 * p, u, nodes, running);
        const Vector yd = replay_node(k + 1, j + 1 + child, w - sq_, 0.5 * p, u, nodes, running);
        const auto &L = level_[static_cast<std::size_t>(k)];
        const Vector uj = u.segment(j * m_, m_);
        const Vector z = (yu - yd) / (2.0 * sq_);
        const Vector fk = L.f.first + L.f.second * w;
        const Vector y = L.Minv * (0.5 * (yu + yd) - (L.B * uj + L.C * z + fk) * dt_);
        Vector zz(2 * n_ + m_);
        zz << y, z, uj;
        const Vector lk = L.l.first + L.l.second * w;
        running += p * dt_ * (zz.dot(L.weight * zz) + 2.0 * lk.dot(zz));
        auto &nd = nodes[static_cast<std::size_t>(j)];
        nd.level = k;
        nd.w = w;
        nd.probability = p;
        nd.u = uj;
        nd.Y = y;
        nd.Z = z;
        return y;
    }

    const ProblemSpec &spec_;
    int N_;
    Eigen::Index n_, m_;
    double dt_, sq_;
    Eigen::Index vars_ = 0;
    Matrix H_;
    Vector h_;
    double c_ = 0.0;
    std::vector<Level> level_;
    Vector xiA_, xiB_;
};

} // namespace detail

/// Smallest step count the oracle accepts for this problem.
inline int oracle_min_steps(const ProblemSpec &spec)
{
    const double bound = spec.grid.T * (2.0 * spec.A.bound() + spec.C.bound() + 1.0);
    return static_cast<int>(std::ceil(bound));
}

/// Solves the tree-discretized problem with `steps` levels.
inline DiscreteSolution solve_discrete(const ProblemSpec &spec, int steps)
{
    if (auto report = validate(spec); !report.ok())
        throw ValidationError(std::move(report));
    if (steps < 1 || steps > kOracleMaxSteps)
        throw Error("oracle: steps must be in [1, " + std::to_string(kOracleMaxSteps) + "]");
    if (spec.n > kOracleMaxDim || spec.m > kOracleMaxDim)
        throw Error("oracle: dimensions above " + std::to_string(kOracleMaxDim) + " are not supported");
    if (static_cast<long>(spec.m) * ((1L << steps) - 1) > kOracleMaxVariables)
        throw Error("oracle: more than " + std::to_string(kOracleMaxVariables) + " control variables");
    if (steps < oracle_min_steps(spec))
        throw Error("oracle: step count below T (2|A| + |C| + 1) = " + std::to_string(oracle_min_steps(spec)));

    detail::TreeAssembler tree(spec, steps);
    tree.assemble();
    const Vector s = tree.scaling();
    const Vector sInv = s.cwiseInverse();

    DiscreteSolution sol;
    sol.steps = steps;
    sol.hessian = symmetrized(sInv.asDiagonal() * tree.H() * sInv.asDiagonal());
    sol.linear = sInv.asDiagonal() * tree.h();
    sol.constant = tree.c();

    Eigen::SelfAdjointEigenSolver<Matrix> es(sol.hessian, Eigen::EigenvaluesOnly);
    sol.min_eigenvalue = es.eigenvalues().minCoeff();
    if (sol.min_eigenvalue < -kOracleConvexityTol)
    {
        sol.status = OracleStatus::nonconvex;
        return sol;
    }
    if (sol.min_eigenvalue <= kOracleConvexityTol)
    {
        sol.status = OracleStatus::nonunique;
        return sol;
    }

    Eigen::LLT<Matrix> llt(sol.hessian);
    if (llt.info() != Eigen::Success)
    {
        sol.status = OracleStatus::nonunique;
        return sol;
    }
    Vector w = llt.solve(-sol.linear);
    // one step of iterative refinement
    w += llt.solve(-(sol.hessian * w + sol.linear));
    sol.gradient_norm = (2.0 * (sol.hessian * w + sol.linear)).norm();
    sol.value = w.dot(sol.hessian * w) + 2.0 * sol.linear.dot(w) + sol.constant;
    sol.u = sInv.asDiagonal() * w;
    sol.replay_value = tree.replay(sol.u, sol.nodes);
    return sol;
}

/// Cost of arbitrary stacked controls by direct recursion.
inline double discrete_cost(const ProblemSpec &spec, int steps, const Vector &u)
{
    detail::TreeAssembler tree(spec, steps);
    std::vector<OracleNode> nodes;
    return tree.replay(u, nodes);
}

struct OracleComparison
{
    std::vector<int> steps;
    std::vector<double> values;
    std::vector<double> gaps;
    double extrapolated = std::numeric_limits<double>::quiet_NaN();
    double extrapolated_gap = std::numeric_limits<double>::quiet_NaN();
    /// Gaps non-increasing in N (up to kRoundoffFloor).
    bool monotone = true;
};

/// Oracle values against a reference value; Richardson extrapolation in
/// dt from the two finest levels assuming first-order weak error.
inline OracleComparison compare(double reference, std::span<const DiscreteSolution> runs, double T)
{
    OracleComparison c;
    for (const auto &r : runs)
    {
        c.steps.push_back(r.steps);
        c.values.push_back(r.value);
        c.gaps.push_back(std::abs(r.value - reference));
    }
    const double floor = kRoundoffFloor * (1.0 + std::abs(reference));
    for (std::size_t i = 1; i < c.gaps.size(); ++i)
        if (c.gaps[i] > c.gaps[i - 1] + floor)
            c.monotone = false;
    if (runs.size() >= 2)
    {
        const auto &a = runs[runs.size() - 2];
        const auto &b = runs[runs.size() - 1];
        const double d1 = T / a.steps, d2 = T / b.steps;
        c.extrapolated = (d1 * b.value - d2 * a.value) / (d1 - d2);
        c.extrapolated_gap = std::abs(c.extrapolated - reference);
    }
    return c;
}

} // namespace bslq
