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

// Problem data for the backward LQ problem
//
//   dY = (A Y + B u + C Z + f) dt + Z dW,   Y(T) = xi,
//   J  = E{ <G Y(0), Y(0)> + 2 <g, Y(0)>
//          + int_0^T <W (Y,Z,u), (Y,Z,u)> + 2 <(q, rho1, rho2), (Y,Z,u)> dt },
//
// with W = [[Q, S1', S2'], [S1, R11, R12], [S2, R21, R22]], and for the
// forward LQ problem used by the closed-loop branch.

#pragma once

#include "bslq/paths.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <sstream>

namespace bslq
{

/// Absolute tolerance for symmetry of user data.
inline constexpr double kSymmetryTol = 1e-12;

struct ProblemSpec
{
    int n = 1;
    int m = 1;
    TimeGrid grid;

    MatrixPath A, B, C;
    AffineProcess f;
    Matrix G;
    Vector g;
    MatrixPath Q, S1, S2, R11, R12, R21, R22;
    AffineProcess q, rho1, rho2;
    AffineProcess xi; // evaluated at T

    /// All-zero problem of the given dimensions (R22 = I, B = 0).
    static ProblemSpec zeros(int n, int m, TimeGrid grid)
    {
        ProblemSpec s;
        s.n = n;
        s.m = m;
        s.grid = grid;
        s.A = MatrixPath::zero(n, n);
        s.B = MatrixPath::zero(n, m);
        s.C = MatrixPath::zero(n, n);
        s.f = AffineProcess::zero(n);
        s.G = Matrix::Zero(n, n);
        s.g = Vector::Zero(n);
        s.Q = MatrixPath::zero(n, n);
        s.S1 = MatrixPath::zero(n, n);
        s.S2 = MatrixPath::zero(m, n);
        s.R11 = MatrixPath::zero(n, n);
        s.R12 = MatrixPath::zero(n, m);
        s.R21 = MatrixPath::zero(m, n);
        s.R22 = MatrixPath::constant(Matrix::Identity(m, m));
        s.q = AffineProcess::zero(n);
        s.rho1 = AffineProcess::zero(n);
        s.rho2 = AffineProcess::zero(m);
        s.xi = AffineProcess::zero(n);
        return s;
    }

    /// The homogeneous problem: f, g, q, rho1, rho2 vanish and xi = 0.
    ProblemSpec homogeneous() const
    {
        ProblemSpec s = *this;
        s.f = AffineProcess::zero(n);
        s.g = Vector::Zero(n);
        s.q = AffineProcess::zero(n);
        s.rho1 = AffineProcess::zero(n);
        s.rho2 = AffineProcess::zero(m);
        s.xi = AffineProcess::zero(n);
        return s;
    }

    Vector xi_mean() const { return xi.a.at(grid.T); }
    Vector xi_loading() const { return xi.b.at(grid.T); }

    /// max over samples of the largest entry of A, B, C.
    double coefficient_bound() const { return std::max({A.bound(), B.bound(), C.bound()}); }

    bool operator==(const ProblemSpec &) const = default;
};

struct ForwardProblemSpec
{
    int n = 1;
    int m = 1;
    TimeGrid grid;

    MatrixPath cA, cB, cC, cD;
    AffineProcess b, sigma;
    Matrix cG;
    Vector gTilde;
    MatrixPath cQ, cS, cR;
    AffineProcess qTilde, rhoTilde;
    Vector x0;

    static ForwardProblemSpec zeros(int n, int m, TimeGrid grid)
    {
        ForwardProblemSpec s;
        s.n = n;
        s.m = m;
        s.grid = grid;
        s.cA = MatrixPath::zero(n, n);
        s.cB = MatrixPath::zero(n, m);
        s.cC = MatrixPath::zero(n, n);
        s.cD = MatrixPath::zero(n, m);
        s.b = AffineProcess::zero(n);
        s.sigma = AffineProcess::zero(n);
        s.cG = Matrix::Zero(n, n);
        s.gTilde = Vector::Zero(n);
        s.cQ = MatrixPath::zero(n, n);
        s.cS = MatrixPath::zero(m, n);
        s.cR = MatrixPath::constant(Matrix::Identity(m, m));
        s.qTilde = AffineProcess::zero(n);
        s.rhoTilde = AffineProcess::zero(m);
        s.x0 = Vector::Zero(n);
        return s;
    }

    bool operator==(const ForwardProblemSpec &) const = default;
};

struct Violation
{
    std::string field;
    double time = 0.0;
    std::string message;
};

/// Every violation found by validate(); empty means the data is admissible.
struct ValidationReport
{
    std::vector<Violation> violations;

    bool ok() const noexcept { return violations.empty(); }
    std::size_t size() const noexcept { return violations.size(); }

    std::string to_string() const
    {
        std::ostringstream os;
        for (const auto &v : violations)
            os << v.field << ": " << v.message << "\n";
        return os.str();
    }
};

class ValidationError : public Error
{
public:
    explicit ValidationError(ValidationReport report)
        : Error("scenario failed validation:\n" + report.to_string()), report_(std::move(report)) {}
    const ValidationReport &report() const noexcept { return report_; }

private:
    ValidationReport report_;
};

namespace detail
{

inline std::string time_label(double t)
{
    std::ostringstream os;
    os << "t=" << t;
    return os.str();
}

inline std::vector<double> union_times(const MatrixPath &a, const MatrixPath &b)
{
    std::set<double> s(a.times().begin(), a.times().end());
    s.insert(b.times().begin(), b.times().end());
    return {s.begin(), s.end()};
}

inline void check_path(ValidationReport &r, const std::string &name, const MatrixPath &p, Eigen::Index rows,
                       Eigen::Index cols)
{
    if (p.rows() != rows || p.cols() != cols)
    {
        std::ostringstream os;
        os << "dimension " << p.rows() << "x" << p.cols() << ", expected " << rows << "x" << cols;
        r.violations.push_back({name, 0.0, os.str()});
        return;
    }
    for (std::size_t i = 0; i < p.samples().size(); ++i)
        if (!p.samples()[i].allFinite())
            r.violations.push_back({name, p.times()[i], "non-finite sample at " + time_label(p.times()[i])});
}

inline void check_symmetric(ValidationReport &r, const std::string &name, const MatrixPath &p)
{
    if (p.rows() != p.cols())
        return;
    for (std::size_t i = 0; i < p.samples().size(); ++i)
    {
        const Matrix &s = p.samples()[i];
        if (!s.allFinite())
            continue;
        if (sup_norm(s - s.transpose()) > kSymmetryTol)
            r.violations.push_back({name, p.times()[i], name + " not symmetric at " + time_label(p.times()[i])});
    }
}

/// R12(t) = R21(t)' at the union of both sample sets.
inline void check_transpose_pair(ValidationReport &r, const std::string &lhs, const MatrixPath &a,
                                 const std::string &rhs, const MatrixPath &b)
{
    if (a.rows() != b.cols() || a.cols() != b.rows())
        return;
    for (double t : union_times(a, b))
    {
        const Matrix x = a.at(t), y = b.at(t);
        if (!x.allFinite() || !y.allFinite())
            continue;
        if (sup_norm(x - y.transpose()) > kSymmetryTol)
            r.violations.push_back({lhs, t, lhs + " ≠ " + rhs + "⊤ at " + time_label(t)});
    }
}

inline void check_constant(ValidationReport &r, const std::string &name, const Matrix &m, Eigen::Index rows,
                           Eigen::Index cols)
{
    if (m.rows() != rows || m.cols() != cols)
    {
        std::ostringstream os;
        os << "dimension " << m.rows() << "x" << m.cols() << ", expected " << rows << "x" << cols;
        r.violations.push_back({name, 0.0, os.str()});
        return;
    }
    if (!m.allFinite())
        r.violations.push_back({name, 0.0, "non-finite sample"});
}

inline void check_affine(ValidationReport &r, const std::string &name, const AffineProcess &p, Eigen::Index dim)
{
    check_path(r, name + ".a", p.a, dim, 1);
    check_path(r, name + ".b", p.b, dim, 1);
}

} // namespace detail

/// Dimension, finiteness and symmetry checks. Pure: violations are data.
inline ValidationReport validate(const ProblemSpec &s)
{
    using namespace detail;
    ValidationReport r;
    const Eigen::Index n = s.n, m = s.m;
    if (n <= 0 || m <= 0)
    {
        r.violations.push_back({"n/m", 0.0, "dimensions must be positive"});
        return r;
    }
    check_path(r, "A", s.A, n, n);
    check_path(r, "B", s.B, n, m);
    check_path(r, "C", s.C, n, n);
    check_affine(r, "f", s.f, n);
    check_constant(r, "G", s.G, n, n);
    if (s.g.size() != n)
        r.violations.push_back({"g", 0.0, "dimension mismatch"});
    else if (!s.g.allFinite())
        r.violations.push_back({"g", 0.0, "non-finite sample"});
    check_path(r, "Q", s.Q, n, n);
    check_path(r, "S1", s.S1, n, n);
    check_path(r, "S2", s.S2, m, n);
    check_path(r, "R11", s.R11, n, n);
    check_path(r, "R12", s.R12, n, m);
    check_path(r, "R21", s.R21, m, n);
    check_path(r, "R22", s.R22, m, m);
    check_affine(r, "q", s.q, n);
    check_affine(r, "rho1", s.rho1, n);
    check_affine(r, "rho2", s.rho2, m);
    check_affine(r, "xi", s.xi, n);

    if (s.G.rows() == n && s.G.cols() == n && s.G.allFinite() && sup_norm(s.G - s.G.transpose()) > kSymmetryTol)
        r.violations.push_back({"G", 0.0, "G not symmetric"});
    check_symmetric(r, "Q", s.Q);
    check_symmetric(r, "R11", s.R11);
    check_symmetric(r, "R22", s.R22);
    check_transpose_pair(r, "R12", s.R12, "R21", s.R21);
    return r;
}

inline ValidationReport validate(const ForwardProblemSpec &s)
{
    using namespace detail;
    ValidationReport r;
    const Eigen::Index n = s.n, m = s.m;
    if (n <= 0 || m <= 0)
    {
        r.violations.push_back({"n/m", 0.0, "dimensions must be positive"});
        return r;
    }
    check_path(r, "cA", s.cA, n, n);
    check_path(r, "cB", s.cB, n, m);
    check_path(r, "cC", s.cC, n, n);
    check_path(r, "cD", s.cD, n, m);
    check_affine(r, "b", s.b, n);
    check_affine(r, "sigma", s.sigma, n);
    check_constant(r, "cG", s.cG, n, n);
    if (s.gTilde.size() != n)
        r.violations.push_back({"gTilde", 0.0, "dimension mismatch"});
    check_path(r, "cQ", s.cQ, n, n);
    check_path(r, "cS", s.cS, m, n);
    check_path(r, "cR", s.cR, m, m);
    check_affine(r, "qTilde", s.qTilde, n);
    check_affine(r, "rhoTilde", s.rhoTilde, m);
    if (s.x0.size() != n)
        r.violations.push_back({"x0", 0.0, "dimension mismatch"});

    if (s.cG.rows() == n && s.cG.cols() == n && s.cG.allFinite() && sup_norm(s.cG - s.cG.transpose()) > kSymmetryTol)
        r.violations.push_back({"cG", 0.0, "cG not symmetric"});
    check_symmetric(r, "cQ", s.cQ);
    check_symmetric(r, "cR", s.cR);
    return r;
}

// ---------------------------------------------------------------------------
// Built-in scalar benchmarks (n = m = 1, T = 1, B = 1, R22 = 1, all other
// data zero unless listed).

namespace detail
{

inline void collect_breakpoints(std::vector<double> &out, const MatrixPath &p, double T)
{
    if (p.kind() == PathKind::constant)
        return;
    for (double t : p.times())
        if (t > 0.0 && t < T)
            out.push_back(t);
}

inline void collect_breakpoints(std::vector<double> &out, const AffineProcess &p, double T)
{
    collect_breakpoints(out, p.a, T);
    collect_breakpoints(out, p.b, T);
}

inline std::vector<double> sorted_unique(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

} // namespace detail

/// Interior sample times of the sampled coefficients: the points where the
/// data (and hence the solutions' higher derivatives) may have kinks.
inline std::vector<double> breakpoints(const ProblemSpec &s)
{
    std::vector<double> out;
    const double T = s.grid.T;
    for (const MatrixPath *p : {&s.A, &s.B, &s.C, &s.Q, &s.S1, &s.S2, &s.R11, &s.R12, &s.R21, &s.R22})
        detail::collect_breakpoints(out, *p, T);
    for (const AffineProcess *p : {&s.f, &s.q, &s.rho1, &s.rho2})
        detail::collect_breakpoints(out, *p, T);
    return detail::sorted_unique(std::move(out));
}

inline std::vector<double> breakpoints(const ForwardProblemSpec &s)
{
    std::vector<double> out;
    const double T = s.grid.T;
    for (const MatrixPath *p : {&s.cA, &s.cB, &s.cC, &s.cD, &s.cQ, &s.cS, &s.cR})
        detail::collect_breakpoints(out, *p, T);
    for (const AffineProcess *p : {&s.b, &s.sigma, &s.qTilde, &s.rhoTilde})
        detail::collect_breakpoints(out, *p, T);
    return detail::sorted_unique(std::move(out));
}

namespace benchmarks
{

inline ProblemSpec scalar_base(int steps)
{
    ProblemSpec s = ProblemSpec::zeros(1, 1, TimeGrid(1.0, steps));
    s.B = MatrixPath::scalar(1.0);
    return s;
}

inline AffineProcess terminal_constant(double c) { return AffineProcess::constant(Vector::Constant(1, c), Vector::Zero(1)); }
inline AffineProcess terminal_brownian() { return AffineProcess::constant(Vector::Zero(1), Vector::Constant(1, 1.0)); }

/// xi = 0.
inline ProblemSpec S1(int steps = 200) { return scalar_base(steps); }

/// g = 1, xi = c.
inline ProblemSpec S2(double c = 1.0, int steps = 200)
{
    auto s = scalar_base(steps);
    s.g = Vector::Constant(1, 1.0);
    s.xi = terminal_constant(c);
    return s;
}

/// R11 = 1, xi = W(T).
inline ProblemSpec S4(int steps = 200)
{
    auto s = scalar_base(steps);
    s.R11 = MatrixPath::scalar(1.0);
    s.xi = terminal_brownian();
    return s;
}

/// R11 = -1/2, xi = W(T): indefinite weight, convex functional.
inline ProblemSpec S5(int steps = 200)
{
    auto s = scalar_base(steps);
    s.R11 = MatrixPath::scalar(-0.5);
    s.xi = terminal_brownian();
    return s;
}

/// R11 = 1, R12 = R21 = 1/2, xi = W(T): cross term in (Z, u).
inline ProblemSpec SX(int steps = 200)
{
    auto s = scalar_base(steps);
    s.R11 = MatrixPath::scalar(1.0);
    s.R12 = MatrixPath::scalar(0.5);
    s.R21 = MatrixPath::scalar(0.5);
    s.xi = terminal_brownian();
    return s;
}

/// Q = 1, xi = c.
inline ProblemSpec SH(double c = 1.0, int steps = 200)
{
    auto s = scalar_base(steps);
    s.Q = MatrixPath::scalar(1.0);
    s.xi = terminal_constant(c);
    return s;
}

/// Forward fixture: B = 1, R = 1, G = 1, everything else zero, x = 1.
inline ForwardProblemSpec SF(double x = 1.0, int steps = 200)
{
    auto s = ForwardProblemSpec::zeros(1, 1, TimeGrid(1.0, steps));
    s.cB = MatrixPath::scalar(1.0);
    s.cR = MatrixPath::scalar(1.0);
    s.cG = Matrix::Constant(1, 1, 1.0);
    s.x0 = Vector::Constant(1, x);
    return s;
}

inline const std::vector<std::string> &names()
{
    static const std::vector<std::string> all{"S1", "S2", "S4", "S5", "SX", "SH", "SF"};
    return all;
}

} // namespace benchmarks

} // namespace bslq
