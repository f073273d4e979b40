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

// Scenario files (JSON) and the named built-in benchmarks.
//
// Document layout:
//
//   {"kind": "backward" | "forward", "n": 1, "m": 1, "T": 1.0, "steps": 200,
//    "<coefficient>": <path>, "<process>": {"a": <path>, "b": <path>}, ...}
//
// A <path> is a number (s * I for square shapes, or a 1x1/1-vector), a
// nested row-major array (constant matrix; vectors may be flat), or
// {"t": [...], "values": [...], "interpolation": "linear" | "left"}
// for sampled paths (linear is the default). A process given as a bare
// <path> is deterministic. Unknown keys are rejected; R22 (backward) and
// R (forward) are required, every other coefficient defaults to zero.
//
// Built-ins are addressed as "builtin:NAME" with optional parameters,
// e.g. "builtin:S2:c=2" or "builtin:SF:x=0.5".

#pragma once

#include "bslq/problem.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <variant>

namespace bslq
{

using Scenario = std::variant<ProblemSpec, ForwardProblemSpec>;

namespace detail
{

using json = nlohmann::json;

inline const std::vector<std::string> &backward_keys()
{
    static const std::vector<std::string> k{"kind", "n", "m", "T", "steps", "A", "B", "C", "f", "G", "g", "Q",
                                            "S1", "S2", "R11", "R12", "R21", "R22", "q", "rho1", "rho2", "xi"};
    return k;
}

inline const std::vector<std::string> &forward_keys()
{
    static const std::vector<std::string> k{"kind", "n", "m", "T", "steps", "A", "B", "C", "D", "b", "sigma",
                                            "G", "g", "Q", "S", "R", "q", "rho", "x0"};
    return k;
}

inline ScenarioError field_error(const std::string &field, const std::string &what)
{
    return ScenarioError("scenario field \"" + field + "\": " + what);
}

inline double number(const json &j, const std::string &field)
{
    if (!j.is_number())
        throw field_error(field, "expected a number");
    return j.get<double>();
}

inline Matrix parse_matrix(const json &j, const std::string &field, Eigen::Index rows, Eigen::Index cols)
{
    if (j.is_number())
    {
        const double v = j.get<double>();
        if (rows == cols)
            return v * Matrix::Identity(rows, cols);
        if (rows * cols == 1)
            return Matrix::Constant(1, 1, v);
        throw field_error(field, "a scalar is only accepted for square or 1x1 shapes");
    }
    if (!j.is_array())
        throw field_error(field, "expected a number or an array");
    Matrix m(rows, cols);
    // flat arrays are accepted for vectors
    if (cols == 1 && !j.empty() && j.front().is_number())
    {
        if (static_cast<Eigen::Index>(j.size()) != rows)
            throw field_error(field, "expected " + std::to_string(rows) + " entries");
        for (Eigen::Index r = 0; r < rows; ++r)
            m(r, 0) = number(j[static_cast<std::size_t>(r)], field);
        return m;
    }
    if (static_cast<Eigen::Index>(j.size()) != rows)
        throw field_error(field, "expected " + std::to_string(rows) + " rows");
    for (Eigen::Index r = 0; r < rows; ++r)
    {
        const json &row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
            throw field_error(field, "expected rows of " + std::to_string(cols) + " entries");
        for (Eigen::Index c = 0; c < cols; ++c)
            m(r, c) = number(row[static_cast<std::size_t>(c)], field);
    }
    return m;
}

inline MatrixPath parse_path(const json &j, const std::string &field, Eigen::Index rows, Eigen::Index cols)
{
    if (!j.is_object())
        return MatrixPath::constant(parse_matrix(j, field, rows, cols));
    for (const auto &[key, _] : j.items())
        if (key != "t" && key != "values" && key != "interpolation")
            throw field_error(field, "unknown key \"" + key + "\"");
    if (!j.contains("t") || !j.contains("values"))
        throw field_error(field, "sampled paths need \"t\" and \"values\"");
    const json &t = j.at("t");
    const json &v = j.at("values");
    if (!t.is_array() || !v.is_array() || t.size() != v.size() || t.empty())
        throw field_error(field, "\"t\" and \"values\" must be non-empty arrays of equal length");
    std::vector<double> times;
    std::vector<Matrix> samples;
    for (std::size_t i = 0; i < t.size(); ++i)
    {
        times.push_back(number(t[i], field));
        samples.push_back(parse_matrix(v[i], field, rows, cols));
    }
    const std::string interp = j.value("interpolation", std::string("linear"));
    try
    {
        if (interp == "linear")
            return MatrixPath::grid_sampled(std::move(times), std::move(samples));
        if (interp == "left")
            return MatrixPath::piecewise_constant(std::move(times), std::move(samples));
    }
    catch (const Error &e)
    {
        throw field_error(field, e.what());
    }
    throw field_error(field, "interpolation must be \"linear\" or \"left\"");
}

inline AffineProcess parse_process(const json &j, const std::string &field, Eigen::Index dim)
{
    if (j.is_object() && (j.contains("a") || j.contains("b")))
    {
        for (const auto &[key, _] : j.items())
            if (key != "a" && key != "b")
                throw field_error(field, "unknown key \"" + key + "\"");
        AffineProcess p = AffineProcess::zero(dim);
        if (j.contains("a"))
            p.a = parse_path(j.at("a"), field + ".a", dim, 1);
        if (j.contains("b"))
            p.b = parse_path(j.at("b"), field + ".b", dim, 1);
        return p;
    }
    return AffineProcess::deterministic(parse_path(j, field, dim, 1));
}

inline json matrix_json(const Matrix &m)
{
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r)
    {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline json path_json(const MatrixPath &p)
{
    if (p.kind() == PathKind::constant)
        return matrix_json(p.samples().front());
    json values = json::array();
    for (const auto &s : p.samples())
        values.push_back(matrix_json(s));
    return {{"t", p.times()},
            {"values", std::move(values)},
            {"interpolation", p.kind() == PathKind::piecewise_constant ? "left" : "linear"}};
}

inline json process_json(const AffineProcess &p) { return {{"a", path_json(p.a)}, {"b", path_json(p.b)}}; }

inline void check_keys(const json &doc, const std::vector<std::string> &allowed)
{
    for (const auto &[key, _] : doc.items())
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw ScenarioError("scenario: unknown key \"" + key + "\"");
}

inline const json &required(const json &doc, const std::string &key)
{
    if (!doc.contains(key))
        throw field_error(key, "missing required field");
    return doc.at(key);
}

inline int positive_int(const json &doc, const std::string &key)
{
    const json &j = required(doc, key);
    if (!j.is_number_integer() || j.get<long>() <= 0)
        throw field_error(key, "expected a positive integer");
    return j.get<int>();
}

inline ProblemSpec parse_backward(const json &doc, int n, int m, TimeGrid grid)
{
    check_keys(doc, backward_keys());
    ProblemSpec s = ProblemSpec::zeros(n, m, grid);
    const auto path = [&](const char *key, MatrixPath &out, Eigen::Index r, Eigen::Index c) {
        if (doc.contains(key))
            out = parse_path(doc.at(key), key, r, c);
    };
    const auto process = [&](const char *key, AffineProcess &out, Eigen::Index dim) {
        if (doc.contains(key))
            out = parse_process(doc.at(key), key, dim);
    };
    path("A", s.A, n, n);
    path("B", s.B, n, m);
    path("C", s.C, n, n);
    process("f", s.f, n);
    if (doc.contains("G"))
        s.G = parse_matrix(doc.at("G"), "G", n, n);
    if (doc.contains("g"))
        s.g = parse_matrix(doc.at("g"), "g", n, 1);
    path("Q", s.Q, n, n);
    path("S1", s.S1, n, n);
    path("S2", s.S2, m, n);
    path("R11", s.R11, n, n);
    path("R12", s.R12, n, m);
    path("R21", s.R21, m, n);
    s.R22 = parse_path(required(doc, "R22"), "R22", m, m);
    process("q", s.q, n);
    process("rho1", s.rho1, n);
    process("rho2", s.rho2, m);
    process("xi", s.xi, n);
    return s;
}

inline ForwardProblemSpec parse_forward(const json &doc, int n, int m, TimeGrid grid)
{
    check_keys(doc, forward_keys());
    ForwardProblemSpec s = ForwardProblemSpec::zeros(n, m, grid);
    const auto path = [&](const char *key, MatrixPath &out, Eigen::Index r, Eigen::Index c) {
        if (doc.contains(key))
            out = parse_path(doc.at(key), key, r, c);
    };
    const auto process = [&](const char *key, AffineProcess &out, Eigen::Index dim) {
        if (doc.contains(key))
            out = parse_process(doc.at(key), key, dim);
    };
    path("A", s.cA, n, n);
    path("B", s.cB, n, m);
    path("C", s.cC, n, n);
    path("D", s.cD, n, m);
    process("b", s.b, n);
    process("sigma", s.sigma, n);
    if (doc.contains("G"))
        s.cG = parse_matrix(doc.at("G"), "G", n, n);
    if (doc.contains("g"))
        s.gTilde = parse_matrix(doc.at("g"), "g", n, 1);
    path("Q", s.cQ, n, n);
    path("S", s.cS, m, n);
    s.cR = parse_path(required(doc, "R"), "R", m, m);
    process("q", s.qTilde, n);
    process("rho", s.rhoTilde, m);
    if (doc.contains("x0"))
        s.x0 = parse_matrix(doc.at("x0"), "x0", n, 1);
    return s;
}

template <class Spec>
Spec checked(Spec s)
{
    if (auto report = validate(s); !report.ok())
        throw ValidationError(std::move(report));
    return s;
}

/// "builtin:NAME[:key=value,...]"
inline Scenario builtin_scenario(const std::string &ref)
{
    std::string rest = ref.substr(std::string("builtin:").size());
    std::string name = rest, params;
    if (const auto colon = rest.find(':'); colon != std::string::npos)
    {
        name = rest.substr(0, colon);
        params = rest.substr(colon + 1);
    }
    std::map<std::string, double> values;
    std::stringstream ss(params);
    for (std::string item; std::getline(ss, item, ',');)
    {
        const auto eq = item.find('=');
        if (eq == std::string::npos)
            throw ScenarioError("builtin parameter \"" + item + "\" is not key=value");
        try
        {
            values[item.substr(0, eq)] = std::stod(item.substr(eq + 1));
        }
        catch (const std::exception &)
        {
            throw ScenarioError("builtin parameter \"" + item + "\" has a non-numeric value");
        }
    }
    const auto param = [&](const std::string &key, double fallback) {
        auto it = values.find(key);
        if (it == values.end())
            return fallback;
        const double v = it->second;
        values.erase(it);
        return v;
    };
    Scenario out;
    if (name == "S1")
        out = benchmarks::S1();
    else if (name == "S2")
        out = benchmarks::S2(param("c", 1.0));
    else if (name == "S4")
        out = benchmarks::S4();
    else if (name == "S5")
        out = benchmarks::S5();
    else if (name == "SX")
        out = benchmarks::SX();
    else if (name == "SH")
        out = benchmarks::SH(param("c", 1.0));
    else if (name == "SF")
        out = benchmarks::SF(param("x", 1.0));
    else
        throw ScenarioError("unknown builtin scenario \"" + name + "\"");
    if (!values.empty())
        throw ScenarioError("builtin " + name + " has no parameter \"" + values.begin()->first + "\"");
    return out;
}

} // namespace detail

/// Parses a scenario document (JSON text).
inline Scenario parse_scenario(const std::string &text)
{
    detail::json doc;
    try
    {
        doc = detail::json::parse(text);
    }
    catch (const detail::json::parse_error &e)
    {
        throw ScenarioError(std::string("scenario parse error: ") + e.what());
    }
    if (!doc.is_object())
        throw ScenarioError("scenario: top level must be an object");
    const auto &kind = detail::required(doc, "kind");
    const int n = detail::positive_int(doc, "n");
    const int m = detail::positive_int(doc, "m");
    const double T = detail::number(detail::required(doc, "T"), "T");
    if (!(T > 0.0) || !std::isfinite(T))
        throw detail::field_error("T", "must be positive and finite");
    const int steps = detail::positive_int(doc, "steps");
    const TimeGrid grid(T, steps);
    if (kind == "backward")
        return detail::checked(detail::parse_backward(doc, n, m, grid));
    if (kind == "forward")
        return detail::checked(detail::parse_forward(doc, n, m, grid));
    throw detail::field_error("kind", "must be \"backward\" or \"forward\"");
}

/// Loads a scenario file or resolves a "builtin:..." reference.
inline Scenario load_scenario(const std::string &ref)
{
    if (ref.rfind("builtin:", 0) == 0)
        return detail::builtin_scenario(ref);
    std::ifstream in(ref);
    if (!in)
        throw ScenarioError("cannot open scenario file \"" + ref + "\"");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

inline std::string to_json(const ProblemSpec &s)
{
    using detail::matrix_json, detail::path_json, detail::process_json;
    detail::json doc = {{"kind", "backward"},
                        {"n", s.n},
                        {"m", s.m},
                        {"T", s.grid.T},
                        {"steps", s.grid.steps},
                        {"A", path_json(s.A)},
                        {"B", path_json(s.B)},
                        {"C", path_json(s.C)},
                        {"f", process_json(s.f)},
                        {"G", matrix_json(s.G)},
                        {"g", matrix_json(s.g)},
                        {"Q", path_json(s.Q)},
                        {"S1", path_json(s.S1)},
                        {"S2", path_json(s.S2)},
                        {"R11", path_json(s.R11)},
                        {"R12", path_json(s.R12)},
                        {"R21", path_json(s.R21)},
                        {"R22", path_json(s.R22)},
                        {"q", process_json(s.q)},
                        {"rho1", process_json(s.rho1)},
                        {"rho2", process_json(s.rho2)},
                        {"xi", process_json(s.xi)}};
    return doc.dump(2) + "\n";
}

inline std::string to_json(const ForwardProblemSpec &s)
{
    using detail::matrix_json, detail::path_json, detail::process_json;
    detail::json doc = {{"kind", "forward"},
                        {"n", s.n},
                        {"m", s.m},
                        {"T", s.grid.T},
                        {"steps", s.grid.steps},
                        {"A", path_json(s.cA)},
                        {"B", path_json(s.cB)},
                        {"C", path_json(s.cC)},
                        {"D", path_json(s.cD)},
                        {"b", process_json(s.b)},
                        {"sigma", process_json(s.sigma)},
                        {"G", matrix_json(s.cG)},
                        {"g", matrix_json(s.gTilde)},
                        {"Q", path_json(s.cQ)},
                        {"S", path_json(s.cS)},
                        {"R", path_json(s.cR)},
                        {"q", process_json(s.qTilde)},
                        {"rho", process_json(s.rhoTilde)},
                        {"x0", matrix_json(s.x0)}};
    return doc.dump(2) + "\n";
}

inline std::string to_json(const Scenario &s)
{
    return std::visit([](const auto &spec) { return to_json(spec); }, s);
}

inline void save_scenario(const Scenario &s, const std::string &file)
{
    std::ofstream out(file, std::ios::binary);
    if (!out)
        throw ScenarioError("cannot write scenario file \"" + file + "\"");
    out << to_json(s);
}

/// The step count of a scenario's grid replaced (coefficients untouched).
inline Scenario with_steps(Scenario s, int steps)
{
    std::visit([&](auto &spec) { spec.grid = TimeGrid(spec.grid.T, steps); }, s);
    return s;
}

} // namespace bslq
