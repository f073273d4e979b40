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

#include "bslq/cli.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace bslq
{
namespace
{

namespace fs = std::filesystem;

struct Invocation
{
    int code = -1;
    std::string out, err;
};

Invocation invoke(std::vector<std::string> args)
{
    args.insert(args.begin(), "bslq");
    std::vector<const char *> argv;
    for (const auto &a : args)
        argv.push_back(a.c_str());
    std::ostringstream os, err;
    Invocation r;
    r.code = main_entry(static_cast<int>(argv.size()), argv.data(), os, err);
    r.out = os.str();
    r.err = err.str();
    return r;
}

fs::path scratch(const std::string &name)
{
    const auto dir = fs::temp_directory_path() / "bslq_cli_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path &file)
{
    std::ifstream in(file, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

TEST(Cli, DefaultsMatchTheDocumentedValues)
{
    const RunConfig c;
    EXPECT_EQ(c.paths, 10000);
    EXPECT_EQ(c.steps, 200);
    EXPECT_EQ(c.substeps, 4);
    EXPECT_EQ(c.seed, 42u);
}

TEST(Cli, OracleOnZeroDataReportsZero)
{
    const auto dir = scratch("oracle");
    const auto r = invoke({"oracle", "builtin:S1", "--steps", "4", "--out", dir.string()});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    EXPECT_NE(r.out.find("value              0\n"), std::string::npos) << r.out;
    EXPECT_TRUE(fs::exists(dir / "oracle.csv"));
}

TEST(Cli, SimulateIsBitwiseReproducible)
{
    const auto a = scratch("sim_a"), b = scratch("sim_b");
    for (const auto &dir : {a, b})
    {
        const auto r = invoke({"simulate", "builtin:S4", "--paths", "100", "--steps", "50", "--seed", "7", "--out",
                               dir.string(), "--per-path"});
        ASSERT_EQ(r.code, kExitOk) << r.err;
    }
    EXPECT_EQ(slurp(a / "summary.csv"), slurp(b / "summary.csv"));
    EXPECT_EQ(slurp(a / "paths.csv"), slurp(b / "paths.csv"));
    EXPECT_FALSE(slurp(a / "summary.csv").empty());

    const auto c = scratch("sim_c");
    ASSERT_EQ(invoke({"simulate", "builtin:S4", "--paths", "100", "--steps", "50", "--seed", "7", "--workers", "3",
                      "--out", c.string()})
                  .code,
              kExitOk);
    EXPECT_EQ(slurp(a / "summary.csv"), slurp(c / "summary.csv"));
}

TEST(Cli, VerifyPassesOnDeterministicBenchmark)
{
    const auto dir = scratch("verify");
    const auto r = invoke({"verify", "builtin:S2", "--seed", "42", "--paths", "2000", "--out", dir.string()});
    EXPECT_EQ(r.code, kExitOk) << r.out << r.err;
    EXPECT_TRUE(fs::exists(dir / "verify.csv"));
}

TEST(Cli, SolveAndReduceWriteFiles)
{
    const auto dir = scratch("solve");
    ASSERT_EQ(invoke({"solve", "builtin:SX", "--out", dir.string()}).code, kExitOk);
    for (const char *f : {"sigma.csv", "H.csv", "phi_a.csv", "phi_b.csv"})
        EXPECT_TRUE(fs::exists(dir / f)) << f;
    ASSERT_EQ(invoke({"reduce", "builtin:SX", "--out", dir.string()}).code, kExitOk);
    const auto reduced = load_scenario((dir / "reduced.json").string());
    ASSERT_TRUE(std::holds_alternative<ProblemSpec>(reduced));
    EXPECT_TRUE(is_reduced_form(std::get<ProblemSpec>(reduced)));

    const auto fwd = scratch("solve_forward");
    ASSERT_EQ(invoke({"solve", "builtin:SF", "--out", fwd.string()}).code, kExitOk);
    EXPECT_TRUE(fs::exists(fwd / "P.csv"));
}

TEST(Cli, CsvRecordsAreCrlfTerminated)
{
    const auto dir = scratch("value");
    ASSERT_EQ(invoke({"value", "builtin:SF", "--paths", "50", "--out", dir.string()}).code, kExitOk);
    const auto text = slurp(dir / "value.csv");
    EXPECT_EQ(text.substr(0, 16), "quantity,value\r\n");
}

TEST(Cli, UsageErrorsExitTwo)
{
    EXPECT_EQ(invoke({"simulate", "builtin:S4", "--bogus"}).code, kExitUsage);
    EXPECT_EQ(invoke({"frobnicate"}).code, kExitUsage);
    EXPECT_EQ(invoke({"simulate", "builtin:S9"}).code, kExitUsage);
    EXPECT_EQ(invoke({"simulate", "/nonexistent/file.json"}).code, kExitUsage);
    EXPECT_EQ(invoke({"oracle", "builtin:S1", "--steps", "13"}).code, kExitUsage);
    EXPECT_EQ(invoke({"simulate", "builtin:S4", "--paths", "abc"}).code, kExitUsage);
}

TEST(Cli, ContractViolationsExitOne)
{
    const auto dir = scratch("contract");
    const auto file = dir / "bad.json";
    std::ofstream(file) << R"({"kind":"backward","n":1,"m":1,"T":1,"steps":20,"B":1,"R22":-1})";
    const auto r = invoke({"solve", file.string(), "--out", dir.string()});
    EXPECT_EQ(r.code, kExitContract) << r.err;
    EXPECT_FALSE(r.err.empty());
    EXPECT_EQ(invoke({"oracle", file.string(), "--steps", "4", "--out", dir.string()}).code, kExitContract);
}

TEST(Cli, HelpExitsZero)
{
    EXPECT_EQ(invoke({"--help"}).code, kExitOk);
}

} // namespace
} // namespace bslq
