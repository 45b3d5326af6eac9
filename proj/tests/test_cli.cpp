// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright 2026 The stackevo Authors

#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include <fmt/format.h>

#include "stackevo/cli.hpp"
#include "stackevo/ensembles.hpp"
#include "stackevo/data.hpp"
#include "test_util.hpp"

using namespace stackevo;
namespace t = stackevo::testing;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args)
{
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return { code, out.str(), err.str() };
}

std::string value_of(const std::string& text, const std::string& key)
{
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) {
        if (line.starts_with(key)) return line.substr(line.find_last_of(", ") + 1);
    }
    return {};
}

std::string synth(const std::filesystem::path& dir, const std::string& rows, const std::string& seed = "3")
{
    const auto path = (dir / ("d" + rows + "_" + seed + ".csv")).string();
    EXPECT_EQ(run({ "synth", "-n", rows, "--noise", "0.3", "--seed", seed, "-o", path }).code, kExitOk);
    return path;
}

} // namespace

TEST(Cli, Registry)
{
    const auto r = run({ "registry" });
    ASSERT_EQ(r.code, kExitOk);
    std::istringstream in(r.out);
    std::vector<std::string> lines;
    for (std::string l; std::getline(in, l);) lines.push_back(l);
    ASSERT_EQ(lines.size(), 104u);
    EXPECT_EQ(lines[0], "  1  mean");
}

TEST(Cli, SynthIsReproducibleAndLoadable)
{
    const auto dir = t::scratch_dir("cli_synth");
    const auto a = synth(dir, "120");
    const auto b = (dir / "copy.csv").string();
    ASSERT_EQ(run({ "synth", "-n", "120", "--noise", "0.3", "--seed", "3", "-o", b }).code, kExitOk);
    EXPECT_EQ(t::slurp(a), t::slurp(b));
    EXPECT_NE(t::slurp(a).find("# seed = 3"), std::string::npos);
    const auto d = load_csv(a, "y");
    EXPECT_EQ(d.rows(), 120u);
    EXPECT_EQ(run({ "synth", "-g", "cubic", "-o", b }).code, kExitUsage);
}

TEST(Cli, EvalMeanHasUnitMeanCmp)
{
    const auto dir = t::scratch_dir("cli_eval");
    const auto data = synth(dir, "200");
    const auto r = run({ "eval", "-i", data, "-s", "mean", "-o", (dir / "out").string() });
    ASSERT_EQ(r.code, kExitOk) << r.err;
    const auto report = t::slurp(dir / "out" / "eval_report.txt");
    EXPECT_EQ(value_of(report, "mean_cmp,"), "1.00");
    EXPECT_NE(report.find("# seed = 20150801"), std::string::npos);
}

TEST(Cli, EvalBundledHandTunedBeatsMean)
{
    const auto dir = t::scratch_dir("cli_hand");
    const auto spec = (t::source_dir() / "data" / "hand_tuned.spec").string();
    for (const char* seed : { "1", "2", "3", "4", "5" }) {
        const auto data = synth(dir, "200", seed);
        const auto out = (dir / seed).string();
        const auto r = run({ "eval", "-i", data, "-s", spec, "--seed", seed, "-o", out });
        ASSERT_EQ(r.code, kExitOk) << r.err;
        const auto report = t::slurp(std::filesystem::path(out) / "eval_report.txt");
        EXPECT_LT(std::stod(value_of(report, "pooled,")), std::stod(value_of(report, "mean_reference,")));
    }
}

TEST(Cli, MissingInputNamesPath)
{
    const auto r = run({ "eval", "-i", "/nonexistent/data.csv", "-s", "mean", "-o", "/tmp/x" });
    EXPECT_EQ(r.code, kExitData);
    EXPECT_NE(r.err.find("/nonexistent/data.csv"), std::string::npos) << r.err;
    EXPECT_NE(r.err.find("load data"), std::string::npos) << r.err;
}

TEST(Cli, UsageErrors)
{
    EXPECT_EQ(run({}).code, kExitUsage);
    EXPECT_EQ(run({ "frobnicate" }).code, kExitUsage);
    EXPECT_EQ(run({ "eval", "-s", "mean" }).code, kExitUsage);
    EXPECT_EQ(run({ "eval", "-i", "x.csv", "-s", "svm-linear", "-o", "/tmp/x" }).code, kExitUsage);
    EXPECT_EQ(run({ "--help" }).code, kExitOk);
}

TEST(Cli, TrainPredictReproducesInSample)
{
    const auto dir = t::scratch_dir("cli_train");
    const auto data = synth(dir, "150");
    const auto model = (dir / "m.model").string();
    auto r = run({ "train", "-i", data, "-s", "bagnn-t3-max30-eps0.001-h4", "-o", model });
    ASSERT_EQ(r.code, kExitOk) << r.err;
    EXPECT_EQ(t::slurp(model).rfind("stackevo-model 1", 0), 0u);

    // Features only: drop the target column.
    const auto d = load_csv(data, "y");
    const auto features = (dir / "x.csv").string();
    {
        std::ofstream out(features);
        for (std::size_t j = 0; j < d.cols(); ++j) out << (j ? "," : "") << d.feature_names()[j];
        out << '\n';
        for (std::size_t i = 0; i < d.rows(); ++i) {
            for (std::size_t j = 0; j < d.cols(); ++j) out << (j ? "," : "") << fmt::format("{:.17g}", d.row(i)[j]);
            out << '\n';
        }
    }
    const auto pred = (dir / "p.csv").string();
    r = run({ "predict", "-m", model, "-i", features, "-o", pred });
    ASSERT_EQ(r.code, kExitOk) << r.err;

    // Same seed, same spec, same data: the in-memory model is identical.
    Rng rng(kDefaultSeed);
    const auto expected = train(make_spec(LearnerSpec::parse("bagnn-t3-max30-eps0.001-h4")), d, rng);
    std::ifstream in(pred);
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.starts_with('#') || line == "prediction") continue;
        EXPECT_EQ(std::stod(line), expected->predict(d.row(row))) << row;
        ++row;
    }
    EXPECT_EQ(row, d.rows());

    // Training file has one extra column.
    r = run({ "predict", "-m", model, "-i", data, "-o", pred });
    EXPECT_EQ(r.code, kExitData);
    EXPECT_NE(r.err.find("expects 8 features"), std::string::npos) << r.err;
    EXPECT_NE(r.err.find("has 9"), std::string::npos) << r.err;
}

TEST(Cli, EvolveWritesArtifacts)
{
    const auto dir = t::scratch_dir("cli_evolve");
    const auto data = synth(dir, "120");
    const auto hand = (t::source_dir() / "data" / "hand_tuned.spec").string();
    std::vector<std::string> args { "evolve", "-i", data, "-S", "4", "-E", "1", "--iterations", "3",
                                    "--size-limit", "3", "--fitness-folds", "3", "--seed-genome",
                                    "l2=2;folds=2;members=1+3", "-o", (dir / "a").string() };
    auto r = run(args);
    ASSERT_EQ(r.code, kExitOk) << r.err;
    const auto trace = t::slurp(dir / "a" / "trace.csv");
    EXPECT_EQ(std::count(trace.begin(), trace.end(), '\n'), 4);
    EXPECT_EQ(trace.rfind("iteration,best_rmse,mean_rmse,best_genome\n", 0), 0u);
    EXPECT_NE(t::slurp(dir / "a" / "run_config.txt").find("seed = 20150801"), std::string::npos);
    EXPECT_NE(t::slurp(dir / "a" / "best_genome.txt").find("stacking folds="), std::string::npos);

    args.back() = (dir / "b").string();
    args.insert(args.begin() + 1, { "--jobs", "3" });
    r = run(args);
    ASSERT_EQ(r.code, kExitOk) << r.err;
    EXPECT_EQ(t::slurp(dir / "b" / "trace.csv"), trace);
    EXPECT_EQ(t::slurp(dir / "b" / "best_genome.txt"), t::slurp(dir / "a" / "best_genome.txt"));

    r = run({ "evolve", "-i", data, "-S", "4", "--seed-genome", hand, "--size-limit", "2", "--iterations", "1",
              "-o", (dir / "c").string() });
    EXPECT_EQ(r.code, kExitOk) << r.err;
    r = run({ "evolve", "-i", data, "--pm-m", "2", "-o", (dir / "d").string() });
    EXPECT_EQ(r.code, kExitUsage);
}
