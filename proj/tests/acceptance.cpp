// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright 2026 The stackevo Authors

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails. Pass criterion numbers as arguments to run a
// subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "stackevo/cli.hpp"
#include "stackevo/eval.hpp"
#include "stackevo/evolve.hpp"
#include "stackevo/models.hpp"
#include "stackevo/spec_file.hpp"

using namespace stackevo;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

// Share of rows the GA fitness sees in criterion 4.
constexpr double kFitnessFraction = 0.1;

double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

Dataset random_dataset(std::size_t n, std::size_t p, Rng& rng)
{
    Matrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
    Vector y(static_cast<Eigen::Index>(n));
    for (auto& v : x.reshaped()) v = uniform_real(rng, -1.0, 1.0);
    for (auto& v : y) v = uniform_real(rng, -3.0, 3.0);
    return Dataset(std::move(x), std::move(y));
}

// ---- 1: learner oracles

double knn_oracle(const Dataset& d, std::span<const double> q, std::size_t k, double alpha, Metric m)
{
    std::vector<std::pair<double, std::size_t>> all;
    for (std::size_t i = 0; i < d.rows(); ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < d.cols(); ++j) {
            const double diff = q[j] - d.row(i)[j];
            acc += m == Metric::Manhattan ? std::abs(diff) : diff * diff;
        }
        all.emplace_back(m == Metric::Manhattan ? acc : std::sqrt(acc), i);
    }
    std::sort(all.begin(), all.end());
    all.resize(k);
    if (all.front().first == 0.0) {
        double s = 0.0;
        int c = 0;
        for (const auto& [dist, i] : all) {
            if (dist == 0.0) {
                s += d.target(i);
                ++c;
            }
        }
        return s / c;
    }
    // log-space weights
    double top = -std::numeric_limits<double>::infinity();
    for (const auto& [dist, i] : all) top = std::max(top, -alpha * std::log(dist));
    double num = 0.0, den = 0.0;
    for (const auto& [dist, i] : all) {
        const double w = std::exp(-alpha * std::log(dist) - top);
        num += w * d.target(i);
        den += w;
    }
    return num / den;
}

double node_sse(const Vector& y, const std::vector<std::size_t>& rows)
{
    double m = 0.0;
    for (auto r : rows) m += y[static_cast<Eigen::Index>(r)];
    m /= static_cast<double>(rows.size());
    double s = 0.0;
    for (auto r : rows) s += std::pow(y[static_cast<Eigen::Index>(r)] - m, 2);
    return s;
}

Outcome criterion1()
{
    const auto start = Clock::now();
    Rng rng(101);
    double knn_err = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const auto n = 1 + uniform_index(rng, 50);
        const auto p = 1 + uniform_index(rng, 5);
        auto d = random_dataset(n, p, rng);
        const auto k = 1 + uniform_index(rng, n);
        const double alpha = trial % 3 == 0 ? 20.0 : uniform_real(rng, 0.0, 4.0);
        const Metric m = trial % 2 ? Metric::Manhattan : Metric::Euclidean;
        const auto model = train_knn(d, static_cast<int>(k), alpha, m);
        std::vector<double> q(p);
        for (auto& v : q) v = uniform_real(rng, -1.0, 1.0);
        if (trial % 7 == 0) std::copy(d.row(n / 2).begin(), d.row(n / 2).end(), q.begin());
        knn_err = std::max(knn_err, std::abs(model->predict(q) - knn_oracle(d, q, k, alpha, m)));
    }

    int split_mismatch = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const auto n = 2 + uniform_index(rng, 19);
        const auto p = 1 + uniform_index(rng, 4);
        auto d = random_dataset(n, p, rng);
        const int min_leaf = 1 + static_cast<int>(uniform_index(rng, 3));
        std::vector<std::size_t> rows(n);
        std::iota(rows.begin(), rows.end(), 0);
        std::vector<int> features(p);
        std::iota(features.begin(), features.end(), 0);
        std::optional<double> best;
        for (std::size_t f = 0; f < p; ++f) {
            std::vector<double> vals;
            for (auto r : rows) vals.push_back(d.row(r)[f]);
            std::sort(vals.begin(), vals.end());
            vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
            for (std::size_t v = 0; v + 1 < vals.size(); ++v) {
                const double thr = 0.5 * (vals[v] + vals[v + 1]);
                std::vector<std::size_t> l, r;
                for (auto row : rows) (d.row(row)[f] <= thr ? l : r).push_back(row);
                if (l.size() < static_cast<std::size_t>(min_leaf) || r.size() < static_cast<std::size_t>(min_leaf)) {
                    continue;
                }
                const double s = node_sse(d.targets(), l) + node_sse(d.targets(), r);
                if (!best || s < *best) best = s;
            }
        }
        const auto split = find_best_split(d.features(), d.targets(), rows, features, min_leaf);
        if (split.has_value() != best.has_value() || (best && std::abs(split->sse - *best) > 1e-9)) {
            ++split_mismatch;
        }
    }

    double pls_err = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const auto p = 1 + uniform_index(rng, 6);
        const auto n = p + 3 + uniform_index(rng, 60);
        auto d = random_dataset(n, p, rng);
        const auto model = train_pls(d, static_cast<int>(p));
        Eigen::MatrixXd a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p + 1));
        a.col(0).setOnes();
        a.rightCols(static_cast<Eigen::Index>(p)) = d.features();
        const Eigen::VectorXd beta = (a.transpose() * a).ldlt().solve(a.transpose() * d.targets());
        for (int q = 0; q < 5; ++q) {
            std::vector<double> x(p);
            double expect = beta[0];
            for (std::size_t j = 0; j < p; ++j) {
                x[j] = uniform_real(rng, -1.0, 1.0);
                expect += beta[static_cast<Eigen::Index>(j + 1)] * x[j];
            }
            pls_err = std::max(pls_err, std::abs(model->predict(x) - expect));
        }
    }
    const double t = seconds_since(start);
    return { knn_err <= 1e-10 && split_mismatch == 0 && pls_err <= 1e-6 && t < 60.0,
             fmt::format("knn max|err| {:.2e} (200 cases), split mismatches {}/200, PLS vs OLS max|err| {:.2e}, {:.1f} s",
                         knn_err, split_mismatch, pls_err, t) };
}

// ---- 2: gradient check

Outcome criterion2()
{
    const auto start = Clock::now();
    Rng rng(202);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const auto p = 1 + uniform_index(rng, 5);
        const auto h = 1 + uniform_index(rng, 8);
        const auto n = 5 + uniform_index(rng, 20);
        Vector w(static_cast<Eigen::Index>(h * p + 2 * h + 1));
        for (auto& v : w) v = uniform_real(rng, -0.5, 0.5);
        Matrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
        Vector t(static_cast<Eigen::Index>(n));
        for (auto& v : x.reshaped()) v = uniform_real(rng, -1.0, 1.0);
        for (auto& v : t) v = uniform_real(rng, -1.0, 1.0);
        Vector grad;
        MlpNetwork(p, h, w).loss(x, t, &grad);
        for (Eigen::Index k = 0; k < w.size(); ++k) {
            Vector plus = w, minus = w;
            plus[k] += 1e-5;
            minus[k] -= 1e-5;
            const double fd = (MlpNetwork(p, h, plus).loss(x, t) - MlpNetwork(p, h, minus).loss(x, t)) / 2e-5;
            const double scale = std::max({ std::abs(fd), std::abs(grad[k]), 1e-8 });
            worst = std::max(worst, std::abs(fd - grad[k]) / scale);
        }
    }
    const double secs = seconds_since(start);
    return { worst < 1e-4 && secs < 10.0, fmt::format("max relative error {:.2e} over 20 nets, {:.2f} s", worst, secs) };
}

// ---- 3: level-2 set structure

Outcome criterion3()
{
    Rng rng(303);
    const auto registry = build_default_registry();
    const std::vector<const char*> cheap { "mean", "pls-l2", "pls-l5", "knn-k10-a10-manhattan",
                                           "knn-k20-a20-euclidean", "rf-n5", "nn-max20-eps0.001-h5" };
    int bad = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const auto n = 6 + uniform_index(rng, 195);
        const auto p = 1 + uniform_index(rng, 6);
        auto d = random_dataset(n, p, rng);
        std::vector<TrainSpec> members;
        const auto m = 1 + uniform_index(rng, 4);
        for (std::size_t j = 0; j < m; ++j) {
            members.push_back(make_spec(LearnerSpec::parse(cheap[uniform_index(rng, cheap.size())])));
        }
        const int folds = uniform_int(rng, 2, std::min<int>(6, static_cast<int>(n)));
        const auto spec = make_stacking(members, make_spec(LearnerSpec::parse("mean")), folds);
        const auto set = build_level2_set(std::get<StackingSpec>(spec.node), d, rng());
        std::vector<int> seen(n, 0);
        for (auto s : set.source_index) ++seen[s];
        const bool ok = static_cast<std::size_t>(set.features.rows()) == n && set.source_index.size() == n
            && std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; });
        bad += ok ? 0 : 1;
    }
    return { bad == 0, fmt::format("{} of 50 random configurations violate N rows / each index once", bad) };
}

// ---- 4: qualitative comparison on the heterogeneous generator

struct SeedResult {
    std::map<std::string, double> rmse;
    double hand = 0.0;
    double ga = 0.0;
    std::string ga_genome;
};

Outcome criterion4()
{
    const auto start = Clock::now();
    const auto registry = build_default_registry();
    const auto hand_spec = load_spec_file(fs::path(STACKEVO_SOURCE_DIR) / "data" / "hand_tuned.spec");
    const auto& hand_stack = std::get<StackingSpec>(hand_spec.node);
    const auto hand_genome = genome_from_spec(hand_stack, registry);

    bool ok = true;
    std::string detail;
    for (std::uint64_t seed : { 1, 2, 3 }) {
        const auto seed_start = Clock::now();
        SynthSpec synth;
        synth.generator = Generator::Heterogeneous;
        synth.rows = 2000;
        synth.noise = 0.3;
        Rng data_rng(derive_seed(seed, "acceptance-data"));
        const auto data = synth_generate(synth, data_rng);
        const std::uint64_t cv_seed = derive_seed(seed, "acceptance-cv");
        Rng fold_rng(cv_seed);
        const auto folds = assign_folds(data.rows(), 5, fold_rng);
        const auto cv = [&](const TrainSpec& spec) {
            EvalOptions o;
            o.mean_reference = false;
            return cross_validate(spec, data, folds, cv_seed, o).pooled_rmse;
        };

        const double mean = cv(make_spec(LearnerSpec::parse("mean")));
        const double hand = cv(hand_spec);
        std::string members;
        double worst_member = 0.0;
        bool order = true;
        for (const auto& m : hand_stack.ensemble) {
            const auto& l = std::get<LearnerSpec>(m.node);
            if (l.kind() == LearnerKind::Mean) continue;
            const double r = cv(m);
            worst_member = std::max(worst_member, r);
            order = order && r < mean && hand < r;
            members += fmt::format(" {}={:.4f}", l.name(), r);
        }

        GAConfig cfg;
        cfg.population = 8;
        cfg.elite = 1;
        cfg.max_iterations = 15;
        cfg.size_limit = 5;
        cfg.fitness_fraction = kFitnessFraction;
        cfg.seed = derive_seed(seed, "acceptance-ga");
        cfg.initial.push_back(hand_genome);
        const auto trace = ga_run(data, cfg, registry);
        const double ga = trace.best == hand_genome ? hand : cv(TrainSpec { decode_genome(trace.best, registry) });

        const bool ga_ok = ga <= 1.02 * hand;
        ok = ok && order && ga_ok;
        std::fprintf(stderr, "  criterion 4, seed %llu done after %.0f s\n", static_cast<unsigned long long>(seed),
                     seconds_since(start));
        detail += fmt::format("\n    seed {}: mean={:.4f}{} hand-tuned={:.4f} GA={:.4f} ({:.3f}x, {}) order {} [{:.0f} s]",
                              seed, mean, members, hand, ga, ga / hand, trace.best.encode(), order ? "ok" : "VIOLATED",
                              seconds_since(seed_start));
    }
    const double secs = seconds_since(start);
    ok = ok && secs < 1800.0;
    return { ok, fmt::format("N=2000, noise 0.3, 5-fold pooled CV; GA S=8 E=1 Max=15 limit 5, fitness on {:.0f}% of rows; "
                             "{:.0f} s total{}",
                             100.0 * kFitnessFraction, secs, detail) };
}

// ---- 5: elitism monotonicity

Outcome criterion5()
{
    const auto start = Clock::now();
    std::vector<LearnerSpec> entries;
    for (const char* n : { "mean", "pls-l2", "pls-l4", "knn-k10-a10-manhattan", "knn-k20-a20-euclidean", "rf-n5",
                           "rf-n10", "nn-max20-eps0.001-h5" }) {
        entries.push_back(LearnerSpec::parse(n));
    }
    const Registry registry(entries);
    SynthSpec synth;
    synth.rows = 200;
    synth.noise = 0.3;
    Rng rng(505);
    const auto data = synth_generate(synth, rng);
    GAConfig cfg;
    cfg.population = 8;
    cfg.elite = 1;
    cfg.max_iterations = 100;
    cfg.seed = 505;
    const auto trace = ga_run(data, cfg, registry);
    int violations = 0;
    double best_so_far = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < trace.iterations.size(); ++i) {
        if (i > 0 && trace.iterations[i].best_rmse > trace.iterations[i - 1].best_rmse) ++violations;
        best_so_far = std::min(best_so_far, trace.iterations[i].best_rmse);
    }
    const double secs = seconds_since(start);
    const bool ok = violations == 0 && trace.iterations.size() == 100 && trace.best_rmse == best_so_far && secs < 600;
    return { ok, fmt::format("{} increases over {} iterations, best {:.4f} -> {:.4f}, {} evaluations, {:.0f} s",
                             violations, trace.iterations.size(), trace.iterations.front().best_rmse,
                             trace.iterations.back().best_rmse, trace.evaluations, secs) };
}

// ---- 6: mean learner calibration

Outcome criterion6()
{
    SynthSpec synth;
    synth.rows = 10000;
    synth.noise = 0.3;
    Rng rng(606);
    const auto data = synth_generate(synth, rng);
    Rng cv_rng(607);
    const auto report = cross_validate(make_spec(LearnerSpec::parse("mean")), data, 5, cv_rng);
    const double mean = data.targets().mean();
    const double sd = std::sqrt((data.targets().array() - mean).square().sum() / static_cast<double>(data.rows()));
    const double rel = std::abs(report.pooled_rmse - sd) / sd;
    const std::string cmp = fmt::format("{:.2f}", *report.mean_cmp);
    return { rel <= 0.05 && cmp == "1.00",
             fmt::format("pooled RMSE {:.4f} vs target sd {:.4f} ({:.3f}% off), Mean cmp {}", report.pooled_rmse, sd,
                         100.0 * rel, cmp) };
}

// ---- 7: CLI determinism across --jobs

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome criterion7()
{
    const auto dir = fs::temp_directory_path() / "stackevo_acceptance_7";
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::ostringstream sink;
    const auto cli = [&](std::vector<std::string> args) { return run_cli(args, sink, sink); };
    const auto data = (dir / "data.csv").string();
    if (cli({ "synth", "-n", "150", "--noise", "0.3", "--seed", "7", "-o", data }) != 0) {
        return { false, "synth failed" };
    }
    const std::string hand = (fs::path(STACKEVO_SOURCE_DIR) / "data" / "hand_tuned.spec").string();
    struct Config {
        std::vector<std::string> args;
        std::vector<std::string> files;
    };
    const std::vector<Config> configs {
        { { "eval", "-i", data, "-s", hand, "--seed", "11" }, { "eval_report.txt", "predictions.csv" } },
        { { "eval", "-i", data, "-s", "rf-n25", "-k", "4", "--seed", "12" }, { "eval_report.txt", "predictions.csv" } },
        { { "evolve", "-i", data, "-S", "6", "-E", "1", "--iterations", "3", "--size-limit", "3", "--fitness-folds",
            "3", "--seed", "13" },
          { "trace.csv", "best_genome.txt", "run_config.txt" } },
    };
    int identical = 0;
    std::string detail;
    for (std::size_t c = 0; c < configs.size(); ++c) {
        std::vector<std::string> outputs;
        bool same = true;
        for (const char* jobs : { "1", "4", "2" }) {
            auto args = configs[c].args;
            const auto out = dir / fmt::format("c{}_j{}", c, jobs);
            args.insert(args.end(), { "--jobs", jobs, "-o", out.string() });
            if (cli(args) != 0) {
                same = false;
                break;
            }
            std::string all;
            for (const auto& f : configs[c].files) all += slurp(out / f) + '\x1e';
            if (!outputs.empty() && all != outputs.front()) same = false;
            outputs.push_back(all);
        }
        identical += same ? 1 : 0;
        detail += fmt::format("{}{} {}", c ? ", " : "", configs[c].args[0], same ? "identical" : "DIFFERENT");
    }
    set_jobs(1);
    return { identical == 3, fmt::format("{} (jobs 1/4/2)", detail) };
}

// ---- 8: registry fidelity

Outcome criterion8()
{
    std::vector<std::string> expected { "mean" };
    for (int l = 2; l <= 10; ++l) expected.push_back(fmt::format("pls-l{}", l));
    for (int k = 10; k <= 60; k += 10) {
        for (int a : { 10, 20 }) {
            for (const char* m : { "manhattan", "euclidean" }) expected.push_back(fmt::format("knn-k{}-a{}-{}", k, a, m));
        }
    }
    for (int n : { 5, 10, 25, 50, 100, 200 }) expected.push_back(fmt::format("rf-n{}", n));
    std::vector<std::string> nets;
    for (int mx : { 50, 100, 200, 500 }) {
        for (const char* e : { "0.001", "0.005" }) {
            for (int h : { 10, 20 }) nets.push_back(fmt::format("max{}-eps{}-h{}", mx, e, h));
        }
    }
    for (const auto& n : nets) expected.push_back("nn-" + n);
    for (int t : { 20, 40, 60 }) {
        for (const auto& n : nets) expected.push_back(fmt::format("bagnn-t{}-{}", t, n));
    }
    const auto reg = build_default_registry();
    std::vector<std::string> actual;
    for (const auto& e : reg.entries()) actual.push_back(e.name());
    const std::set<std::string> unique(actual.begin(), actual.end());
    return { actual == expected && unique.size() == 104,
             fmt::format("{} entries, {} unique, matches enumerated grid in order: {}", actual.size(), unique.size(),
                         actual == expected ? "yes" : "no") };
}

// ---- 9: operator distributions

Outcome criterion9()
{
    constexpr int kDraws = 100000;
    Rng rng(909);
    // A huge registry makes the level-2 branch detectable: it moves I with
    // probability 1 - 1e-9. Draws that keep I come from the folds branch.
    constexpr std::size_t kWide = 1000000000;
    std::vector<int> folds(kMaxFolds + 1, 0);
    int n = 0;
    const Individual g { 0, 4, { true, false, false, false } };
    while (n < kDraws) {
        const auto m = mutate_m(g, kWide, rng);
        if (m.level2 != g.level2) continue;
        ++folds[static_cast<std::size_t>(m.folds)];
        ++n;
    }
    double fold_dev = 0.0;
    for (int f = kMinFolds; f <= kMaxFolds; ++f) {
        fold_dev = std::max(fold_dev, std::abs(folds[static_cast<std::size_t>(f)] / double(kDraws) - 0.2));
    }

    std::vector<int> pos(4, 0);
    const Individual v { 0, 2, { true, true, false, true } };
    for (int i = 0; i < kDraws; ++i) {
        const auto m = mutate_v(v, rng);
        for (std::size_t b = 0; b < 4; ++b) pos[b] += m.members[b] != v.members[b];
    }
    double pos_dev = 0.0;
    for (int c : pos) pos_dev = std::max(pos_dev, std::abs(c / double(kDraws) - 0.25));

    const std::vector<double> fit { 0.38358, 1.0, 2.5, 0.1, 4.0 };
    const double total = std::accumulate(fit.begin(), fit.end(), 0.0);
    std::vector<int> picks(fit.size(), 0);
    for (auto i : roulette_select(fit, kDraws, rng)) ++picks[i];
    double roul_dev = 0.0;
    for (std::size_t i = 0; i < fit.size(); ++i) roul_dev = std::max(roul_dev, std::abs(picks[i] / double(kDraws) - fit[i] / total));

    return { fold_dev < 0.01 && pos_dev < 0.01 && roul_dev < 0.01,
             fmt::format("max deviation at 1e5 draws: folds {:.4f}, flip position {:.4f}, roulette {:.4f}", fold_dev,
                         pos_dev, roul_dev) };
}

} // namespace

int main(int argc, char** argv)
{
    const std::vector<std::pair<int, std::function<Outcome()>>> criteria {
        { 1, criterion1 }, { 2, criterion2 }, { 3, criterion3 }, { 4, criterion4 }, { 5, criterion5 },
        { 6, criterion6 }, { 7, criterion7 }, { 8, criterion8 }, { 9, criterion9 },
    };
    std::set<int> only;
    for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
    int failed = 0;
    for (const auto& [id, fn] : criteria) {
        if (!only.empty() && !only.count(id)) continue;
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = { false, fmt::format("exception: {}", e.what()) };
        }
        std::printf("%s criterion %d: %s\n", o.pass ? "PASS" : "FAIL", id, o.detail.c_str());
        std::fflush(stdout);
        failed += o.pass ? 0 : 1;
    }
    return failed == 0 ? 0 : 1;
}
