// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright 2026 The stackevo Authors

#include "stackevo/cli.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <utility>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "stackevo/error.hpp"
#include "stackevo/eval.hpp"
#include "stackevo/evolve.hpp"
#include "stackevo/model_io.hpp"
#include "stackevo/spec_file.hpp"

namespace fs = std::filesystem;

namespace stackevo {

namespace {

// Ordered key/value echo of a command's effective configuration.
class Echo {
public:
    void add(std::string key, std::string value) { items_.emplace_back(std::move(key), std::move(value)); }

    template <class T>
    void add(std::string key, const T& value)
    {
        add(std::move(key), fmt::format("{}", value));
    }

    void add_block(std::string key, std::string_view text)
    {
        std::istringstream in { std::string(text) };
        std::string line;
        while (std::getline(in, line)) {
            add(key, line);
        }
    }

    void write(std::ostream& out, std::string_view prefix) const
    {
        for (const auto& [k, v] : items_) {
            out << prefix << k << " = " << v << '\n';
        }
    }

private:
    std::vector<std::pair<std::string, std::string>> items_;
};

template <class F>
auto stage(std::string_view name, F&& f)
{
    try {
        return f();
    } catch (const DataError& e) {
        throw DataError(fmt::format("{}: {}", name, e.what()));
    } catch (const TrainingError& e) {
        throw TrainingError(fmt::format("{}: {}", name, e.what()));
    } catch (const ConfigError& e) {
        throw ConfigError(fmt::format("{}: {}", name, e.what()));
    }
}

std::ofstream open_output(const fs::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError(fmt::format("cannot write '{}'", path.string()));
    }
    return out;
}

void make_dir(const fs::path& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw DataError(fmt::format("cannot create output directory '{}': {}", dir.string(), ec.message()));
    }
}

std::string real(double v) { return fmt::format("{}", v); }

struct Common {
    std::string input;
    std::string target = "y";
    std::uint64_t seed = kDefaultSeed;
    int jobs = 0;
    std::string out;
};

enum class InputKind { None, Features, Labeled };

void add_common(CLI::App* cmd, Common& c, InputKind input)
{
    if (input != InputKind::None) {
        cmd->add_option("-i,--input", c.input, "Input CSV with a header row")->required();
    }
    if (input == InputKind::Labeled) {
        cmd->add_option("-t,--target", c.target, "Target column name")->capture_default_str();
    }
    cmd->add_option("--seed", c.seed, "Master seed")->capture_default_str();
    cmd->add_option("-j,--jobs", c.jobs, "Worker threads (0: all cores)")->capture_default_str()->check(
        CLI::NonNegativeNumber);
}

void apply_jobs(const Common& c)
{
    if (c.jobs > 0) {
        set_jobs(c.jobs);
    }
}

int cmd_registry(const std::string& out_path, std::ostream& out)
{
    const auto registry = build_default_registry();
    std::ostringstream text;
    for (std::size_t i = 0; i < registry.size(); ++i) {
        text << fmt::format("{:3d}  {}\n", i + 1, registry.at(i).name());
    }
    if (out_path.empty()) {
        out << text.str();
    } else {
        open_output(out_path) << text.str();
    }
    return kExitOk;
}

struct SynthOptions {
    std::string generator = "heterogeneous";
    std::size_t rows = 1000;
    std::size_t features = 0;
    double noise = 0.0;
};

int cmd_synth(const Common& c, const SynthOptions& o, std::ostream& out)
{
    SynthSpec spec;
    spec.generator = stage("configure", [&] { return parse_generator(o.generator); });
    spec.rows = o.rows;
    spec.features = o.features == 0 ? default_feature_count(spec.generator) : o.features;
    spec.noise = o.noise;

    Echo echo;
    echo.add("command", "synth");
    echo.add("generator", generator_name(spec.generator));
    echo.add("rows", spec.rows);
    echo.add("features", spec.features);
    echo.add("noise", real(spec.noise));
    echo.add("seed", c.seed);
    echo.write(out, "");

    Rng rng(derive_seed(c.seed, "synth"));
    const auto data = stage("generate", [&] { return synth_generate(spec, rng); });
    stage("write output", [&] {
        auto file = open_output(c.out);
        echo.write(file, "# ");
        write_csv(data, file, "y");
    });
    out << fmt::format("wrote {} rows to {}\n", data.rows(), c.out);
    return kExitOk;
}

struct EvalOptionsCli {
    std::string spec;
    int folds = 5;
    std::string mode = "cv";
    double split_ratio = 0.7;
};

int cmd_eval(const Common& c, const EvalOptionsCli& o, std::ostream& out)
{
    apply_jobs(c);
    const auto registry = build_default_registry();
    const auto spec = stage("resolve spec", [&] { return resolve_spec(o.spec, registry); });
    const auto data = stage("load data", [&] { return load_csv(c.input, c.target); });

    Echo echo;
    echo.add("command", "eval");
    echo.add("input", c.input);
    echo.add("target", c.target);
    echo.add("rows", data.rows());
    echo.add("features", data.cols());
    echo.add("spec_arg", o.spec);
    echo.add_block("spec", format_spec(spec));
    echo.add("mode", o.mode);
    if (o.mode == "cv") {
        echo.add("folds", o.folds);
    } else {
        echo.add("split_ratio", real(o.split_ratio));
    }
    echo.add("seed", c.seed);
    echo.write(out, "");

    Rng rng(c.seed);
    const auto report = stage("evaluate", [&] {
        return o.mode == "cv" ? cross_validate(spec, data, o.folds, rng) : proportional_eval(spec, data, o.split_ratio, rng);
    });

    stage("write output", [&] {
        make_dir(c.out);
        auto file = open_output(fs::path(c.out) / "eval_report.txt");
        echo.write(file, "# ");
        write_report(report, file);
        auto pred = open_output(fs::path(c.out) / "predictions.csv");
        echo.write(pred, "# ");
        pred << "index,target,prediction\n";
        for (std::size_t i = 0; i < data.rows(); ++i) {
            if (std::isnan(report.predictions[i])) continue;
            pred << fmt::format("{},{:.17g},{:.17g}\n", i, data.target(i), report.predictions[i]);
        }
    });
    out << fmt::format("pooled_rmse = {:.6g}\n", report.pooled_rmse);
    out << fmt::format("fold_average_rmse = {:.6g}\n", report.fold_average_rmse());
    if (report.mean_cmp) {
        out << fmt::format("mean_reference_rmse = {:.6g}\nmean_cmp = {:.2f}\n", *report.mean_reference_rmse,
                           *report.mean_cmp);
    }
    return kExitOk;
}

int cmd_train(const Common& c, const std::string& spec_arg, std::ostream& out)
{
    apply_jobs(c);
    const auto registry = build_default_registry();
    const auto spec = stage("resolve spec", [&] { return resolve_spec(spec_arg, registry); });
    const auto data = stage("load data", [&] { return load_csv(c.input, c.target); });

    Echo echo;
    echo.add("command", "train");
    echo.add("input", c.input);
    echo.add("target", c.target);
    echo.add("rows", data.rows());
    echo.add("features", data.cols());
    echo.add_block("spec", format_spec(spec));
    echo.add("seed", c.seed);
    echo.write(out, "");

    Rng rng(c.seed);
    const auto model = stage("train", [&] { return train(spec, data, rng); });
    stage("write output", [&] {
        save_model_file(*model, c.out);
        auto side = open_output(c.out + ".txt");
        echo.write(side, "# ");
    });
    out << fmt::format("wrote model to {}\n", c.out);
    return kExitOk;
}

int cmd_predict(const Common& c, const std::string& model_path, std::ostream& out)
{
    apply_jobs(c);
    const auto model = stage("load model", [&] { return load_model_file(model_path); });
    const auto x = stage("load data", [&] { return load_feature_csv(c.input); });

    Echo echo;
    echo.add("command", "predict");
    echo.add("model", model_path);
    echo.add("input", c.input);
    echo.add("rows", x.rows());
    echo.write(out, "");

    const auto pred = stage("predict", [&] {
        if (static_cast<std::size_t>(x.cols()) != model->input_dim()) {
            throw DataError(fmt::format("dimension mismatch: model expects {} features, '{}' has {}",
                                        model->input_dim(), c.input, x.cols()));
        }
        return model->predict_batch(x, Exec::Parallel);
    });
    stage("write output", [&] {
        auto file = open_output(c.out);
        echo.write(file, "# ");
        file << "prediction\n";
        for (Eigen::Index i = 0; i < pred.size(); ++i) {
            file << fmt::format("{:.17g}\n", pred[i]);
        }
    });
    out << fmt::format("wrote {} predictions to {}\n", pred.size(), c.out);
    return kExitOk;
}

struct EvolveOptions {
    std::size_t population = 16;
    std::size_t elite = 1;
    int iterations = 100;
    double pm_m = 0.2;
    double pm_v = 0.5;
    std::size_t size_limit = 0;
    std::string fitness = "cv";
    int fitness_folds = 5;
    double split_ratio = 0.7;
    double fitness_fraction = 1.0;
    std::vector<std::string> seed_genomes;
};

Individual seed_genome(const std::string& arg, const Registry& registry)
{
    if (arg.starts_with("l2=")) {
        return Individual::decode(arg, registry.size());
    }
    const auto spec = resolve_spec(arg, registry);
    const auto* st = std::get_if<StackingSpec>(&spec.node);
    if (st == nullptr) {
        throw ConfigError(fmt::format("seed genome '{}' is not a stacking ensemble", arg));
    }
    return genome_from_spec(*st, registry);
}

int cmd_evolve(const Common& c, const EvolveOptions& o, std::ostream& out)
{
    apply_jobs(c);
    const auto registry = build_default_registry();
    GAConfig cfg;
    cfg.population = o.population;
    cfg.elite = o.elite;
    cfg.max_iterations = o.iterations;
    cfg.pm_m = o.pm_m;
    cfg.pm_v = o.pm_v;
    if (o.size_limit > 0) cfg.size_limit = o.size_limit;
    cfg.mode = o.fitness == "cv" ? FitnessMode::CrossValidation : FitnessMode::ProportionalSplit;
    cfg.cv_folds = o.fitness_folds;
    cfg.split_ratio = o.split_ratio;
    cfg.fitness_fraction = o.fitness_fraction;
    cfg.seed = c.seed;
    stage("configure", [&] {
        for (const auto& g : o.seed_genomes) {
            cfg.initial.push_back(seed_genome(g, registry));
        }
        cfg.validate(registry.size());
    });
    const auto data = stage("load data", [&] { return load_csv(c.input, c.target); });

    Echo echo;
    echo.add("command", "evolve");
    echo.add("input", c.input);
    echo.add("target", c.target);
    echo.add("rows", data.rows());
    echo.add("features", data.cols());
    echo.add("registry_size", registry.size());
    echo.add("population", cfg.population);
    echo.add("elite", cfg.elite);
    echo.add("iterations", cfg.max_iterations);
    echo.add("pm_m", real(cfg.pm_m));
    echo.add("pm_v", real(cfg.pm_v));
    echo.add("size_limit", cfg.size_limit ? fmt::format("{}", *cfg.size_limit) : std::string("none"));
    echo.add("fitness", o.fitness);
    if (cfg.mode == FitnessMode::CrossValidation) {
        echo.add("fitness_folds", cfg.cv_folds);
    } else {
        echo.add("split_ratio", real(cfg.split_ratio));
    }
    echo.add("fitness_fraction", real(cfg.fitness_fraction));
    for (const auto& g : cfg.initial) {
        echo.add("seed_genome", g.encode());
    }
    echo.add("seed", c.seed);
    echo.write(out, "");

    const auto trace = stage("evolve", [&] {
        return ga_run(data, cfg, registry, Exec::Parallel, [&](const IterationRecord& r) {
            out << fmt::format("iteration {:3d}  best {:.6g}  mean {:.6g}  {}\n", r.iteration, r.best_rmse,
                               r.mean_rmse, r.best.encode());
            out.flush();
        });
    });

    stage("write output", [&] {
        make_dir(c.out);
        {
            auto file = open_output(fs::path(c.out) / "run_config.txt");
            echo.write(file, "");
        }
        {
            auto file = open_output(fs::path(c.out) / "trace.csv");
            write_trace_csv(trace, file);
        }
        auto file = open_output(fs::path(c.out) / "best_genome.txt");
        echo.write(file, "# ");
        file << fmt::format("# best_rmse = {:.17g}\n", trace.best_rmse);
        file << fmt::format("# evaluations = {}\n", trace.evaluations);
        std::istringstream desc(describe_genome(trace.best, registry));
        for (std::string line; std::getline(desc, line);) {
            file << "# " << line << '\n';
        }
        file << format_spec(TrainSpec { decode_genome(trace.best, registry) });
    });
    out << fmt::format("best_rmse = {:.6g}\n{}", trace.best_rmse, describe_genome(trace.best, registry));
    return kExitOk;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app { "Regression ensembles: base learners, bagging, stacking and a GA over stacks", "stackevo" };
    app.require_subcommand(1);

    Common common;
    std::string registry_out;
    auto* reg = app.add_subcommand("registry", "List the default base-learner registry");
    reg->add_option("-o,--out", registry_out, "Write the listing to a file");

    SynthOptions synth;
    auto* syn = app.add_subcommand("synth", "Generate a synthetic regression dataset");
    add_common(syn, common, InputKind::None);
    syn->add_option("-g,--generator", synth.generator, "linear, piecewise, sine-mix or heterogeneous")
        ->capture_default_str();
    syn->add_option("-n,--rows", synth.rows, "Sample count")->capture_default_str()->check(CLI::PositiveNumber);
    syn->add_option("-p,--features", synth.features, "Feature count (0: generator default)")->capture_default_str();
    syn->add_option("--noise", synth.noise, "Gaussian noise standard deviation")->capture_default_str()->check(
        CLI::NonNegativeNumber);
    syn->add_option("-o,--out", common.out, "Output CSV")->required();

    EvalOptionsCli ev;
    auto* eva = app.add_subcommand("eval", "Cross-validate a learner or composite spec");
    add_common(eva, common, InputKind::Labeled);
    eva->add_option("-s,--spec", ev.spec, "Registry name, 1-based registry position or spec file")->required();
    eva->add_option("-k,--folds", ev.folds, "Cross-validation folds")->capture_default_str();
    eva->add_option("--mode", ev.mode, "cv or split")->capture_default_str()->check(CLI::IsMember({ "cv", "split" }));
    eva->add_option("--split-ratio", ev.split_ratio, "Training share in split mode")->capture_default_str();
    eva->add_option("-o,--out", common.out, "Output directory")->required();

    std::string train_spec;
    auto* trn = app.add_subcommand("train", "Train a learner on the full dataset and save it");
    add_common(trn, common, InputKind::Labeled);
    trn->add_option("-s,--spec", train_spec, "Registry name, 1-based registry position or spec file")->required();
    trn->add_option("-o,--out", common.out, "Output model file")->required();

    std::string model_path;
    auto* prd = app.add_subcommand("predict", "Predict with a saved model");
    add_common(prd, common, InputKind::Features);
    prd->add_option("-m,--model", model_path, "Saved model file")->required();
    prd->add_option("-o,--out", common.out, "Output CSV")->required();

    EvolveOptions evo;
    auto* evl = app.add_subcommand("evolve", "Evolve stacking ensembles with the genetic algorithm");
    add_common(evl, common, InputKind::Labeled);
    evl->add_option("-S,--population", evo.population, "Population size")->capture_default_str();
    evl->add_option("-E,--elite", evo.elite, "Elite size")->capture_default_str();
    evl->add_option("--iterations", evo.iterations, "Generations")->capture_default_str();
    evl->add_option("--pm-m", evo.pm_m, "Probability of MutateM")->capture_default_str();
    evl->add_option("--pm-v", evo.pm_v, "Probability of MutateV")->capture_default_str();
    evl->add_option("--size-limit", evo.size_limit, "Maximum ensemble size (0: none)")->capture_default_str();
    evl->add_option("--fitness", evo.fitness, "cv or split")->capture_default_str()->check(
        CLI::IsMember({ "cv", "split" }));
    evl->add_option("--fitness-folds", evo.fitness_folds, "Folds of the fitness cross-validation")
        ->capture_default_str();
    evl->add_option("--split-ratio", evo.split_ratio, "Training share of the fitness split")->capture_default_str();
    evl->add_option("--fitness-fraction", evo.fitness_fraction, "Share of rows used for fitness")
        ->capture_default_str();
    evl->add_option("--seed-genome", evo.seed_genomes, "Stacking spec file or encoded genome; repeatable");
    evl->add_option("-o,--out", common.out, "Output directory")->required();

    try {
        app.parse(std::vector<std::string>(args.rbegin(), args.rend()));
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    const auto* cmd = app.get_subcommands().front();
    const std::string name = cmd->get_name();
    try {
        if (name == "registry") return cmd_registry(registry_out, out);
        if (name == "synth") return cmd_synth(common, synth, out);
        if (name == "eval") return cmd_eval(common, ev, out);
        if (name == "train") return cmd_train(common, train_spec, out);
        if (name == "predict") return cmd_predict(common, model_path, out);
        if (name == "evolve") return cmd_evolve(common, evo, out);
    } catch (const ConfigError& e) {
        err << "stackevo " << name << ": " << e.what() << '\n';
        return kExitUsage;
    } catch (const DataError& e) {
        err << "stackevo " << name << ": " << e.what() << '\n';
        return kExitData;
    } catch (const TrainingError& e) {
        err << "stackevo " << name << ": " << e.what() << '\n';
        return kExitTraining;
    } catch (const std::exception& e) {
        err << "stackevo " << name << ": " << e.what() << '\n';
        return kExitOther;
    }
    return kExitOther;
}

} // namespace stackevo
