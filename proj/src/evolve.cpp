// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright 2026 The stackevo Authors

#include "stackevo/evolve.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <set>

#include <fmt/format.h>

#include "stackevo/error.hpp"
#include "stackevo/eval.hpp"

namespace stackevo {

std::size_t Individual::popcount() const
{
    return static_cast<std::size_t>(std::count(members.begin(), members.end(), true));
}

std::vector<std::size_t> Individual::member_indices() const
{
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < members.size(); ++i) {
        if (members[i]) out.push_back(i);
    }
    return out;
}

std::string Individual::encode() const
{
    std::string m;
    for (auto i : member_indices()) {
        m += (m.empty() ? "" : "+") + std::to_string(i + 1);
    }
    return fmt::format("l2={};folds={};members={}", level2 + 1, folds, m);
}

namespace {

std::size_t parse_size(std::string_view s, std::string_view whole)
{
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
        throw ConfigError(fmt::format("cannot parse genome '{}': bad number '{}'", whole, s));
    }
    return v;
}

std::string_view field(std::string_view& rest, std::string_view key, std::string_view whole)
{
    if (!rest.starts_with(key)) {
        throw ConfigError(fmt::format("cannot parse genome '{}': expected '{}'", whole, key));
    }
    rest.remove_prefix(key.size());
    const auto end = rest.find(';');
    const auto value = rest.substr(0, end);
    rest = end == std::string_view::npos ? std::string_view {} : rest.substr(end + 1);
    return value;
}

} // namespace

Individual Individual::decode(std::string_view text, std::size_t registry_size)
{
    std::string_view rest = text;
    Individual ind;
    const auto l2 = parse_size(field(rest, "l2=", text), text);
    ind.folds = static_cast<int>(parse_size(field(rest, "folds=", text), text));
    auto members = field(rest, "members=", text);
    if (l2 < 1) {
        throw ConfigError(fmt::format("cannot parse genome '{}': positions start at 1", text));
    }
    ind.level2 = l2 - 1;
    ind.members.assign(registry_size, false);
    while (!members.empty()) {
        const auto plus = members.find('+');
        const auto pos = parse_size(members.substr(0, plus), text);
        if (pos < 1 || pos > registry_size) {
            throw ConfigError(fmt::format("genome '{}' references position {} outside [1, {}]", text, pos, registry_size));
        }
        ind.members[pos - 1] = true;
        members = plus == std::string_view::npos ? std::string_view {} : members.substr(plus + 1);
    }
    validate_individual(ind, registry_size);
    return ind;
}

bool Individual::operator<(const Individual& o) const
{
    if (level2 != o.level2) return level2 < o.level2;
    if (folds != o.folds) return folds < o.folds;
    return members < o.members;
}

void validate_individual(const Individual& ind, std::size_t registry_size, std::optional<std::size_t> size_limit)
{
    if (ind.members.size() != registry_size) {
        throw ConfigError(fmt::format("genome has {} membership bits, registry has {} entries", ind.members.size(),
                                      registry_size));
    }
    if (ind.level2 >= registry_size) {
        throw ConfigError(fmt::format("genome level-2 position {} outside [1, {}]", ind.level2 + 1, registry_size));
    }
    if (ind.folds < kMinFolds || ind.folds > kMaxFolds) {
        throw ConfigError(fmt::format("genome fold count {} outside [{}, {}]", ind.folds, kMinFolds, kMaxFolds));
    }
    const auto count = ind.popcount();
    if (count < 1) {
        throw ConfigError("genome has an empty ensemble");
    }
    if (size_limit && count > *size_limit) {
        throw ConfigError(fmt::format("genome has {} members, limit is {}", count, *size_limit));
    }
}

void GAConfig::validate(std::size_t registry_size) const
{
    if (registry_size < 1) throw ConfigError("registry is empty");
    if (population < 2) throw ConfigError(fmt::format("population size must be >= 2, got {}", population));
    if (elite > population) throw ConfigError(fmt::format("elite size {} exceeds population size {}", elite, population));
    if (max_iterations < 1) throw ConfigError(fmt::format("iteration count must be >= 1, got {}", max_iterations));
    for (double pm : { pm_m, pm_v }) {
        if (!(pm >= 0.0 && pm <= 1.0)) throw ConfigError(fmt::format("mutation probability {} outside [0, 1]", pm));
    }
    if (size_limit && *size_limit < 1) throw ConfigError("ensemble size limit must be >= 1");
    if (mode == FitnessMode::CrossValidation && cv_folds < 2) {
        throw ConfigError(fmt::format("fitness cross-validation needs >= 2 folds, got {}", cv_folds));
    }
    if (mode == FitnessMode::ProportionalSplit && !(split_ratio > 0.0 && split_ratio < 1.0)) {
        throw ConfigError(fmt::format("split ratio must lie in (0, 1), got {}", split_ratio));
    }
    if (!(fitness_fraction > 0.0 && fitness_fraction <= 1.0)) {
        throw ConfigError(fmt::format("fitness sub-sample fraction must lie in (0, 1], got {}", fitness_fraction));
    }
    if (initial.size() > population) {
        throw ConfigError(fmt::format("{} seed genomes exceed population size {}", initial.size(), population));
    }
    for (const auto& ind : initial) {
        validate_individual(ind, registry_size);
    }
}

namespace {

void repair_empty(Individual& ind, Rng& rng)
{
    if (ind.popcount() == 0) {
        ind.members[uniform_index(rng, ind.members.size())] = true;
    }
}

} // namespace

Individual mutate_m(Individual ind, std::size_t registry_size, Rng& rng)
{
    if (uniform_index(rng, 2) == 0) {
        ind.level2 = uniform_index(rng, registry_size);
    } else {
        ind.folds = uniform_int(rng, kMinFolds, kMaxFolds);
    }
    return ind;
}

Individual mutate_v(Individual ind, Rng& rng)
{
    const auto i = uniform_index(rng, ind.members.size());
    ind.members[i] = !ind.members[i];
    repair_empty(ind, rng);
    return ind;
}

Individual crossover_at(const Individual& p, const Individual& q, std::size_t cut, Rng& rng)
{
    if (p.members.size() != q.members.size()) {
        throw ConfigError(fmt::format("crossover of genomes over different registries ({} vs {} entries)",
                                      p.members.size(), q.members.size()));
    }
    Individual child = p;
    for (std::size_t i = cut; i < child.members.size(); ++i) {
        child.members[i] = q.members[i];
    }
    repair_empty(child, rng);
    return child;
}

Individual crossover(const Individual& p, const Individual& q, Rng& rng)
{
    const auto cut = 1 + uniform_index(rng, p.members.size());
    return crossover_at(p, q, cut, rng);
}

Individual enforce_size_limit(Individual ind, std::size_t limit, Rng& rng)
{
    auto set = ind.member_indices();
    while (set.size() > limit) {
        const auto pick = uniform_index(rng, set.size());
        ind.members[set[pick]] = false;
        set.erase(set.begin() + static_cast<std::ptrdiff_t>(pick));
    }
    return ind;
}

std::vector<std::size_t> roulette_select(std::span<const double> fitnesses, std::size_t count, Rng& rng)
{
    if (fitnesses.empty()) {
        throw ConfigError("roulette selection over an empty population");
    }
    std::vector<double> cumulative(fitnesses.size());
    double total = 0.0;
    for (std::size_t i = 0; i < fitnesses.size(); ++i) {
        if (!(fitnesses[i] > 0.0) || !std::isfinite(fitnesses[i])) {
            throw ConfigError(fmt::format("roulette selection needs positive finite fitness, got {}", fitnesses[i]));
        }
        total += fitnesses[i];
        cumulative[i] = total;
    }
    std::vector<std::size_t> picks(count);
    for (auto& pick : picks) {
        const double u = uniform01(rng) * total;
        const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        pick = std::min(static_cast<std::size_t>(it - cumulative.begin()), fitnesses.size() - 1);
    }
    return picks;
}

Individual random_individual(std::size_t registry_size, std::optional<std::size_t> size_limit, Rng& rng)
{
    Individual ind;
    ind.level2 = uniform_index(rng, registry_size);
    ind.folds = uniform_int(rng, kMinFolds, kMaxFolds);
    ind.members.assign(registry_size, false);
    const double limit = size_limit ? static_cast<double>(*size_limit) : static_cast<double>(registry_size);
    const double density = std::min(0.1, limit / static_cast<double>(registry_size));
    for (std::size_t i = 0; i < registry_size; ++i) {
        ind.members[i] = uniform01(rng) < density;
    }
    repair_empty(ind, rng);
    if (size_limit) {
        ind = enforce_size_limit(std::move(ind), *size_limit, rng);
    }
    return ind;
}

StackingSpec decode_genome(const Individual& ind, const Registry& registry)
{
    validate_individual(ind, registry.size());
    StackingSpec spec;
    for (auto i : ind.member_indices()) {
        spec.ensemble.push_back(make_spec(registry.at(i)));
    }
    spec.level2 = std::make_shared<const TrainSpec>(make_spec(registry.at(ind.level2)));
    spec.folds = ind.folds;
    return spec;
}

std::string describe_genome(const Individual& ind, const Registry& registry)
{
    std::string out = fmt::format("genome: {}\n", ind.encode());
    out += fmt::format("ensemble learner: stacking, {} folds, level 2 learner: [{}] {}\n", ind.folds, ind.level2 + 1,
                       registry.at(ind.level2).name());
    out += fmt::format("base learners ({}):\n", ind.popcount());
    for (auto i : ind.member_indices()) {
        out += fmt::format("  [{}] {}\n", i + 1, registry.at(i).name());
    }
    return out;
}

Individual genome_from_spec(const StackingSpec& spec, const Registry& registry)
{
    const auto position = [&](const TrainSpec& t, std::string_view role) {
        const auto* learner = std::get_if<LearnerSpec>(&t.node);
        if (learner == nullptr) {
            throw ConfigError(fmt::format("{} '{}' is not a registry learner", role, t.describe()));
        }
        const auto pos = registry.find(learner->name());
        if (!pos) {
            throw ConfigError(fmt::format("{} '{}' is not in the registry", role, learner->name()));
        }
        return *pos;
    };
    Individual ind;
    ind.level2 = position(*spec.level2, "level-2 learner");
    ind.folds = spec.folds;
    ind.members.assign(registry.size(), false);
    for (const auto& m : spec.ensemble) {
        const auto pos = position(m, "ensemble member");
        if (ind.members[pos]) {
            throw ConfigError(fmt::format("ensemble member '{}' listed twice", registry.at(pos).name()));
        }
        ind.members[pos] = true;
    }
    validate_individual(ind, registry.size());
    return ind;
}

std::optional<double> FitnessCache::find(const Individual& ind, std::uint64_t eval_seed) const
{
    std::lock_guard lock(mutex_);
    const auto it = values_.find({ eval_seed, ind });
    if (it == values_.end()) {
        return std::nullopt;
    }
    ++hits_;
    return it->second;
}

double FitnessCache::insert(const Individual& ind, std::uint64_t eval_seed, double rmse)
{
    std::lock_guard lock(mutex_);
    return values_.try_emplace({ eval_seed, ind }, rmse).first->second;
}

std::size_t FitnessCache::size() const
{
    std::lock_guard lock(mutex_);
    return values_.size();
}

std::size_t FitnessCache::hits() const
{
    std::lock_guard lock(mutex_);
    return hits_;
}

double genome_rmse(const Individual& ind, const Dataset& data, const GAConfig& cfg, const Registry& registry,
                   FitnessCache& cache, std::uint64_t eval_seed, Exec exec)
{
    if (const auto hit = cache.find(ind, eval_seed)) {
        return *hit;
    }
    const TrainSpec spec { decode_genome(ind, registry) };
    Rng rng(eval_seed);
    EvalOptions options;
    options.mean_reference = false;
    options.exec = exec;
    double value = 0.0;
    try {
        value = cfg.mode == FitnessMode::CrossValidation
            ? cross_validate(spec, data, cfg.cv_folds, rng, options).pooled_rmse
            : proportional_eval(spec, data, cfg.split_ratio, rng, options).pooled_rmse;
    } catch (const Error& e) {
        throw TrainingError(fmt::format("fitness of genome {}: {}", ind.encode(), e.what()));
    }
    return cache.insert(ind, eval_seed, value);
}

std::uint64_t evaluation_seed(const GAConfig& cfg)
{
    return derive_seed(cfg.seed, "fitness");
}

double fitness(const Individual& ind, const Dataset& data, const GAConfig& cfg, const Registry& registry,
               FitnessCache& cache)
{
    return fitness_from_rmse(genome_rmse(ind, data, cfg, registry, cache, evaluation_seed(cfg)));
}

namespace {

std::vector<std::size_t> rank_by_error(std::span<const double> errors)
{
    std::vector<std::size_t> rank(errors.size());
    std::iota(rank.begin(), rank.end(), 0);
    std::stable_sort(rank.begin(), rank.end(), [&](std::size_t a, std::size_t b) { return errors[a] < errors[b]; });
    return rank;
}

} // namespace

std::vector<Individual> next_generation(const std::vector<Individual>& pop, std::span<const double> errors,
                                        const GAConfig& cfg, std::size_t registry_size, Rng& rng)
{
    if (pop.size() != errors.size() || pop.size() != cfg.population) {
        throw ConfigError(fmt::format("generation of {} genomes with {} errors, population size {}", pop.size(),
                                      errors.size(), cfg.population));
    }
    const std::size_t bl = registry_size;
    const std::size_t children = cfg.population - cfg.elite;
    const std::size_t pairs = children / 2;
    const auto rank = rank_by_error(errors);
    std::vector<double> fit(errors.size());
    std::transform(errors.begin(), errors.end(), fit.begin(), fitness_from_rmse);

    const auto picks = roulette_select(fit, 2 * pairs, rng);
    std::vector<Individual> offspring;
    for (std::size_t i = 0; i < pairs; ++i) {
        const auto& a = pop[picks[2 * i]];
        const auto& b = pop[picks[2 * i + 1]];
        offspring.push_back(crossover(a, b, rng));
        offspring.push_back(crossover(b, a, rng));
    }

    std::vector<Individual> next;
    for (std::size_t e = 0; e < cfg.elite; ++e) {
        next.push_back(pop[rank[e]]);
    }
    for (auto& child : offspring) {
        if (uniform01(rng) < cfg.pm_m) child = mutate_m(std::move(child), bl, rng);
        if (uniform01(rng) < cfg.pm_v) child = mutate_v(std::move(child), rng);
        if (cfg.size_limit) child = enforce_size_limit(std::move(child), *cfg.size_limit, rng);
        next.push_back(std::move(child));
    }
    // Odd S - E: the unpaired slot gets a mutated clone of the best.
    if (children % 2 == 1) {
        Individual clone = pop[rank[0]];
        if (uniform01(rng) < cfg.pm_m) clone = mutate_m(std::move(clone), bl, rng);
        clone = mutate_v(std::move(clone), rng);
        if (cfg.size_limit) clone = enforce_size_limit(std::move(clone), *cfg.size_limit, rng);
        next.push_back(std::move(clone));
    }
    return next;
}

EvolutionTrace ga_run(const Dataset& data, const GAConfig& cfg, const Registry& registry, Exec exec,
                      const ProgressCallback& progress)
{
    cfg.validate(registry.size());
    const std::size_t bl = registry.size();
    Rng rng(derive_seed(cfg.seed, "ga"));

    std::optional<Dataset> reduced;
    if (cfg.fitness_fraction < 1.0) {
        Rng sub_rng(derive_seed(cfg.seed, "fitness-subsample"));
        reduced = subsample(data, cfg.fitness_fraction, sub_rng);
    }
    const Dataset& fit_data = reduced ? *reduced : data;

    std::vector<Individual> pop;
    for (const auto& seed : cfg.initial) {
        pop.push_back(cfg.size_limit ? enforce_size_limit(seed, *cfg.size_limit, rng) : seed);
    }
    while (pop.size() < cfg.population) {
        pop.push_back(random_individual(bl, cfg.size_limit, rng));
    }

    FitnessCache cache;
    EvolutionTrace trace;

    for (int it = 1; it <= cfg.max_iterations; ++it) {
        const auto eval_seed = evaluation_seed(cfg);

        // Evaluate each distinct uncached genome once, in parallel.
        std::vector<Individual> pending;
        {
            std::set<Individual> seen;
            for (const auto& ind : pop) {
                if (seen.insert(ind).second && !cache.find(ind, eval_seed)) {
                    pending.push_back(ind);
                }
            }
        }
        parallel_for(
            pending.size(),
            [&](std::size_t i) { genome_rmse(pending[i], fit_data, cfg, registry, cache, eval_seed, exec); }, exec);
        trace.evaluations += pending.size();

        std::vector<double> errors(pop.size());
        for (std::size_t i = 0; i < pop.size(); ++i) {
            errors[i] = *cache.find(pop[i], eval_seed);
        }
        const auto rank = rank_by_error(errors);

        IterationRecord rec;
        rec.iteration = it;
        rec.best_rmse = errors[rank[0]];
        rec.mean_rmse = std::accumulate(errors.begin(), errors.end(), 0.0) / static_cast<double>(errors.size());
        rec.best = pop[rank[0]];
        if (trace.iterations.empty() || rec.best_rmse < trace.best_rmse) {
            trace.best = rec.best;
            trace.best_rmse = rec.best_rmse;
        }
        trace.last_best = rec.best;
        trace.iterations.push_back(rec);
        if (progress) {
            progress(rec);
        }

        pop = next_generation(pop, errors, cfg, bl, rng);
    }
    return trace;
}

void write_trace_csv(const EvolutionTrace& trace, std::ostream& out)
{
    out << "iteration,best_rmse,mean_rmse,best_genome\n";
    for (const auto& r : trace.iterations) {
        out << fmt::format("{},{:.17g},{:.17g},{}\n", r.iteration, r.best_rmse, r.mean_rmse, r.best.encode());
    }
}

} // namespace stackevo
