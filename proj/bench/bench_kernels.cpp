// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright 2026 The stackevo Authors

// Serial reference vs OpenMP path for the distributed kernels.
// Arg 0 selects Exec::Serial, arg 1 Exec::Parallel.

#include <benchmark/benchmark.h>

#include "stackevo/data.hpp"
#include "stackevo/ensembles.hpp"
#include "stackevo/eval.hpp"
#include "stackevo/learners.hpp"
#include "stackevo/parallel.hpp"
#include "stackevo/random.hpp"

namespace {

using namespace stackevo;

Exec exec_of(const benchmark::State& state) { return state.range(0) == 0 ? Exec::Serial : Exec::Parallel; }

const Dataset& bench_data()
{
    static const Dataset data = [] {
        Rng rng = make_rng(7);
        return synth_generate({Generator::Heterogeneous, 0.3, 2000, 0}, rng);
    }();
    return data;
}

void BM_KnnPredictBatch(benchmark::State& state)
{
    const Dataset& data = bench_data();
    const ModelPtr model = train_knn(data, 30, 10.0, Metric::Euclidean);
    for (auto _ : state) {
        benchmark::DoNotOptimize(model->predict_batch(data.features(), exec_of(state)));
    }
}
BENCHMARK(BM_KnnPredictBatch)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_ForestTrain(benchmark::State& state)
{
    const Dataset& data = bench_data();
    for (auto _ : state) {
        Rng rng = make_rng(11);
        benchmark::DoNotOptimize(train_random_forest(data, 50, rng, 5, 0, exec_of(state)));
    }
}
BENCHMARK(BM_ForestTrain)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_CrossValidate(benchmark::State& state)
{
    const Dataset& data = bench_data();
    const TrainSpec spec = make_spec(LearnerSpec::parse("rf-n25"));
    EvalOptions options;
    options.exec = exec_of(state);
    for (auto _ : state) {
        Rng rng = make_rng(13);
        benchmark::DoNotOptimize(cross_validate(spec, data, 10, rng, options));
    }
}
BENCHMARK(BM_CrossValidate)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
