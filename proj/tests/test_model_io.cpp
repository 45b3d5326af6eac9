// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright 2026 The stackevo Authors

#include <sstream>

#include <gtest/gtest.h>

#include "stackevo/ensembles.hpp"
#include "stackevo/error.hpp"
#include "stackevo/model_io.hpp"
#include "test_util.hpp"

using namespace stackevo;
using stackevo::testing::random_dataset;

namespace {

void expect_round_trip(const TrainSpec& spec)
{
    Rng rng(1);
    auto d = random_dataset(60, 3, rng);
    auto model = train(spec, d, rng);
    std::stringstream buf;
    save_model(*model, buf);
    auto back = load_model(buf);
    ASSERT_EQ(back->input_dim(), model->input_dim());
    EXPECT_EQ(back->tag(), model->tag());
    for (int i = 0; i < 100; ++i) {
        std::vector<double> x(3);
        for (auto& v : x) v = uniform_real(rng, -1.5, 1.5);
        EXPECT_NEAR(back->predict(x), model->predict(x), 1e-12) << spec.describe();
    }
}

TrainSpec learner(const char* name) { return make_spec(LearnerSpec::parse(name)); }

} // namespace

TEST(ModelIo, EveryModelKindRoundTrips)
{
    for (const char* name : { "mean", "pls-l2", "knn-k5-a2-euclidean", "rf-n4", "nn-max30-eps0.001-h5",
                              "bagnn-t3-max20-eps0.001-h3" }) {
        expect_round_trip(learner(name));
    }
    expect_round_trip(make_stacking({ learner("mean"), learner("pls-l3"), learner("rf-n3") },
                                    learner("nn-max20-eps0.001-h4"), 3));
    expect_round_trip(make_bagging(make_stacking({ learner("pls-l2") }, learner("mean"), 2), 2));
}

TEST(ModelIo, ExactReproduction)
{
    Rng rng(2);
    auto d = random_dataset(40, 2, rng);
    auto model = train(learner("nn-max50-eps0.001-h6"), d, rng);
    std::stringstream buf;
    save_model(*model, buf);
    auto back = load_model(buf);
    for (std::size_t i = 0; i < d.rows(); ++i) EXPECT_EQ(back->predict(d.row(i)), model->predict(d.row(i)));
}

TEST(ModelIo, RejectsWrongHeader)
{
    std::stringstream bad("not-a-model 1\n");
    EXPECT_THROW(load_model(bad), DataError);
    std::stringstream version("stackevo-model 99\nmean\n");
    try {
        load_model(version);
        FAIL();
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("99"), std::string::npos) << e.what();
    }
    std::stringstream truncated("stackevo-model 1\nknn 3");
    EXPECT_THROW(load_model(truncated), DataError);
}

TEST(ModelIo, MissingFile)
{
    EXPECT_THROW(load_model_file("/nonexistent/model.bin"), DataError);
}
