#include <catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include "cheby/data.hpp"
#include "cheby/prune.hpp"
#include "helpers.hpp"

using namespace cheby;
using namespace testutil;

TEST_CASE("threshold mask zeroes strictly-below-tau magnitudes") {
    std::vector<double> p{0.1, -0.02, 0.5};
    CHECK(threshold_prune(p, 0.15) == std::vector<std::uint8_t>{0, 0, 1});
    CHECK(threshold_prune(p, 0.0) == std::vector<std::uint8_t>{1, 1, 1});
    CHECK(threshold_prune(p, 0.5) == std::vector<std::uint8_t>{0, 0, 1}); // boundary kept
    double inf = std::numeric_limits<double>::infinity();
    CHECK(threshold_prune(p, inf) == std::vector<std::uint8_t>{0, 0, 0});
    CHECK_THROWS_AS(threshold_prune(p, -1.0), std::invalid_argument);
}

TEST_CASE("group norm is the euclidean norm of one coefficient expansion") {
    ChebyAdaptiveLayer layer(2, 1, 1, ChebyMode::WeightForm, InputMap::Identity);
    layer.c(0, 0, 0) = 3.0;
    layer.c(0, 0, 1) = 4.0;
    CHECK(group_norm(layer, 0, 0) == Catch::Approx(5.0));
    CHECK(group_norm(layer, 0, 1) == 0.0);
    CHECK_THROWS_AS(group_norm(layer, 2, 0), std::out_of_range);

    ChebyAdaptiveLayer ones(1, 1, 3, ChebyMode::WeightForm, InputMap::Identity);
    for (std::size_t j = 0; j <= 3; ++j) ones.c(0, 0, j) = 1.0;
    CHECK(group_norm(ones, 0, 0) == Catch::Approx(2.0));
}

TEST_CASE("group pruning removes whole expansions atomically") {
    ChebyAdaptiveLayer layer(2, 1, 1, ChebyMode::WeightForm, InputMap::Identity);
    layer.c(0, 0, 0) = 3.0;
    layer.c(0, 0, 1) = 4.0;   // norm 5
    layer.c(0, 1, 0) = 0.01;
    layer.c(0, 1, 1) = 0.01;  // norm ~0.014
    auto keep = group_prune(layer, 1.0);
    CHECK(keep == std::vector<std::uint8_t>{1, 1, 0, 0});

    // a group with one large and one tiny coefficient survives whole
    ChebyAdaptiveLayer mixed(1, 1, 1, ChebyMode::WeightForm, InputMap::Identity);
    mixed.c(0, 0, 0) = 1e-9;
    mixed.c(0, 0, 1) = 2.0;
    CHECK(group_prune(mixed, 1.0) == std::vector<std::uint8_t>{1, 1});
    CHECK_THROWS_AS(group_prune(mixed, -0.5), std::invalid_argument);
}

TEST_CASE("larger tau never keeps more parameters") {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> dist(-1, 1);
    std::vector<double> p(200);
    for (double& v : p) v = dist(rng);
    std::size_t prev = 0;
    for (double tau : {0.0, 0.1, 0.3, 0.7, 1.5}) {
        auto keep = threshold_prune(p, tau);
        std::size_t zeroed = std::count(keep.begin(), keep.end(), std::uint8_t{0});
        REQUIRE(zeroed >= prev);
        prev = zeroed;
    }
}

TEST_CASE("grouped pruning at k=0 degenerates to thresholding") {
    ChebyAdaptiveLayer layer(3, 2, 0, ChebyMode::WeightForm, InputMap::Identity);
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> dist(-1, 1);
    for (double& v : layer.C) v = dist(rng);
    CHECK(group_prune(layer, 0.4) == threshold_prune(layer.C, 0.4));
}

TEST_CASE("nearest-rank percentile of magnitudes") {
    std::vector<double> v{-0.4, 0.1, 0.3, -0.2};
    // sorted magnitudes: 0.1 0.2 0.3 0.4
    CHECK(percentile_magnitude(v, 50.0) == Catch::Approx(0.3));
    CHECK(percentile_magnitude(v, 0.0) == Catch::Approx(0.1));
    CHECK(percentile_magnitude(v, 100.0) == Catch::Approx(0.4));
    CHECK_THROWS_AS(percentile_magnitude({}, 50.0), std::invalid_argument);
    CHECK_THROWS_AS(percentile_magnitude(v, 101.0), std::invalid_argument);
}

namespace {

struct PruneFixture {
    Dataset train;
    Dataset test;
    Network net;

    PruneFixture() {
        Dataset ds = make_rings(200, 0.03, 4);
        SplitResult sp = stratified_split(ds, 0.8, 4);
        Scaler s = fit_scaler(sp.train.X);
        sp.train.X = apply_scaler(s, sp.train.X);
        sp.test.X = apply_scaler(s, sp.test.X);
        train = sp.train;
        test = sp.test;
        net = make_cheby_net(2, {4, 2}, 2, 3);
        init_parameters(net, 4);
        TrainConfig cfg;
        cfg.epochs = 300;
        cfg.lr = 0.01;
        train_network(net, train.X, train.y, cfg);
    }
};

} // namespace

TEST_CASE("pruning at tau zero changes nothing") {
    PruneFixture fx;
    Network net = fx.net;
    double acc_before = accuracy(predict(net, fx.test.X), fx.test.y);
    TrainConfig ft;
    ft.epochs = 100;
    ft.lr = 0.001;
    PruneOutcome out = forward_prune(net, fx.train.X, fx.train.y, fx.test.X, fx.test.y,
                                     TauSpec::absolute(0.0), PruneStrategy::Threshold, ft);
    CHECK(out.report.zeroed == 0);
    CHECK(out.report.compression == 0.0);
    CHECK(out.report.accuracy_after == acc_before);
    // nothing was masked, so no fine-tune ran and the parameters are untouched
    const auto& a = std::get<ChebyAdaptiveLayer>(net.layers[0]);
    const auto& b = std::get<ChebyAdaptiveLayer>(fx.net.layers[0]);
    CHECK(std::equal(a.C.begin(), a.C.end(), b.C.begin()));
}

TEST_CASE("percentile pruning reaches at least its own percentile") {
    PruneFixture fx;
    Network net = fx.net;
    TrainConfig ft;
    ft.epochs = 100;
    ft.lr = 0.001;
    PruneOutcome out = forward_prune(net, fx.train.X, fx.train.y, fx.test.X, fx.test.y,
                                     TauSpec::percentile(50.0), PruneStrategy::Threshold, ft);
    CHECK(out.report.compression >= 50.0);
    CHECK(out.report.total == 4 * 2 * 4 + 2 * 4 * 4 + 2 * 2 * 4);
    CHECK(out.report.zeroed == out.mask.zero_count());

    // masked parameters stay exactly zero through all the fine-tuning
    for (std::size_t li = 0; li < net.layers.size(); ++li) {
        const auto& params = std::get<ChebyAdaptiveLayer>(net.layers[li]).C;
        for (std::size_t i = 0; i < params.size(); ++i)
            if (!out.mask.keep[li][i]) REQUIRE(params[i] == 0.0);
    }
}

TEST_CASE("a partial order prunes only the named layers") {
    PruneFixture fx;
    Network net = fx.net;
    TrainConfig ft;
    ft.epochs = 20;
    ft.lr = 0.001;
    PruneOutcome out = forward_prune(net, fx.train.X, fx.train.y, fx.test.X, fx.test.y,
                                     TauSpec::percentile(50.0), PruneStrategy::Group, ft, {0});
    CHECK(out.report.per_layer[0].zeroed > 0);
    CHECK(out.report.per_layer[1].zeroed == 0);
    CHECK(out.report.per_layer[2].zeroed == 0);

    Network net2 = fx.net;
    CHECK_THROWS_AS(forward_prune(net2, fx.train.X, fx.train.y, fx.test.X, fx.test.y,
                                  TauSpec::percentile(50.0), PruneStrategy::Group, ft, {0, 0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(forward_prune(net2, fx.train.X, fx.train.y, fx.test.X, fx.test.y,
                                  TauSpec::percentile(50.0), PruneStrategy::Group, ft, {9}),
                    std::invalid_argument);
}

TEST_CASE("a diverging fine-tune restores the checkpoint and reports it") {
    PruneFixture fx;
    Network net = fx.net;
    Network before = net;
    TrainConfig ft;
    ft.epochs = 50;
    // adam's step size is bounded by lr, so only a non-finite lr is
    // guaranteed to poison the parameters on the very first step
    ft.lr = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(forward_prune(net, fx.train.X, fx.train.y, fx.test.X, fx.test.y,
                                  TauSpec::percentile(50.0), PruneStrategy::Threshold, ft),
                    prune_divergence_error);
    // the first stage diverges, so the restored state is the input state
    const auto& a = std::get<ChebyAdaptiveLayer>(net.layers[0]);
    const auto& b = std::get<ChebyAdaptiveLayer>(before.layers[0]);
    CHECK(std::equal(a.C.begin(), a.C.end(), b.C.begin()));
}
