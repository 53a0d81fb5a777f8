#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "cheby/harness.hpp"
#include "helpers.hpp"

using namespace cheby;
namespace fs = std::filesystem;

TEST_CASE("accuracy is the percentage of matching predictions") {
    CHECK(accuracy({0, 1, 1}, {0, 1, 0}) == Catch::Approx(200.0 / 3.0));
    CHECK(accuracy({2, 0}, {2, 0}) == 100.0);
    CHECK_THROWS_AS(accuracy({}, {}), std::invalid_argument);
    CHECK_THROWS_AS(accuracy({0}, {0, 1}), std::invalid_argument);
}

TEST_CASE("macro f1 averages per-class f1 with zero-denominator classes scoring zero") {
    CHECK(macro_f1({0, 1, 0, 1}, {0, 1, 0, 1}, 2) == 100.0);
    // both classes: P and R cross over, each F1 = 2/3
    CHECK(macro_f1({0, 0, 1}, {0, 1, 1}, 2) == Catch::Approx(200.0 / 3.0));
    // everything predicted wrong; every precision or recall hits a 0/0
    CHECK(macro_f1({1, 1}, {0, 0}, 2) == 0.0);
    CHECK_THROWS_AS(macro_f1({5}, {0}, 2), std::out_of_range);
    CHECK_THROWS_AS(macro_f1({}, {}, 2), std::invalid_argument);
}

TEST_CASE("per-neuron weight counts by decomposition family") {
    CHECK(param_count(Decomposition::Chebyshev, 20, 3) == 80);
    CHECK(param_count(Decomposition::Gaussian, 20, 3) == 240);
    CHECK(param_count(Decomposition::Fourier, 20, 3) == 160);
    CHECK(param_count(Decomposition::Legendre, 20, 3) == 80);
    CHECK(param_count(Decomposition::Dense, 20, 3) == 20);
    CHECK_THROWS_AS(param_count(Decomposition::Dense, 0, 3), std::invalid_argument);
    CHECK(decomposition_from_string("cheby") == Decomposition::Chebyshev);
    CHECK_THROWS_AS(decomposition_from_string("wavelet"), std::invalid_argument);
}

TEST_CASE("the comparison protocol reports per-repeat statistics") {
    Dataset ds = make_xor(60, 3);
    ExperimentConfig cfg;
    cfg.epochs = 150;
    cfg.repeats = 3;
    cfg.k = 2;
    cfg.lr = 0.01;
    cfg.seed = 11;
    CompareResult res = run_experiment(cfg, ds);

    for (const RunResult* r : {&res.mlp, &res.cheby}) {
        CHECK(r->accuracies.size() + r->failed.size() == cfg.repeats);
        REQUIRE_FALSE(r->accuracies.empty());
        double mx = *std::max_element(r->accuracies.begin(), r->accuracies.end());
        CHECK(r->best == mx);
        CHECK(r->wall_seconds > 0.0);
        CHECK(r->best_macro_f1 >= 0.0);
        CHECK(r->best_macro_f1 <= 100.0);
    }
    // 2 -> {4,2} -> 2, k=2
    CHECK(res.cheby.parameters == 4 * 2 * 3 + 4 + 2 * 4 * 3 + 2 + 2 * 2 * 3 + 2);
    CHECK(res.mlp.parameters == 4 * 2 + 4 + 2 * 4 + 2 + 2 * 2 + 2);
    CHECK(res.diff == res.cheby.best - res.mlp.best);

    ExperimentConfig one = cfg;
    one.repeats = 1;
    CompareResult r1 = run_experiment(one, ds);
    CHECK(r1.cheby.best == r1.cheby.mean);
    CHECK(r1.cheby.stddev == 0.0);
}

TEST_CASE("config validation rejects degenerate settings") {
    ExperimentConfig cfg;
    cfg.epochs = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = ExperimentConfig{};
    cfg.train_fraction = 1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = ExperimentConfig{};
    cfg.lr = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("result documents are byte-identical across reruns") {
    Dataset ds = make_xor(60, 3);
    ExperimentConfig cfg;
    cfg.epochs = 60;
    cfg.repeats = 2;
    cfg.seed = 5;
    cfg.lr = 0.01;

    CompareResult a = run_experiment(cfg, ds);
    CompareResult b = run_experiment(cfg, ds);
    PreparedData data = prepare_data(ds, cfg.train_fraction, cfg.seed);
    DatasetInfo info = describe("xor", ds, data);
    std::string da = compare_document(cfg, info, a).dump(2);
    std::string db = compare_document(cfg, info, b).dump(2);
    CHECK(da == db);
    // wall-clock never enters the document
    CHECK(da.find("wall") == std::string::npos);
    CHECK(environment_stamp().rfind("gcc ", 0) == 0);
}

TEST_CASE("k sweep drops duplicate orders with a warning") {
    Dataset ds = make_xor(60, 3);
    ExperimentConfig cfg;
    cfg.epochs = 30;
    cfg.repeats = 1;
    cfg.lr = 0.01;
    std::vector<std::string> warnings;
    auto rows = k_sweep(cfg, ds, {1, 1, 2}, &warnings);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].k == 1);
    CHECK(rows[1].k == 2);
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("k=1") != std::string::npos);
    CHECK_THROWS_AS(k_sweep(cfg, ds, {}, nullptr), std::invalid_argument);

    std::ostringstream csv;
    sweep_to_csv(csv, rows);
    CHECK(csv.str().rfind("k,cheby_parameters,mlp_parameters,cheby_best,mlp_best,cheby_f1,mlp_f1\n",
                          0) == 0);
}

namespace {

std::vector<std::string> lines_of(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string line;
    while (std::getline(in, line)) out.push_back(line);
    return out;
}

} // namespace

TEST_CASE("boundary export walks the lattice and flags misclassified test points") {
    // constant predictor: always class 0
    Network net;
    DenseLayer d(2, 2);
    d.b[0] = 1.0;
    net.add(d);

    Dataset test;
    test.X = Matrix(2, 2);
    test.X(0, 0) = 0.25; test.X(0, 1) = -0.5;
    test.X(1, 0) = -0.75; test.X(1, 1) = 0.5;
    test.y = {0, 1};
    test.classes = 2;
    test.feature_names = {"x", "y"};
    test.label_values = {0, 1};

    std::ostringstream out;
    export_boundary_grid(out, net, nullptr, test, 3);
    auto lines = lines_of(out.str());
    REQUIRE(lines.size() == 1 + 9 + 2);
    CHECK(lines[0] == "kind,x,y,true,predicted,misclassified");
    for (const char* x : {"-1", "0", "1"})
        for (const char* y : {"-1", "0", "1"}) {
            std::string want = std::string("grid,") + x + "," + y + ",,0,";
            CHECK(std::count(lines.begin(), lines.end(), want) == 1);
        }
    CHECK(lines[10] == "test,0.25,-0.5,0,0,0");
    CHECK(lines[11] == "test,-0.75,0.5,1,0,1");

    CHECK_THROWS_AS(export_boundary_grid(out, net, nullptr, test, 1), std::invalid_argument);
    CHECK_THROWS_AS(export_boundary_grid(out, net, nullptr, test, 3, 0, 0), std::invalid_argument);
}

TEST_CASE("weight-curve export tabulates the per-connection profiles") {
    Network net;
    ChebyAdaptiveLayer linear(1, 1, 1, ChebyMode::WeightForm, InputMap::Identity);
    linear.c(0, 0, 1) = 1.0; // w(x) = T_1(x) = x
    net.add(linear);

    std::ostringstream out;
    export_weight_curves(out, net, 0, 3);
    auto lines = lines_of(out.str());
    REQUIRE(lines.size() == 4);
    CHECK(lines[0] == "output,input,x,w");
    CHECK(lines[1] == "0,0,-1,-1");
    CHECK(lines[2] == "0,0,0,0");
    CHECK(lines[3] == "0,0,1,1");

    Network constant;
    ChebyAdaptiveLayer flat(1, 1, 2, ChebyMode::WeightForm, InputMap::Identity);
    flat.c(0, 0, 0) = 2.5;
    constant.add(flat);
    std::ostringstream out2;
    export_weight_curves(out2, constant, 0, 2);
    auto lines2 = lines_of(out2.str());
    CHECK(lines2[1] == "0,0,-1,2.5");
    CHECK(lines2[2] == "0,0,1,2.5");

    Network dense;
    dense.add(DenseLayer(2, 2));
    std::ostringstream sink;
    CHECK_THROWS_AS(export_weight_curves(sink, dense, 0, 3), std::invalid_argument);
    CHECK_THROWS_AS(export_weight_curves(sink, net, 5, 3), std::invalid_argument);
    CHECK_THROWS_AS(export_weight_curves(sink, net, 0, 1), std::invalid_argument);
}

TEST_CASE("the bench produces one dense row and one adaptive row per k") {
    ExperimentConfig cfg;
    cfg.seed = 1;
    auto rows = bench_timing(cfg, {3}, {0, 1}, 8, 2);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].model == "mlp");
    CHECK(rows[0].k == 0);
    CHECK(rows[1].model == "cheby");
    CHECK(rows[1].k == 0);
    CHECK(rows[2].model == "cheby");
    CHECK(rows[2].k == 1);
    for (const auto& r : rows) {
        CHECK(r.features == 3);
        CHECK(r.train_s_per_batch >= 0.0);
        CHECK(r.infer_s_per_batch >= 0.0);
        CHECK(std::isfinite(r.train_s_per_batch));
    }
    std::ostringstream csv;
    bench_to_csv(csv, rows);
    CHECK(csv.str().rfind("model,features,k,train_s_per_batch,infer_s_per_batch\n", 0) == 0);
    CHECK_THROWS_AS(bench_timing(cfg, {}, {0}, 8, 2), std::invalid_argument);
}

TEST_CASE("model files round-trip every parameter bit") {
    Network net = make_cheby_net(3, {4}, 2, 3, ChebyMode::ExpansionForm);
    init_parameters(net, 123);
    Matrix fake(2, 3);
    fake(0, 0) = -2.0; fake(0, 1) = 0.1; fake(0, 2) = 5.0;
    fake(1, 0) = 3.0; fake(1, 1) = 0.7; fake(1, 2) = 9.0;
    Scaler s = fit_scaler(fake);

    fs::path p = fs::temp_directory_path() / "cheby_test_model.json";
    save_model(p.string(), net, &s);
    ModelFile back = load_model(p.string());
    std::error_code ec;
    fs::remove(p, ec);

    REQUIRE(back.net.layers.size() == net.layers.size());
    for (std::size_t li = 0; li < net.layers.size(); ++li) {
        const auto& a = std::get<ChebyAdaptiveLayer>(net.layers[li]);
        const auto& b = std::get<ChebyAdaptiveLayer>(back.net.layers[li]);
        CHECK(a.k == b.k);
        CHECK(a.mode == b.mode);
        CHECK(a.input_map == b.input_map);
        REQUIRE(a.C.size() == b.C.size());
        for (std::size_t i = 0; i < a.C.size(); ++i) REQUIRE(a.C[i] == b.C[i]);
        for (std::size_t i = 0; i < a.b.size(); ++i) REQUIRE(a.b[i] == b.b[i]);
    }
    REQUIRE(back.scaler.has_value());
    CHECK(back.scaler->lo == s.lo);
    CHECK(back.scaler->hi == s.hi);

    CHECK_THROWS_AS(load_model("/nonexistent/model.json"), std::runtime_error);
    nlohmann::json bad = model_to_json(net, nullptr);
    bad["format_version"] = 99;
    CHECK_THROWS_AS(model_from_json(bad), std::runtime_error);
    nlohmann::json mangled = model_to_json(net, nullptr);
    mangled["layers"][0]["type"] = "conv";
    CHECK_THROWS_AS(model_from_json(mangled), std::runtime_error);
}

TEST_CASE("the tau sweep picks the strongest compression that holds accuracy") {
    Dataset ds = make_rings(120, 0.05, 6);
    PreparedData data = prepare_data(ds, 0.8, 6);
    Network net = make_cheby_net(2, {4}, 2, 3);
    init_parameters(net, 6);
    TrainConfig tc;
    tc.epochs = 250;
    tc.lr = 0.01;
    train_network(net, data.train_X, data.train_y, tc);

    TrainConfig ft;
    ft.epochs = 50;
    ft.lr = 0.001;
    PruneRunResult res = prune_run(net, data, PruneStrategy::Threshold,
                                   {TauSpec::absolute(0.0), TauSpec::percentile(50.0)}, ft);
    REQUIRE(res.candidates.size() == 2);
    CHECK_FALSE(res.candidates[0].diverged);
    CHECK(res.candidates[0].report.compression == 0.0);

    // replicate the documented choice rule against the reported numbers
    const auto& c1 = res.candidates[1];
    bool c1_ok = !c1.diverged && c1.report.accuracy_after >= c1.report.accuracy_before - 1.0;
    CHECK(res.chosen == (c1_ok ? 1UL : 0UL));

    CHECK_THROWS_AS(prune_run(net, data, PruneStrategy::Threshold, {}, ft),
                    std::invalid_argument);
}
