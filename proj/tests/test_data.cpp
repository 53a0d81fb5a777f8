#include <catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "cheby/data.hpp"

using namespace cheby;
namespace fs = std::filesystem;

namespace {

struct TempCsv {
    fs::path path;
    explicit TempCsv(const std::string& text) {
        static int counter = 0;
        path = fs::temp_directory_path() / ("cheby_test_" + std::to_string(counter++) + ".csv");
        std::ofstream out(path);
        out << text;
    }
    ~TempCsv() { std::error_code ec; fs::remove(path, ec); }
};

} // namespace

TEST_CASE("labels are remapped to contiguous ids by sorted value") {
    TempCsv f("a,b,target\n1,2,5\n3,4,5\n5,6,9\n");
    Dataset ds = load_csv(f.path.string());
    REQUIRE(ds.size() == 3);
    CHECK(ds.classes == 2);
    CHECK(ds.y == std::vector<int>{0, 0, 1});
    CHECK(ds.label_values == std::vector<double>{5.0, 9.0});
    CHECK(ds.feature_names == std::vector<std::string>{"a", "b"});
    CHECK(ds.X(2, 0) == 5.0);
}

TEST_CASE("the target column may sit anywhere in the header") {
    TempCsv f("a,target,b\n1,0,2\n3,1,4\n");
    Dataset ds = load_csv(f.path.string());
    CHECK(ds.feature_names == std::vector<std::string>{"a", "b"});
    CHECK(ds.X(0, 1) == 2.0);
    CHECK(ds.y == std::vector<int>{0, 1});
}

TEST_CASE("without a target header the last column is the label") {
    TempCsv f("x,y,label\n0.5,0.25,1\n-0.5,0.75,0\n");
    Dataset ds = load_csv(f.path.string());
    CHECK(ds.feature_names == std::vector<std::string>{"x", "y"});
    CHECK(ds.y == std::vector<int>{1, 0});
}

TEST_CASE("malformed csv files are rejected with a useful message") {
    TempCsv header_only("a,b,target\n");
    CHECK_THROWS_AS(load_csv(header_only.path.string()), std::runtime_error);

    TempCsv bad_cell("a,target\n1,0\nabc,1\n");
    try {
        load_csv(bad_cell.path.string());
        FAIL("expected parse error");
    } catch (const std::runtime_error& e) {
        std::string msg = e.what();
        CHECK(msg.find("line 3") != std::string::npos);
        CHECK(msg.find("column 1") != std::string::npos);
    }

    TempCsv ragged("a,b,target\n1,2,0\n1,2\n");
    CHECK_THROWS_AS(load_csv(ragged.path.string()), std::runtime_error);

    TempCsv one_class("a,target\n1,0\n2,0\n3,0\n");
    CHECK_THROWS_AS(load_csv(one_class.path.string()), std::runtime_error);

    CHECK_THROWS_AS(load_csv("/nonexistent/nowhere.csv"), std::runtime_error);
}

TEST_CASE("save and reload round-trips bit-faithfully") {
    Dataset ds = make_rings(40, 0.05, 3);
    fs::path p = fs::temp_directory_path() / "cheby_test_roundtrip.csv";
    save_csv(p.string(), ds);
    Dataset back = load_csv(p.string());
    REQUIRE(back.size() == ds.size());
    for (std::size_t i = 0; i < ds.X.data.size(); ++i) REQUIRE(back.X.data[i] == ds.X.data[i]);
    CHECK(back.y == ds.y);
    std::error_code ec;
    fs::remove(p, ec);
}

TEST_CASE("scaler maps the training range onto [-1, 1]") {
    Matrix X(3, 2);
    X(0, 0) = 0.0; X(0, 1) = 5.0;
    X(1, 0) = 5.0; X(1, 1) = 5.0;
    X(2, 0) = 10.0; X(2, 1) = 5.0;
    Scaler s = fit_scaler(X);
    Matrix t = apply_scaler(s, X);
    CHECK(t(0, 0) == -1.0);
    CHECK(t(1, 0) == 0.0);
    CHECK(t(2, 0) == 1.0);
    // constant feature collapses to 0
    CHECK(t(0, 1) == 0.0);
    CHECK(t(2, 1) == 0.0);

    Matrix outside(1, 2);
    outside(0, 0) = 20.0;
    outside(0, 1) = 0.0;
    Matrix c = apply_scaler(s, outside);
    CHECK(c(0, 0) == 1.0); // clamped

    CHECK_THROWS_AS(fit_scaler(Matrix(0, 2)), std::invalid_argument);
}

TEST_CASE("scaled values always land inside the basis domain") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> dist(-100, 100);
    Matrix X(50, 3);
    for (double& v : X.data) v = dist(rng);
    Scaler s = fit_scaler(X);
    Matrix t = apply_scaler(s, X);
    for (double v : t.data) {
        REQUIRE(v >= -1.0);
        REQUIRE(v <= 1.0);
    }
}

TEST_CASE("stratified split keeps class proportions") {
    // 10 samples, 5 per class, train_fraction 0.8 -> 8 train (4+4), 2 test (1+1)
    Dataset ds;
    ds.X = Matrix(10, 1);
    for (int i = 0; i < 10; ++i) {
        ds.X(i, 0) = i;
        ds.y.push_back(i < 5 ? 0 : 1);
    }
    ds.classes = 2;
    ds.feature_names = {"x"};
    ds.label_values = {0, 1};

    SplitResult sp = stratified_split(ds, 0.8, 1);
    REQUIRE(sp.train.size() == 8);
    REQUIRE(sp.test.size() == 2);
    auto count = [](const Dataset& d, int c) {
        return std::count(d.y.begin(), d.y.end(), c);
    };
    CHECK(count(sp.train, 0) == 4);
    CHECK(count(sp.train, 1) == 4);
    CHECK(count(sp.test, 0) == 1);
    CHECK(count(sp.test, 1) == 1);
}

TEST_CASE("split is deterministic in the seed and covers the dataset") {
    Dataset ds = make_rings(57, 0.1, 5);
    SplitResult a = stratified_split(ds, 0.7, 9);
    SplitResult b = stratified_split(ds, 0.7, 9);
    REQUIRE(a.train.size() == b.train.size());
    for (std::size_t i = 0; i < a.train.X.data.size(); ++i)
        REQUIRE(a.train.X.data[i] == b.train.X.data[i]);

    // every sample appears exactly once across the two halves
    CHECK(a.train.size() + a.test.size() == ds.size());
    std::multiset<double> orig(ds.X.data.begin(), ds.X.data.end());
    std::multiset<double> got(a.train.X.data.begin(), a.train.X.data.end());
    got.insert(a.test.X.data.begin(), a.test.X.data.end());
    CHECK(got == orig);

    SplitResult c = stratified_split(ds, 0.7, 10);
    bool same = c.train.size() == a.train.size();
    if (same)
        same = std::equal(a.train.X.data.begin(), a.train.X.data.end(), c.train.X.data.begin());
    CHECK_FALSE(same);
}

TEST_CASE("a single-sample class goes to the training half with a warning") {
    Dataset ds;
    ds.X = Matrix(5, 1);
    ds.y = {0, 0, 0, 0, 1};
    for (int i = 0; i < 5; ++i) ds.X(i, 0) = i;
    ds.classes = 2;
    ds.feature_names = {"x"};
    ds.label_values = {0, 1};
    SplitResult sp = stratified_split(ds, 0.5, 3);
    CHECK_FALSE(sp.warnings.empty());
    CHECK(std::count(sp.train.y.begin(), sp.train.y.end(), 1) == 1);
    CHECK(std::count(sp.test.y.begin(), sp.test.y.end(), 1) == 0);

    CHECK_THROWS_AS(stratified_split(ds, 0.0, 3), std::invalid_argument);
    CHECK_THROWS_AS(stratified_split(ds, 1.0, 3), std::invalid_argument);
}

TEST_CASE("rings samples sit on their class radius when noise is zero") {
    Dataset ds = make_rings(64, 0.0, 2);
    REQUIRE(ds.size() == 64);
    CHECK(ds.classes == 2);
    for (std::size_t i = 0; i < 64; ++i) {
        double r = std::hypot(ds.X(i, 0), ds.X(i, 1));
        double base = ds.y[i] == 0 ? 0.4 : 0.85;
        REQUIRE(std::abs(r - base) <= 1e-12);
    }
    CHECK_THROWS_AS(make_rings(7, 0.0, 2), std::invalid_argument);
}

TEST_CASE("noisy rings stay inside the unit square") {
    Dataset ds = make_rings(600, 0.03, 11);
    for (double v : ds.X.data) {
        REQUIRE(v >= -1.0);
        REQUIRE(v <= 1.0);
    }
    // both classes appear
    CHECK(std::count(ds.y.begin(), ds.y.end(), 0) == 300);
    CHECK(std::count(ds.y.begin(), ds.y.end(), 1) == 300);
    // deterministic in the seed
    Dataset again = make_rings(600, 0.03, 11);
    CHECK(std::equal(ds.X.data.begin(), ds.X.data.end(), again.X.data.begin()));
}

TEST_CASE("xor labels follow the sign of the product") {
    Dataset ds = make_xor(400, 7);
    REQUIRE(ds.size() == 400);
    for (std::size_t i = 0; i < 400; ++i) {
        int expected = ds.X(i, 0) * ds.X(i, 1) > 0 ? 1 : 0;
        REQUIRE(ds.y[i] == expected);
    }
    CHECK_THROWS_AS(make_xor(4, 7), std::invalid_argument);
}
