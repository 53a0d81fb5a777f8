#pragma once

// Experiment harness: the best-of-N comparison protocol, k sweeps,
// figure-data exporters, the timing bench, and structured result
// documents. Documents are deterministic for a fixed (config, dataset,
// seed): wall-clock timings are returned to the caller for display but
// never serialized.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cheby/data.hpp"
#include "cheby/metrics.hpp"
#include "cheby/model_io.hpp"
#include "cheby/network.hpp"
#include "cheby/prune.hpp"
#include "cheby/train.hpp"

namespace cheby {

struct ExperimentConfig {
    std::vector<std::size_t> hidden = {4, 2};
    double lr = 0.001;
    std::size_t epochs = 500;
    std::size_t repeats = 10;
    std::size_t k = 3;
    ChebyMode mode = ChebyMode::WeightForm;
    std::uint64_t seed = 0;
    double train_fraction = 0.8;
    std::size_t batch_size = 0; // 0 = full batch

    void validate() const {
        if (epochs == 0 || repeats == 0) throw std::invalid_argument("config: counts must be positive");
        if (!(train_fraction > 0.0) || !(train_fraction < 1.0))
            throw std::invalid_argument("config: train_fraction must be in (0, 1)");
        if (!(lr > 0.0)) throw std::invalid_argument("config: lr must be positive");
    }
};

struct RunResult {
    std::vector<double> accuracies;   // successful repeats, percent
    std::vector<std::size_t> failed;  // repeat indices with non-finite training
    double best = 0.0;
    double mean = 0.0;
    double stddev = 0.0; // population
    double best_macro_f1 = 0.0;
    std::size_t parameters = 0;
    double wall_seconds = 0.0; // display only, never serialized
    Network best_net;
};

struct CompareResult {
    RunResult mlp;
    RunResult cheby;
    double diff = 0.0; // cheby.best - mlp.best
};

// Split, fitted scaler, and scaled matrices shared by every repeat.
struct PreparedData {
    SplitResult split;
    Scaler scaler;
    Matrix train_X, test_X;
    std::vector<int> train_y, test_y;
    std::size_t classes = 0;
};

inline PreparedData prepare_data(const Dataset& ds, double train_fraction, std::uint64_t seed) {
    PreparedData p;
    p.split = stratified_split(ds, train_fraction, seed);
    p.scaler = fit_scaler(p.split.train.X);
    p.train_X = apply_scaler(p.scaler, p.split.train.X);
    p.test_X = apply_scaler(p.scaler, p.split.test.X);
    p.train_y = p.split.train.y;
    p.test_y = p.split.test.y;
    p.classes = ds.classes;
    return p;
}

namespace detail {

inline bool net_finite(const Network& net) {
    for (const auto& layer : net.layers) {
        const std::vector<double>* p;
        const std::vector<double>* b;
        if (const auto* d = std::get_if<DenseLayer>(&layer)) { p = &d->W; b = &d->b; }
        else {
            const auto& c = std::get<ChebyAdaptiveLayer>(layer);
            p = &c.C; b = &c.b;
        }
        for (double v : *p)
            if (!std::isfinite(v)) return false;
        for (double v : *b)
            if (!std::isfinite(v)) return false;
    }
    return true;
}

inline bool log_finite(const TrainLog& log) {
    for (double l : log.epoch_loss)
        if (!std::isfinite(l)) return false;
    return true;
}

} // namespace detail

/// Run the best-of-`repeats` protocol for one architecture factory.
/// Repeat r initializes and shuffles from seed + r; a repeat whose
/// training goes non-finite is recorded as failed and excluded from the
/// statistics.
template <typename MakeNet>
RunResult run_repeats(const ExperimentConfig& cfg, const PreparedData& data, MakeNet&& make_net) {
    RunResult res;
    auto t0 = std::chrono::steady_clock::now();
    bool have_best = false;
    for (std::size_t r = 0; r < cfg.repeats; ++r) {
        Network net = make_net();
        const std::uint64_t repeat_seed = cfg.seed + r;
        init_parameters(net, repeat_seed);
        TrainConfig tc;
        tc.epochs = cfg.epochs;
        tc.lr = cfg.lr;
        tc.batch_size = cfg.batch_size;
        tc.shuffle_seed = repeat_seed;
        TrainLog log = train_network(net, data.train_X, data.train_y, tc);
        if (!detail::log_finite(log) || !detail::net_finite(net)) {
            res.failed.push_back(r);
            continue;
        }
        double acc = accuracy(predict(net, data.test_X), data.test_y);
        res.accuracies.push_back(acc);
        if (!have_best || acc > res.best) {
            res.best = acc;
            res.best_net = std::move(net);
            have_best = true;
        }
    }
    if (!res.accuracies.empty()) {
        double sum = 0.0;
        for (double a : res.accuracies) sum += a;
        res.mean = sum / static_cast<double>(res.accuracies.size());
        double var = 0.0;
        for (double a : res.accuracies) var += (a - res.mean) * (a - res.mean);
        res.stddev = std::sqrt(var / static_cast<double>(res.accuracies.size()));
        res.best_macro_f1 = macro_f1(predict(res.best_net, data.test_X), data.test_y, data.classes);
        res.parameters = res.best_net.parameter_count();
    }
    res.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

/// Train the dense baseline and the adaptive model under identical
/// split, scaler, and per-repeat seed streams.
inline CompareResult run_experiment(const ExperimentConfig& cfg, const Dataset& ds) {
    cfg.validate();
    PreparedData data = prepare_data(ds, cfg.train_fraction, cfg.seed);
    const std::size_t d = ds.X.cols, c = ds.classes;

    CompareResult out;
    out.mlp = run_repeats(cfg, data, [&] { return make_mlp(d, cfg.hidden, c); });
    out.cheby = run_repeats(cfg, data,
                            [&] { return make_cheby_net(d, cfg.hidden, c, cfg.k, cfg.mode); });
    out.diff = out.cheby.best - out.mlp.best;
    return out;
}

struct KSweepRow {
    std::size_t k = 0;
    CompareResult result;
};

/// run_experiment per k. Duplicate ks are dropped with a warning.
inline std::vector<KSweepRow> k_sweep(const ExperimentConfig& cfg, const Dataset& ds,
                                      const std::vector<std::size_t>& ks,
                                      std::vector<std::string>* warnings = nullptr) {
    if (ks.empty()) throw std::invalid_argument("k_sweep: empty k list");
    std::vector<std::size_t> seen;
    std::vector<KSweepRow> rows;
    for (std::size_t k : ks) {
        if (std::find(seen.begin(), seen.end(), k) != seen.end()) {
            if (warnings)
                warnings->push_back("duplicate k=" + std::to_string(k) + " dropped");
            continue;
        }
        seen.push_back(k);
        ExperimentConfig c = cfg;
        c.k = k;
        rows.push_back({k, run_experiment(c, ds)});
    }
    return rows;
}

inline void sweep_to_csv(std::ostream& out, const std::vector<KSweepRow>& rows) {
    out << "k,cheby_parameters,mlp_parameters,cheby_best,mlp_best,cheby_f1,mlp_f1\n";
    for (const auto& r : rows)
        out << r.k << "," << r.result.cheby.parameters << "," << r.result.mlp.parameters << ","
            << format_double(r.result.cheby.best) << "," << format_double(r.result.mlp.best) << ","
            << format_double(r.result.cheby.best_macro_f1) << ","
            << format_double(r.result.mlp.best_macro_f1) << "\n";
}

/// Lattice predictions over [-1,1]^2 plus per-test-point rows, the data
/// behind decision-boundary plots. Features other than (fa, fb) are held
/// at 0 for the lattice. Coordinates are in scaled space.
inline void export_boundary_grid(std::ostream& out, const Network& net, const Scaler* scaler,
                                 const Dataset& test, std::size_t resolution, std::size_t fa = 0,
                                 std::size_t fb = 1) {
    const std::size_t d = net.input_dim();
    if (resolution < 2) throw std::invalid_argument("export_boundary_grid: resolution must be >= 2");
    if (fa >= d || fb >= d || fa == fb)
        throw std::invalid_argument("export_boundary_grid: bad feature pair");
    if (test.X.cols != d)
        throw std::invalid_argument("export_boundary_grid: dataset has " +
                                    std::to_string(test.X.cols) + " features, model expects " +
                                    std::to_string(d));

    out << "kind,x,y,true,predicted,misclassified\n";
    Matrix grid(resolution * resolution, d, 0.0);
    std::vector<double> coords(resolution);
    for (std::size_t i = 0; i < resolution; ++i)
        coords[i] = -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(resolution - 1);
    for (std::size_t yi = 0; yi < resolution; ++yi)
        for (std::size_t xi = 0; xi < resolution; ++xi) {
            grid(yi * resolution + xi, fa) = coords[xi];
            grid(yi * resolution + xi, fb) = coords[yi];
        }
    std::vector<int> grid_pred = predict(net, grid);
    for (std::size_t r = 0; r < grid.rows; ++r)
        out << "grid," << format_double(grid(r, fa)) << "," << format_double(grid(r, fb)) << ",,"
            << grid_pred[r] << ",\n";

    Matrix scaled = scaler ? apply_scaler(*scaler, test.X) : test.X;
    std::vector<int> pred = predict(net, scaled);
    for (std::size_t r = 0; r < scaled.rows; ++r)
        out << "test," << format_double(scaled(r, fa)) << "," << format_double(scaled(r, fb)) << ","
            << test.y[r] << "," << pred[r] << "," << (pred[r] != test.y[r] ? 1 : 0) << "\n";
}

/// Adaptive-weight profiles w(x) = sum_j C[o][i][j] T_j(x) tabulated on
/// an even grid over [-1,1], one row per (output, input, x).
inline void export_weight_curves(std::ostream& out, const Network& net, std::size_t layer_index,
                                 std::size_t samples) {
    if (layer_index >= net.layers.size())
        throw std::invalid_argument("export_weight_curves: layer index out of range");
    const auto* cl = std::get_if<ChebyAdaptiveLayer>(&net.layers[layer_index]);
    if (!cl)
        throw std::invalid_argument("export_weight_curves: layer " + std::to_string(layer_index) +
                                    " is dense; adaptive weights exist only on adaptive layers");
    if (samples < 2) throw std::invalid_argument("export_weight_curves: need at least 2 samples");

    out << "output,input,x,w\n";
    for (std::size_t s = 0; s < samples; ++s) {
        double x = -1.0 + 2.0 * static_cast<double>(s) / static_cast<double>(samples - 1);
        BasisVector t = cheb_eval_all(cl->k, x);
        for (std::size_t o = 0; o < cl->out; ++o)
            for (std::size_t i = 0; i < cl->in; ++i) {
                double w = 0.0;
                for (std::size_t j = 0; j <= cl->k; ++j) w += cl->c(o, i, j) * t[j];
                out << o << "," << i << "," << format_double(x) << "," << format_double(w) << "\n";
            }
    }
}

struct BenchRow {
    std::string model;
    std::size_t features = 0;
    std::size_t k = 0; // dense rows report 0
    double train_s_per_batch = 0.0;
    double infer_s_per_batch = 0.0;
};

namespace detail {

template <typename Step>
double time_mean_seconds(std::size_t reps, Step&& step) {
    for (int i = 0; i < 3; ++i) step(); // warm-up
    auto t0 = std::chrono::steady_clock::now();
    for (std::size_t i = 0; i < reps; ++i) step();
    auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(t1 - t0).count() / static_cast<double>(reps);
}

inline BenchRow bench_one(const std::string& name, Network net, std::size_t features,
                          std::size_t k, const Matrix& X, const std::vector<int>& y,
                          double lr, std::size_t reps) {
    BenchRow row{name, features, k, 0.0, 0.0};
    AdamConfig acfg;
    acfg.lr = lr;
    std::vector<AdamState> w_state, b_state;
    for (const auto& l : net.layers) {
        w_state.emplace_back(layer_weight_count(l));
        b_state.emplace_back(layer_out(l));
    }
    row.train_s_per_batch = time_mean_seconds(reps, [&] {
        auto [logits, trace] = network_forward(net, X);
        auto [loss, dlogits] = softmax_cross_entropy(logits, y);
        GradientSet grads = network_backward(net, trace, dlogits);
        for (std::size_t li = 0; li < net.layers.size(); ++li) {
            if (auto* d = std::get_if<DenseLayer>(&net.layers[li])) {
                adam_step(d->W, grads.layers[li].dW, w_state[li], acfg);
                adam_step(d->b, grads.layers[li].db, b_state[li], acfg);
            } else {
                auto& c = std::get<ChebyAdaptiveLayer>(net.layers[li]);
                adam_step(c.C, grads.layers[li].dW, w_state[li], acfg);
                adam_step(c.b, grads.layers[li].db, b_state[li], acfg);
            }
        }
    });
    row.infer_s_per_batch = time_mean_seconds(reps, [&] {
        Matrix logits = network_infer(net, X);
        (void)logits;
    });
    return row;
}

} // namespace detail

/// Mean per-batch training and inference time over `reps` repetitions
/// after warm-up, for the dense baseline and the adaptive model at each
/// k, on synthetic batches. Wall-clock data: display-only, never part of
/// deterministic documents.
inline std::vector<BenchRow> bench_timing(const ExperimentConfig& cfg,
                                          const std::vector<std::size_t>& feature_sizes,
                                          const std::vector<std::size_t>& ks,
                                          std::size_t batch = 512, std::size_t reps = 30) {
    if (feature_sizes.empty() || ks.empty())
        throw std::invalid_argument("bench_timing: empty feature or k list");
    std::vector<BenchRow> rows;
    const std::size_t classes = 2;
    for (std::size_t n : feature_sizes) {
        std::mt19937_64 rng(cfg.seed ^ (0x9e3779b97f4a7c15ULL + n));
        std::uniform_real_distribution<double> coord(-1.0, 1.0);
        Matrix X(batch, n);
        for (auto& v : X.data) v = coord(rng);
        std::vector<int> y(batch);
        for (auto& label : y) label = static_cast<int>(rng() % classes);

        Network mlp = make_mlp(n, cfg.hidden, classes);
        init_parameters(mlp, cfg.seed);
        rows.push_back(detail::bench_one("mlp", std::move(mlp), n, 0, X, y, cfg.lr, reps));
        for (std::size_t k : ks) {
            Network net = make_cheby_net(n, cfg.hidden, classes, k, cfg.mode);
            init_parameters(net, cfg.seed);
            rows.push_back(detail::bench_one("cheby", std::move(net), n, k, X, y, cfg.lr, reps));
        }
    }
    return rows;
}

inline void bench_to_csv(std::ostream& out, const std::vector<BenchRow>& rows) {
    out << "model,features,k,train_s_per_batch,infer_s_per_batch\n";
    for (const auto& r : rows)
        out << r.model << "," << r.features << "," << r.k << ","
            << format_double(r.train_s_per_batch) << "," << format_double(r.infer_s_per_batch)
            << "\n";
}

struct PruneCandidate {
    TauSpec tau;
    bool diverged = false;
    PruneReport report;
    Network pruned_net;
    MaskSet mask;
};

struct PruneRunResult {
    PruneStrategy strategy = PruneStrategy::Threshold;
    std::vector<PruneCandidate> candidates;
    std::size_t chosen = 0; // index into candidates
};

/// Evaluate each tau candidate with a fresh copy of the trained network;
/// choose the highest compression whose fine-tuned accuracy stays within
/// one point of the unpruned accuracy, falling back to the most accurate
/// candidate when none qualifies.
inline PruneRunResult prune_run(const Network& trained, const PreparedData& data,
                                PruneStrategy strategy, const std::vector<TauSpec>& taus,
                                const TrainConfig& fine_tune) {
    if (taus.empty()) throw std::invalid_argument("prune_run: no tau candidates");
    PruneRunResult out;
    out.strategy = strategy;
    for (const TauSpec& tau : taus) {
        PruneCandidate cand;
        cand.tau = tau;
        Network net = trained;
        try {
            PruneOutcome po = forward_prune(net, data.train_X, data.train_y, data.test_X,
                                            data.test_y, tau, strategy, fine_tune);
            cand.report = std::move(po.report);
            cand.mask = std::move(po.mask);
            cand.pruned_net = std::move(net);
        } catch (const prune_divergence_error&) {
            cand.diverged = true;
        }
        out.candidates.push_back(std::move(cand));
    }

    bool found = false;
    double best_compression = -1.0, best_acc = -1.0;
    for (std::size_t i = 0; i < out.candidates.size(); ++i) {
        const auto& c = out.candidates[i];
        if (c.diverged) continue;
        if (c.report.accuracy_after >= c.report.accuracy_before - 1.0 &&
            c.report.compression > best_compression) {
            best_compression = c.report.compression;
            out.chosen = i;
            found = true;
        }
    }
    if (!found) {
        for (std::size_t i = 0; i < out.candidates.size(); ++i) {
            const auto& c = out.candidates[i];
            if (!c.diverged && c.report.accuracy_after > best_acc) {
                best_acc = c.report.accuracy_after;
                out.chosen = i;
                found = true;
            }
        }
    }
    if (!found) throw prune_divergence_error("prune_run: every tau candidate diverged");
    return out;
}

// ---- result documents ----------------------------------------------

/// Static per-build stamp; never varies between invocations of one
/// binary, so documents stay byte-identical.
inline std::string environment_stamp() {
    return std::string("gcc ") + __VERSION__;
}

struct DatasetInfo {
    std::string name;
    std::size_t samples = 0;
    std::size_t features = 0;
    std::size_t classes = 0;
    std::size_t train_size = 0;
    std::size_t test_size = 0;
};

inline DatasetInfo describe(const std::string& name, const Dataset& ds, const PreparedData& data) {
    return {name, ds.size(), ds.X.cols, ds.classes, data.split.train.size(),
            data.split.test.size()};
}

inline nlohmann::json config_to_json(const ExperimentConfig& cfg) {
    return {{"hidden", cfg.hidden},
            {"lr", cfg.lr},
            {"epochs", cfg.epochs},
            {"repeats", cfg.repeats},
            {"k", cfg.k},
            {"mode", to_string(cfg.mode)},
            {"seed", cfg.seed},
            {"train_fraction", cfg.train_fraction},
            {"batch_size", cfg.batch_size}};
}

inline nlohmann::json dataset_to_json(const DatasetInfo& info) {
    return {{"name", info.name},
            {"samples", info.samples},
            {"features", info.features},
            {"classes", info.classes},
            {"train_size", info.train_size},
            {"test_size", info.test_size}};
}

inline nlohmann::json run_result_to_json(const RunResult& r) {
    return {{"per_repeat_accuracy", r.accuracies},
            {"failed_repeats", r.failed},
            {"best", r.best},
            {"mean", r.mean},
            {"std", r.stddev},
            {"macro_f1_at_best", r.best_macro_f1},
            {"parameters", r.parameters}};
}

inline nlohmann::json compare_document(const ExperimentConfig& cfg, const DatasetInfo& info,
                                       const CompareResult& res) {
    return {{"schema_version", 1},
            {"command", "compare"},
            {"environment", environment_stamp()},
            {"config", config_to_json(cfg)},
            {"dataset", dataset_to_json(info)},
            {"mlp", run_result_to_json(res.mlp)},
            {"cheby", run_result_to_json(res.cheby)},
            {"diff_best", res.diff}};
}

inline nlohmann::json prune_report_to_json(const PruneReport& r) {
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& l : r.per_layer)
        layers.push_back({{"total", l.total}, {"zeroed", l.zeroed}, {"tau", l.tau}});
    return {{"total", r.total},
            {"zeroed", r.zeroed},
            {"compression", r.compression},
            {"per_layer", layers},
            {"accuracy_before", r.accuracy_before},
            {"accuracy_after", r.accuracy_after}};
}

inline nlohmann::json prune_document(const PruneRunResult& res, const DatasetInfo& info) {
    nlohmann::json cands = nlohmann::json::array();
    for (const auto& c : res.candidates) {
        nlohmann::json jc;
        jc["tau_kind"] = c.tau.kind == TauSpec::Kind::Percentile ? "percentile" : "absolute";
        jc["tau_value"] = c.tau.value;
        jc["diverged"] = c.diverged;
        if (!c.diverged) jc["report"] = prune_report_to_json(c.report);
        cands.push_back(std::move(jc));
    }
    return {{"schema_version", 1},
            {"command", "prune"},
            {"environment", environment_stamp()},
            {"strategy", res.strategy == PruneStrategy::Group ? "group" : "threshold"},
            {"dataset", dataset_to_json(info)},
            {"candidates", cands},
            {"chosen", res.chosen}};
}

} // namespace cheby
