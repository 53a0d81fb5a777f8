// chebynet: train/evaluate adaptive-weight networks, export figure data,
// and fit multivariate Chebyshev series.
//
// Every subcommand exits 0 on success and 1 with a diagnostic on stderr
// otherwise. Result documents are deterministic given identical flags;
// wall-clock timings go to stdout only.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cheby/harness.hpp"
#include "cheby/multicheb.hpp"

namespace fs = std::filesystem;
using namespace cheby;

namespace {

std::string dataset_name(const std::string& path) {
    return fs::path(path).stem().string();
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
    f << text;
    if (!f) throw std::runtime_error("write to " + path.string() + " failed");
}

fs::path ensure_out_dir(const std::string& out) {
    fs::path dir(out);
    fs::create_directories(dir);
    return dir;
}

void print_split_warnings(const PreparedData& data) {
    for (const auto& w : data.split.warnings) std::cerr << "warning: " << w << "\n";
}

struct CommonFlags {
    std::string data;
    std::string out = ".";
    std::uint64_t seed = 0;
    ExperimentConfig cfg;
    std::string mode = "weight";

    void attach(CLI::App* cmd, bool needs_data) {
        auto* d = cmd->add_option("--data", data, "input CSV (header row; \"target\" or last column = labels)");
        if (needs_data) d->required();
        cmd->add_option("--out", out, "output directory")->capture_default_str();
        cmd->add_option("--seed", seed, "base RNG seed")->capture_default_str();
        cmd->add_option("--k", cfg.k, "polynomial order")->capture_default_str();
        cmd->add_option("--mode", mode, "adaptive layer mode: weight|expansion")
            ->check(CLI::IsMember({"weight", "expansion"}))
            ->capture_default_str();
        cmd->add_option("--hidden", cfg.hidden, "hidden layer sizes")
            ->delimiter(',')
            ->capture_default_str();
        cmd->add_option("--epochs", cfg.epochs, "training epochs")->capture_default_str();
        cmd->add_option("--lr", cfg.lr, "learning rate")->capture_default_str();
        cmd->add_option("--repeats", cfg.repeats, "independent trainings per model")
            ->capture_default_str();
        cmd->add_option("--train-fraction", cfg.train_fraction, "train split share")
            ->capture_default_str();
        cmd->add_option("--batch", cfg.batch_size, "minibatch size (0 = full batch)")
            ->capture_default_str();
    }

    ExperimentConfig resolve() {
        cfg.seed = seed;
        cfg.mode = cheby_mode_from_string(mode);
        cfg.validate();
        return cfg;
    }
};

int cmd_synth(const std::string& kind, std::size_t n, double noise, std::uint64_t seed,
              const std::string& out) {
    Dataset ds;
    if (kind == "rings")
        ds = make_rings(n, noise, seed);
    else if (kind == "xor")
        ds = make_xor(n, seed);
    else
        throw std::invalid_argument("synth: unknown kind \"" + kind + "\"");
    fs::path dir = ensure_out_dir(out);
    fs::path file = dir / (kind + ".csv");
    save_csv(file.string(), ds);
    std::cout << "wrote " << file.string() << " (" << ds.size() << " samples, " << ds.classes
              << " classes)\n";
    return 0;
}

int cmd_train(CommonFlags& flags, const std::string& family) {
    ExperimentConfig cfg = flags.resolve();
    Dataset ds = load_csv(flags.data);
    PreparedData data = prepare_data(ds, cfg.train_fraction, cfg.seed);
    print_split_warnings(data);

    RunResult res;
    if (family == "mlp")
        res = run_repeats(cfg, data, [&] { return make_mlp(ds.X.cols, cfg.hidden, ds.classes); });
    else
        res = run_repeats(cfg, data, [&] {
            return make_cheby_net(ds.X.cols, cfg.hidden, ds.classes, cfg.k, cfg.mode);
        });
    if (res.accuracies.empty()) throw std::runtime_error("train: every repeat diverged");

    fs::path dir = ensure_out_dir(flags.out);
    save_model((dir / "model.json").string(), res.best_net, &data.scaler);

    nlohmann::json doc = {{"schema_version", 1},
                          {"command", "train"},
                          {"environment", environment_stamp()},
                          {"family", family},
                          {"config", config_to_json(cfg)},
                          {"dataset", dataset_to_json(describe(dataset_name(flags.data), ds, data))},
                          {"result", run_result_to_json(res)}};
    write_text(dir / "train.json", doc.dump(2) + "\n");

    std::printf("%s: %s best %.3f, mean %.3f, std %.3f, f1 %.3f, params %zu (%.1fs)\n",
                dataset_name(flags.data).c_str(), family.c_str(), res.best, res.mean, res.stddev,
                res.best_macro_f1, res.parameters, res.wall_seconds);
    std::cout << "wrote " << (dir / "model.json").string() << " and " << (dir / "train.json").string()
              << "\n";
    return 0;
}

int cmd_compare(CommonFlags& flags) {
    ExperimentConfig cfg = flags.resolve();
    Dataset ds = load_csv(flags.data);
    PreparedData data = prepare_data(ds, cfg.train_fraction, cfg.seed);
    print_split_warnings(data);

    CompareResult res = run_experiment(cfg, ds);
    fs::path dir = ensure_out_dir(flags.out);
    nlohmann::json doc = compare_document(cfg, describe(dataset_name(flags.data), ds, data), res);
    write_text(dir / "compare.json", doc.dump(2) + "\n");

    std::printf("%s: cheby %.2f, mlp %.2f, diff %.3f\n", dataset_name(flags.data).c_str(),
                res.cheby.best, res.mlp.best, res.diff);
    std::printf("  cheby params %zu, mlp params %zu, wall %.1fs + %.1fs\n", res.cheby.parameters,
                res.mlp.parameters, res.cheby.wall_seconds, res.mlp.wall_seconds);
    std::cout << "wrote " << (dir / "compare.json").string() << "\n";
    return 0;
}

int cmd_sweep(CommonFlags& flags, std::vector<std::size_t>& ks) {
    ExperimentConfig cfg = flags.resolve();
    Dataset ds = load_csv(flags.data);
    std::vector<std::string> warnings;
    std::vector<KSweepRow> rows = k_sweep(cfg, ds, ks, &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";

    fs::path dir = ensure_out_dir(flags.out);
    std::ofstream csv(dir / "sweep.csv");
    if (!csv) throw std::runtime_error("cannot open sweep.csv for writing");
    sweep_to_csv(csv, rows);

    std::printf("%-4s %-12s %-10s %-10s %-10s %-10s\n", "k", "cheby_params", "cheby_best",
                "mlp_best", "cheby_f1", "mlp_f1");
    for (const auto& r : rows)
        std::printf("%-4zu %-12zu %-10.3f %-10.3f %-10.3f %-10.3f\n", r.k,
                    r.result.cheby.parameters, r.result.cheby.best, r.result.mlp.best,
                    r.result.cheby.best_macro_f1, r.result.mlp.best_macro_f1);
    std::cout << "wrote " << (dir / "sweep.csv").string() << "\n";
    return 0;
}

int cmd_prune(CommonFlags& flags, const std::string& model_path, const std::string& strategy_name,
              double tau_abs, bool have_tau, std::vector<double>& percentiles,
              std::size_t ft_epochs) {
    ExperimentConfig cfg = flags.resolve();
    ModelFile mf = load_model(model_path);
    Dataset ds = load_csv(flags.data);
    PreparedData data = prepare_data(ds, cfg.train_fraction, cfg.seed);
    print_split_warnings(data);
    if (mf.net.input_dim() != ds.X.cols)
        throw std::runtime_error("prune: model expects " + std::to_string(mf.net.input_dim()) +
                                 " features, dataset has " + std::to_string(ds.X.cols));

    PruneStrategy strategy = prune_strategy_from_string(strategy_name);
    std::vector<TauSpec> taus;
    if (have_tau)
        taus.push_back(TauSpec::absolute(tau_abs));
    else
        for (double q : percentiles) taus.push_back(TauSpec::percentile(q));

    TrainConfig ft;
    ft.epochs = ft_epochs;
    ft.lr = cfg.lr;
    ft.batch_size = cfg.batch_size;
    ft.shuffle_seed = cfg.seed;
    PruneRunResult res = prune_run(mf.net, data, strategy, taus, ft);

    fs::path dir = ensure_out_dir(flags.out);
    nlohmann::json doc = prune_document(res, describe(dataset_name(flags.data), ds, data));
    write_text(dir / "prune.json", doc.dump(2) + "\n");
    const PruneCandidate& chosen = res.candidates[res.chosen];
    save_model((dir / "pruned.json").string(), chosen.pruned_net, &data.scaler);

    for (const auto& c : res.candidates) {
        if (c.diverged) {
            std::printf("  tau %s %.4g: diverged\n",
                        c.tau.kind == TauSpec::Kind::Percentile ? "p" : "abs", c.tau.value);
            continue;
        }
        std::printf("  tau %s %.4g: compression %.1f, acc %.3f -> %.3f\n",
                    c.tau.kind == TauSpec::Kind::Percentile ? "p" : "abs", c.tau.value,
                    c.report.compression, c.report.accuracy_before, c.report.accuracy_after);
    }
    std::printf("%s: unpruned %.3f, pruned %.3f, compression %.1f\n",
                dataset_name(flags.data).c_str(), chosen.report.accuracy_before,
                chosen.report.accuracy_after, chosen.report.compression);
    std::cout << "wrote " << (dir / "prune.json").string() << " and "
              << (dir / "pruned.json").string() << "\n";
    return 0;
}

int cmd_boundary(const std::string& model_path, const std::string& data_path,
                 std::size_t resolution, std::vector<std::size_t>& pair, const std::string& out) {
    ModelFile mf = load_model(model_path);
    Dataset ds = load_csv(data_path);
    std::size_t fa = 0, fb = 1;
    if (!pair.empty()) {
        if (pair.size() != 2) throw std::invalid_argument("boundary: --pair needs two indices");
        fa = pair[0];
        fb = pair[1];
    } else if (mf.net.input_dim() != 2) {
        throw std::invalid_argument(
            "boundary: model has " + std::to_string(mf.net.input_dim()) +
            " input features; choose two with --pair");
    }
    fs::path dir = ensure_out_dir(out);
    std::ofstream csv(dir / "boundary.csv");
    if (!csv) throw std::runtime_error("cannot open boundary.csv for writing");
    const Scaler* scaler = mf.scaler ? &*mf.scaler : nullptr;
    export_boundary_grid(csv, mf.net, scaler, ds, resolution, fa, fb);
    std::cout << "wrote " << (dir / "boundary.csv").string() << " (" << resolution << "x"
              << resolution << " lattice + " << ds.size() << " points)\n";
    return 0;
}

int cmd_curves(const std::string& model_path, std::size_t layer, std::size_t samples,
               const std::string& out) {
    ModelFile mf = load_model(model_path);
    fs::path dir = ensure_out_dir(out);
    std::ofstream csv(dir / "curves.csv");
    if (!csv) throw std::runtime_error("cannot open curves.csv for writing");
    export_weight_curves(csv, mf.net, layer, samples);
    std::cout << "wrote " << (dir / "curves.csv").string() << "\n";
    return 0;
}

struct BenchFlags {
    std::string out = ".";
    std::uint64_t seed = 0;
    std::string mode = "weight";
    std::vector<std::size_t> hidden = {4, 2};
    double lr = 0.001;
    std::vector<std::size_t> features = {10, 30, 90};
    std::vector<std::size_t> ks = {0, 1, 2, 4, 8};
    std::size_t batch = 512;
    std::size_t reps = 30;
};

int cmd_bench(const BenchFlags& flags) {
    ExperimentConfig cfg;
    cfg.hidden = flags.hidden;
    cfg.lr = flags.lr;
    cfg.seed = flags.seed;
    cfg.mode = cheby_mode_from_string(flags.mode);
    cfg.validate();
    std::vector<BenchRow> rows = bench_timing(cfg, flags.features, flags.ks, flags.batch, flags.reps);
    fs::path dir = ensure_out_dir(flags.out);
    std::ofstream csv(dir / "bench.csv");
    if (!csv) throw std::runtime_error("cannot open bench.csv for writing");
    bench_to_csv(csv, rows);

    std::printf("%-6s %-9s %-3s %-16s %-16s\n", "model", "features", "k", "train_s_per_batch",
                "infer_s_per_batch");
    for (const auto& r : rows)
        std::printf("%-6s %-9zu %-3zu %-16.6g %-16.6g\n", r.model.c_str(), r.features, r.k,
                    r.train_s_per_batch, r.infer_s_per_batch);
    std::cout << "wrote " << (dir / "bench.csv").string() << "\n";
    return 0;
}

SampleFn named_function(const std::string& name, std::size_t& dims) {
    if (name == "x2") { dims = 1; return [](const std::vector<double>& x) { return x[0] * x[0]; }; }
    if (name == "exp") { dims = 1; return [](const std::vector<double>& x) { return std::exp(x[0]); }; }
    if (name == "runge") {
        dims = 1;
        return [](const std::vector<double>& x) { return 1.0 / (1.0 + 25.0 * x[0] * x[0]); };
    }
    if (name == "x2y") {
        dims = 2;
        return [](const std::vector<double>& x) { return x[0] * x[0] * x[1]; };
    }
    if (name == "xy+yz") {
        dims = 3;
        return [](const std::vector<double>& x) { return x[0] * x[1] + x[1] * x[2]; };
    }
    if (name == "sphere") {
        return [](const std::vector<double>& x) {
            double s = 0.0;
            for (double v : x) s += v * v;
            return s;
        };
    }
    throw std::invalid_argument("fit: unknown function \"" + name +
                                "\" (try x2, exp, runge, x2y, xy+yz, sphere)");
}

int cmd_fit(const std::string& fn_name, std::vector<std::size_t>& orders, std::size_t dims_flag,
            bool pairwise, std::vector<std::string>& pair_specs, std::vector<double>& at,
            const std::string& out) {
    std::size_t dims = dims_flag;
    SampleFn f = named_function(fn_name, dims);
    if (dims == 0) throw std::invalid_argument("fit: --dims required for " + fn_name);

    fs::path dir = ensure_out_dir(out);
    nlohmann::json doc = {{"schema_version", 1},
                          {"command", "fit"},
                          {"environment", environment_stamp()},
                          {"function", fn_name},
                          {"dims", dims}};
    double value = 0.0;
    bool have_value = false;

    if (pairwise) {
        if (orders.size() != 1)
            throw std::invalid_argument("fit: pairwise mode takes a single --orders value");
        std::vector<std::pair<std::size_t, std::size_t>> pairs;
        if (pair_specs.empty()) {
            for (std::size_t a = 0; a < dims; ++a)
                for (std::size_t b = a + 1; b < dims; ++b) pairs.push_back({a, b});
        } else {
            for (const auto& s : pair_specs) {
                auto dash = s.find('-');
                if (dash == std::string::npos)
                    throw std::invalid_argument("fit: pair \"" + s + "\" is not of the form a-b");
                pairs.push_back({std::stoul(s.substr(0, dash)), std::stoul(s.substr(dash + 1))});
            }
        }
        PairwiseModel model = fit_pairwise(f, dims, orders[0], pairs);
        nlohmann::json jterms = nlohmann::json::array();
        for (const auto& t : model.terms)
            jterms.push_back({{"a", t.a}, {"b", t.b}, {"coeffs", t.coeffs.coeffs}});
        doc["order"] = orders[0];
        doc["pairs"] = jterms;
        if (!at.empty()) {
            value = eval_pairwise(model, at);
            have_value = true;
        }
    } else {
        if (orders.size() == 1 && dims > 1) orders.assign(dims, orders[0]);
        if (orders.size() != dims)
            throw std::invalid_argument("fit: need one order per dimension");
        TensorCoeffs tc = fit_tensor(f, orders);
        doc["orders"] = tc.orders;
        doc["coeffs"] = tc.coeffs;
        if (!at.empty()) {
            value = eval_tensor(tc, at);
            have_value = true;
        }
    }
    if (have_value) {
        doc["eval_at"] = at;
        doc["eval_value"] = value;
        std::printf("%s at given point: %.12g (true %.12g)\n", fn_name.c_str(), value, f(at));
    }
    write_text(dir / "fit.json", doc.dump(2) + "\n");
    std::cout << "wrote " << (dir / "fit.json").string() << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"adaptive Chebyshev network toolkit"};
    app.require_subcommand(1);

    CommonFlags train_flags, compare_flags, sweep_flags, prune_flags;
    BenchFlags bench_flags;

    auto* train = app.add_subcommand("train", "train one model (best of --repeats) and save it");
    train_flags.attach(train, true);
    std::string family = "cheby";
    train->add_option("--family", family, "cheby|mlp")
        ->check(CLI::IsMember({"cheby", "mlp"}))
        ->capture_default_str();

    auto* compare = app.add_subcommand("compare", "best-of-N comparison of mlp vs cheby");
    compare_flags.attach(compare, true);

    auto* sweep = app.add_subcommand("sweep-k", "run the comparison across polynomial orders");
    sweep_flags.attach(sweep, true);
    std::vector<std::size_t> sweep_ks = {0, 1, 3, 6, 10};
    sweep->add_option("--ks", sweep_ks, "orders to sweep")->delimiter(',')->capture_default_str();

    auto* prune = app.add_subcommand("prune", "prune a trained model with fine-tuning");
    prune_flags.attach(prune, true);
    std::string prune_model, prune_strategy = "threshold";
    double prune_tau = 0.0;
    std::vector<double> prune_percentiles = {50, 70, 80, 90};
    std::size_t ft_epochs = 100;
    prune->add_option("--model", prune_model, "trained model file")->required();
    prune->add_option("--strategy", prune_strategy, "threshold|group")
        ->check(CLI::IsMember({"threshold", "group"}))
        ->capture_default_str();
    auto* tau_opt = prune->add_option("--tau", prune_tau, "absolute threshold");
    prune->add_option("--percentiles", prune_percentiles, "per-layer magnitude percentiles to sweep")
        ->delimiter(',')
        ->capture_default_str();
    prune->add_option("--ft-epochs", ft_epochs, "fine-tune epochs per pruned layer")
        ->capture_default_str();

    auto* boundary = app.add_subcommand("boundary", "export decision-boundary lattice + test points");
    std::string b_model, b_data, b_out = ".";
    std::size_t b_res = 64;
    std::vector<std::size_t> b_pair;
    boundary->add_option("--model", b_model, "trained model file")->required();
    boundary->add_option("--data", b_data, "CSV with test points")->required();
    boundary->add_option("--resolution", b_res, "lattice points per axis")->capture_default_str();
    boundary->add_option("--pair", b_pair, "feature pair to vary (others fixed at 0)")
        ->delimiter(',');
    boundary->add_option("--out", b_out, "output directory")->capture_default_str();

    auto* curves = app.add_subcommand("curves", "export adaptive-weight curves w(x) per (neuron, input)");
    std::string c_model, c_out = ".";
    std::size_t c_layer = 0, c_samples = 101;
    curves->add_option("--model", c_model, "trained model file")->required();
    curves->add_option("--layer", c_layer, "adaptive layer index")->capture_default_str();
    curves->add_option("--samples", c_samples, "points per curve")->capture_default_str();
    curves->add_option("--out", c_out, "output directory")->capture_default_str();

    auto* bench = app.add_subcommand("bench", "per-batch timing of train and inference steps");
    bench->add_option("--out", bench_flags.out, "output directory")->capture_default_str();
    bench->add_option("--seed", bench_flags.seed, "RNG seed for synthetic batches")->capture_default_str();
    bench->add_option("--mode", bench_flags.mode, "adaptive layer mode: weight|expansion")
        ->check(CLI::IsMember({"weight", "expansion"}))
        ->capture_default_str();
    bench->add_option("--hidden", bench_flags.hidden, "hidden layer sizes")
        ->delimiter(',')
        ->capture_default_str();
    bench->add_option("--lr", bench_flags.lr, "optimizer step size for the train timing")
        ->capture_default_str();
    bench->add_option("--features", bench_flags.features, "feature counts")
        ->delimiter(',')
        ->capture_default_str();
    bench->add_option("--ks", bench_flags.ks, "orders to time")->delimiter(',')->capture_default_str();
    bench->add_option("--batch", bench_flags.batch, "batch size")->capture_default_str();
    bench->add_option("--reps", bench_flags.reps, "timed repetitions after warm-up")
        ->capture_default_str();

    auto* fit = app.add_subcommand("fit", "fit a named function with a Chebyshev series");
    std::string f_fn = "x2", f_out = ".";
    std::vector<std::size_t> f_orders = {8};
    std::size_t f_dims = 0;
    bool f_pairwise = false;
    std::vector<std::string> f_pairs;
    std::vector<double> f_at;
    fit->add_option("--fn", f_fn, "x2|exp|runge|x2y|xy+yz|sphere")->capture_default_str();
    fit->add_option("--orders", f_orders, "series order per dimension")->delimiter(',')->capture_default_str();
    fit->add_option("--dims", f_dims, "dimensions (functions with free arity)");
    fit->add_flag("--pairwise", f_pairwise, "fit a sum of bivariate series instead of the full tensor");
    fit->add_option("--pairs", f_pairs, "pairs like 0-1,1-2 (default: all)")->delimiter(',');
    fit->add_option("--at", f_at, "evaluate the fit at this point")->delimiter(',');
    fit->add_option("--out", f_out, "output directory")->capture_default_str();

    auto* synth = app.add_subcommand("synth", "generate a synthetic dataset CSV");
    std::string s_kind = "rings", s_out = ".";
    std::size_t s_n = 600;
    double s_noise = 0.03;
    std::uint64_t s_seed = 0;
    synth->add_option("--kind", s_kind, "rings|xor")
        ->check(CLI::IsMember({"rings", "xor"}))
        ->capture_default_str();
    synth->add_option("--n", s_n, "sample count")->capture_default_str();
    synth->add_option("--noise", s_noise, "radial noise sd (rings)")->capture_default_str();
    synth->add_option("--seed", s_seed, "RNG seed")->capture_default_str();
    synth->add_option("--out", s_out, "output directory")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*train) return cmd_train(train_flags, family);
        if (*compare) return cmd_compare(compare_flags);
        if (*sweep) return cmd_sweep(sweep_flags, sweep_ks);
        if (*prune)
            return cmd_prune(prune_flags, prune_model, prune_strategy, prune_tau,
                             tau_opt->count() > 0, prune_percentiles, ft_epochs);
        if (*boundary) return cmd_boundary(b_model, b_data, b_res, b_pair, b_out);
        if (*curves) return cmd_curves(c_model, c_layer, c_samples, c_out);
        if (*bench) return cmd_bench(bench_flags);
        if (*fit) return cmd_fit(f_fn, f_orders, f_dims, f_pairwise, f_pairs, f_at, f_out);
        if (*synth) return cmd_synth(s_kind, s_n, s_noise, s_seed, s_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
