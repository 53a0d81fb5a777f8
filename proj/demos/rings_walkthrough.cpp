// End-to-end tour on the two-rings dataset: train the dense baseline and
// the adaptive model, compare, then prune the adaptive model and watch
// the compression/accuracy trade-off.

#include <cstdio>

#include "cheby/harness.hpp"

using namespace cheby;

int main() {
    Dataset ds = make_rings(600, 0.03, 11);

    ExperimentConfig cfg;
    cfg.repeats = 3; // keep the demo quick; the paper protocol uses 10
    cfg.seed = 11;
    CompareResult cmp = run_experiment(cfg, ds);

    std::printf("rings: cheby best %.2f (mean %.2f), mlp best %.2f (mean %.2f), diff %.3f\n",
                cmp.cheby.best, cmp.cheby.mean, cmp.mlp.best, cmp.mlp.mean, cmp.diff);
    std::printf("parameters: cheby %zu, mlp %zu\n", cmp.cheby.parameters, cmp.mlp.parameters);

    PreparedData data = prepare_data(ds, cfg.train_fraction, cfg.seed);
    TrainConfig ft;
    ft.epochs = 100;
    ft.lr = cfg.lr;
    ft.shuffle_seed = cfg.seed;
    std::vector<TauSpec> taus = {TauSpec::percentile(50), TauSpec::percentile(70),
                                 TauSpec::percentile(80), TauSpec::percentile(90)};
    PruneRunResult pr = prune_run(cmp.cheby.best_net, data, PruneStrategy::Threshold, taus, ft);

    std::printf("\npercentile sweep (threshold strategy):\n");
    for (const auto& c : pr.candidates) {
        if (c.diverged) {
            std::printf("  p%-3.0f diverged\n", c.tau.value);
            continue;
        }
        std::printf("  p%-3.0f compression %5.1f%%  acc %.2f -> %.2f\n", c.tau.value,
                    c.report.compression, c.report.accuracy_before, c.report.accuracy_after);
    }
    const auto& chosen = pr.candidates[pr.chosen];
    std::printf("chosen: %.1f%% of weights zeroed, accuracy %.2f -> %.2f\n",
                chosen.report.compression, chosen.report.accuracy_before,
                chosen.report.accuracy_after);
    return 0;
}
