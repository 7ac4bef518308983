#include <cstdio>
#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "wsnloc/error.hpp"
#include "wsnloc/harness.hpp"
#include "wsnloc/kernels.hpp"

using namespace wsnloc;

namespace {

void print_summary(const BatchReport& report) {
    const auto& a = report.aggregates;
    std::printf("scenario %s  nodes %zu+%zu  trials %zu\n", report.config.scenario.c_str(), report.config.n_unknown,
                report.config.n_anchor, report.rows.size());
    std::printf("  n_pairs    %.4f (sd %.4f)\n", a.n_pairs.mean, a.n_pairs.stddev);
    std::printf("  z          %.4f (sd %.4f)\n", a.z.mean, a.z.stddev);
    std::printf("  spo        %.4f -> %.4f\n", a.spo_before.mean, a.spo_after.mean);
    std::printf("  acd        %.4f\n", a.acd.mean);
    std::printf("  mle_m      %.6g\n", a.mle.mean);
    std::printf("  inaccurate %.4f\n", a.inaccurate.mean);
}

void run_deep(std::uint64_t seed, std::size_t trials, double range) {
    const double diameters[] = {15, 30, 45, 60, 75, 90};
    std::printf("diameter,n_nodes,mean_traversing,ratio_percent\n");
    for (const auto& d : density_grid()) {
        for (double dia : diameters) {
            const auto cell = traversal_cell(dia, d.n_unknown, d.n_anchor, trials, seed, range);
            std::printf("%.0f,%zu,%.4f,%.4f\n", dia, cell.n_nodes, cell.mean_traversing, cell.ratio_percent);
            std::fflush(stdout);
        }
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Obstacle-aware WSN partitioning and localization simulator"};
    ExperimentConfig cfg;
    std::string ranging = "exact";
    std::string order = "descending";
    std::string metric = "range";
    std::string bisector = "hop";
    std::vector<std::string> svg_layers;
    bool deep = false;
    bool edges = false;
    std::string isa;
    app.add_option("--scenario", cfg.scenario, "Canonical scenario name or JSON file")->capture_default_str();
    app.add_option("--unknown", cfg.n_unknown, "Unknown nodes")->capture_default_str();
    app.add_option("--anchors", cfg.n_anchor, "Anchor nodes")->capture_default_str();
    app.add_option("--range", cfg.range, "Radio range (m)")->capture_default_str();
    app.add_option("--trials", cfg.trials, "Independent trials")->capture_default_str()->check(CLI::PositiveNumber);
    app.add_option("--seed", cfg.base_seed, "Base seed")->capture_default_str();
    app.add_flag("--no-partition", cfg.no_partition, "Localize the whole network as one area");
    app.add_option("--ranging", ranging, "exact | gauss:SIGMA")->capture_default_str();
    app.add_option("--path-metric", metric, "Shortest paths for occurrence counts: range | hop")->capture_default_str();
    app.add_option("--bisector-metric", bisector, "Distance for bisector sides: hop | range")->capture_default_str();
    app.add_option("--order", order, "Pair order: descending | reversed")->capture_default_str();
    app.add_option("--min-side", cfg.partition.min_side, "Boundary guard (0 disables)")->capture_default_str();
    app.add_option("--min-anchors", cfg.partition.min_anchors, "Anchors each split side must keep (0 disables)")
        ->capture_default_str();
    app.add_option("--workers", cfg.workers, "Worker threads")->capture_default_str();
    app.add_option("--svg", svg_layers, "Render trial 0: partition, occurrence, errors")->delimiter(',');
    app.add_flag("--edges", edges, "Draw links in SVG output");
    app.add_flag("--deep", deep, "Circular-obstacle traversal table (500 trials per cell)");
    app.add_option("--isa", isa, "Kernel variant: scalar | avx2");
    app.add_option("--out", cfg.out_dir, "Output directory");
    CLI11_PARSE(app, argc, argv);

    try {
        cfg.ranging = RangingModel::parse(ranging);
        cfg.path_metric = parse_path_metric(metric);
        cfg.partition.metric = parse_path_metric(bisector);
        if (order == "descending") {
            cfg.partition.order = PairOrder::DescendingTs;
        } else if (order == "reversed") {
            cfg.partition.order = PairOrder::ReversedDescendingTs;
        } else {
            throw Error("unknown pair order: " + order);
        }
        if (isa == "scalar") {
            kernels::set_isa(kernels::Isa::Scalar);
        } else if (isa == "avx2") {
            if (!kernels::isa_supported(kernels::Isa::Avx2)) throw Error("avx2 not supported on this CPU");
            kernels::set_isa(kernels::Isa::Avx2);
        } else if (!isa.empty()) {
            throw Error("unknown isa: " + isa);
        }

        if (deep) {
            run_deep(cfg.base_seed, 500, cfg.range);
            return 0;
        }

        const BatchReport report = run_batch(cfg);
        print_summary(report);

        if (!svg_layers.empty()) {
            const std::string dir = cfg.out_dir.empty() ? "." : cfg.out_dir;
            std::filesystem::create_directories(dir);
            TrialArtifacts art;
            run_trial(cfg, 0, &art);
            for (const auto& name : svg_layers) {
                const auto layer = parse_svg_layer(name);
                if (!layer) throw Error("unknown svg layer: " + name);
                const std::string path = (std::filesystem::path(dir) / ("trial0_" + name + ".svg")).string();
                write_svg(art, *layer, path, edges);
                std::printf("wrote %s\n", path.c_str());
            }
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "simulate: %s\n", e.what());
        return 1;
    }
    return 0;
}
