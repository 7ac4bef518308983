#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wsnloc/deployment.hpp"
#include "wsnloc/localization.hpp"
#include "wsnloc/metrics.hpp"
#include "wsnloc/partitioning.hpp"
#include "wsnloc/segmentation.hpp"

namespace wsnloc {

inline constexpr const char* kReportFormat = "wsnloc-report/1";

struct ExperimentConfig {
    std::string scenario = "none";  // canonical name or JSON file path
    std::size_t n_unknown = 150;
    std::size_t n_anchor = 10;
    double range = 15.0;
    std::size_t trials = 50;
    std::uint64_t base_seed = 1;
    RangingModel ranging;  // its seed is replaced per trial
    bool no_partition = false;
    PathMetric path_metric = PathMetric::Range;  // shortest paths feeding TS
    PartitionOptions partition;
    std::string out_dir;
    unsigned workers = 1;
};

// The standard density grid: (unknown, anchor) pairs.
struct Density {
    std::size_t n_unknown;
    std::size_t n_anchor;
    std::size_t total() const { return n_unknown + n_anchor; }
};
const std::vector<Density>& density_grid();

// Everything a single trial produced, for rendering and inspection.
struct TrialArtifacts {
    Network network;
    OccurrenceTable ts;
    std::optional<Clustering> clustering;
    std::vector<NodeId> seg_nodes;
    PairFormation pairs;
    PartitionMap partition;
    LocalizationResult localization;
};

struct TrialRow {
    std::size_t trial = 0;
    std::uint64_t seed = 0;
    std::size_t n_nodes = 0;
    TrialMetrics metrics;
    double runtime_ms = 0.0;
};

// Deterministic for (config, scenario, index); the trial seed is
// split_seed(base_seed, index).
TrialRow run_trial(const ExperimentConfig& config, const Scenario& scenario, std::size_t index,
                   TrialArtifacts* artifacts = nullptr);
TrialRow run_trial(const ExperimentConfig& config, std::size_t index, TrialArtifacts* artifacts = nullptr);

struct Summary {
    double mean = 0.0;
    double stddev = 0.0;  // population
};

struct Aggregates {
    Summary n_pairs, z, spo_before, spo_after, acd, mle, inaccurate, runtime_ms;
};
Aggregates aggregate(std::span<const TrialRow> rows);

struct BatchReport {
    ExperimentConfig config;
    std::vector<TrialRow> rows;  // trial order
    Aggregates aggregates;
};

// Runs every trial, in parallel when config.workers > 1, merged in trial
// order. Writes report.csv and report.json when out_dir is set.
BatchReport run_batch(const ExperimentConfig& config);

void write_report_csv(std::ostream& out, std::span<const TrialRow> rows);
std::vector<TrialRow> read_report_csv(std::istream& in);
std::string report_json(const BatchReport& report);
// Throws Error naming the path on I/O failure.
void write_report(const BatchReport& report, const std::string& dir);

// Blocked in-range pairs around a centred circular obstacle.
struct TraversalCell {
    double diameter = 0.0;
    std::size_t n_nodes = 0;
    double mean_traversing = 0.0;  // mean blocked in-range pairs per trial
    double ratio_percent = 0.0;    // blocked / in-range pairs, mean over trials
};
TraversalCell traversal_cell(double diameter, std::size_t n_unknown, std::size_t n_anchor, std::size_t trials,
                             std::uint64_t base_seed, double range = 15.0);

enum class SvgLayer { Partition, Occurrence, Errors };
std::optional<SvgLayer> parse_svg_layer(const std::string& name);
std::string render_svg(const TrialArtifacts& trial, SvgLayer layer, bool edges = false);
void write_svg(const TrialArtifacts& trial, SvgLayer layer, const std::string& path, bool edges = false);

}  // namespace wsnloc
