#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "wsnloc/deployment.hpp"
#include "wsnloc/pathgraph.hpp"

namespace wsnloc {

struct Clustering {
    double mu1 = 0.0;
    double mu2 = 0.0;
    std::vector<std::uint8_t> assignment;  // 1 or 2 per node
    int high_cluster = 1;                  // 1 when mu1 >= mu2
    int iterations = 0;
};

struct KMeansOptions {
    // nullopt: mu1 = min(TS), mu2 = max(TS). Otherwise two distinct nodes'
    // TS values are drawn with this seed.
    std::optional<std::uint64_t> random_init_seed;
    int max_iterations = 10'000;
};

// Two-centre Lloyd iteration on TS values. Ties go to cluster 1. Throws
// Error("degenerate occurrence profile") when all values are equal.
Clustering kmeans_two(const OccurrenceTable& ts, const KMeansOptions& options = {});

// Members of the cluster with the larger centre, ascending.
std::vector<NodeId> select_segmentation_nodes(const Clustering& clustering);

struct SegPair {
    NodeId a = 0;
    NodeId b = 0;
    friend bool operator==(const SegPair&, const SegPair&) = default;
    friend auto operator<=>(const SegPair&, const SegPair&) = default;
};

struct PairFormation {
    std::vector<SegPair> candidates;  // every one-hop pair inside the segmentation set
    std::vector<SegPair> pairs;       // survivors after redundancy removal
    std::vector<SegPair> removed;
    int triangles = 0;  // mutually adjacent segmentation triples (all three pairs are removed)
};

// Pairs up adjacent segmentation nodes, then drops every pair whose two nodes
// each belong to another candidate pair. Flags are evaluated against the full
// candidate set before anything is removed.
PairFormation form_pairs(const std::vector<NodeId>& seg, const Network& network);

}  // namespace wsnloc
