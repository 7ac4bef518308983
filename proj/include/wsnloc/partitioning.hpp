#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "wsnloc/deployment.hpp"
#include "wsnloc/pathgraph.hpp"
#include "wsnloc/segmentation.hpp"

namespace wsnloc {

using AreaId = std::uint32_t;

enum class SplitStatus {
    Split,             // area divided in two
    AlreadySeparated,  // pair endpoints carry different labels already
    SmallSide,         // boundary guard: a side would hold too few nodes or anchors
    Degenerate,        // a side would be empty
};

const char* to_string(SplitStatus status);

struct SplitRecord {
    SegPair pair;
    SplitStatus status = SplitStatus::Split;
    AreaId parent = 0;
    AreaId child = 0;            // new area id (valid when status == Split)
    std::vector<NodeId> bisector;  // hop-equidistant nodes U inside the parent area
    std::size_t side_a = 0;
    std::size_t side_b = 0;
    std::size_t anchors_a = 0;
    std::size_t anchors_b = 0;
};

struct PartitionMap {
    std::vector<AreaId> label;  // per node
    std::size_t z = 1;          // number of sub-networks
    std::size_t w = 0;          // splits performed
    std::vector<SplitRecord> history;
    std::vector<AreaId> disconnected_areas;  // areas whose induced subgraph is split

    // Nodes of each area, ascending ids; index = area id.
    std::vector<std::vector<NodeId>> areas() const;
};

enum class PairOrder { DescendingTs, ReversedDescendingTs };

struct PartitionOptions {
    std::size_t min_side = 12;    // boundary guard; 0 disables
    std::size_t min_anchors = 3;  // anchors each side must keep, with a non-collinear triple; 0 disables
    PairOrder order = PairOrder::DescendingTs;
    PathMetric metric = PathMetric::Hop;  // distance used to compare against N_a and N_b
};

// Processing order of pairs: descending TS_a + TS_b, ties by smallest ids.
std::vector<SegPair> order_pairs(std::span<const SegPair> pairs, const OccurrenceTable& ts, PairOrder order);

// Sequential hop-bisector splitting. Each pair splits the area that holds
// both of its nodes, with hop counts taken inside that area only.
PartitionMap partition(const Network& network, std::span<const SegPair> pairs, const OccurrenceTable& ts,
                       const PartitionOptions& options = {});

// One "node_id,area_label" line per node after a header.
void write_partition_csv(std::ostream& out, const PartitionMap& map);

}  // namespace wsnloc
