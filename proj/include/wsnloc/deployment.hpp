#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "wsnloc/geometry.hpp"

namespace wsnloc {

using NodeId = std::uint32_t;

struct Node {
    NodeId id = 0;
    Point2D position;  // ground truth
    bool is_anchor = false;
};

struct RangingModel {
    enum class Kind { Exact, Gaussian };
    Kind kind = Kind::Exact;
    double sigma = 0.0;       // meters, Gaussian only
    std::uint64_t seed = 0;   // noise stream; fixed per trial

    static RangingModel exact() { return {}; }
    static RangingModel gaussian(double sigma, std::uint64_t seed);

    // "exact" or "gauss:SIGMA"
    static RangingModel parse(const std::string& text);
    std::string describe() const;
};

// Compressed sparse adjacency of the line-of-sight graph.
class Adjacency {
public:
    Adjacency() = default;
    Adjacency(std::size_t n, const std::vector<std::pair<NodeId, NodeId>>& edges);

    std::size_t size() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
    std::span<const NodeId> neighbors(NodeId i) const {
        return {targets_.data() + offsets_[i], targets_.data() + offsets_[i + 1]};
    }
    std::size_t degree(NodeId i) const { return offsets_[i + 1] - offsets_[i]; }
    bool adjacent(NodeId i, NodeId j) const;
    std::size_t edge_count() const { return targets_.size() / 2; }

private:
    std::vector<std::size_t> offsets_;
    std::vector<NodeId> targets_;  // sorted per row
};

struct Network {
    Scenario scenario;
    std::vector<Node> nodes;
    double range = 15.0;
    Adjacency adjacency;
    RangingModel ranging;

    std::size_t size() const { return nodes.size(); }
    std::size_t anchor_count() const;
};

// Builds a network from fixed node positions: edge(i,j) iff the nodes are
// within range and the segment between them is unobstructed.
Network make_network(Scenario scenario, std::vector<Node> nodes, double range,
                     RangingModel ranging = RangingModel::exact());

bool is_connected(const Adjacency& adj);

struct DeployOptions {
    int max_attempts = 1000;
};

// Uniform random layout in free space with a uniformly chosen anchor subset,
// resampled until the line-of-sight graph is connected. Deterministic for a
// given seed. Throws Error("undeployable scenario") after max_attempts.
Network deploy(const Scenario& scenario, std::size_t n_unknown, std::size_t n_anchor, double range,
               std::uint64_t seed, const DeployOptions& options = {});

// Range estimate for a one-hop link. Throws Error("not a one-hop link")
// for non-adjacent pairs. i == j returns 0.
double measure_distance(const Network& network, NodeId i, NodeId j);

// Node-list text format: one "id x y is_anchor" line per node, '#' comments.
void write_node_list(std::ostream& out, const Network& network);
std::vector<Node> read_node_list(std::istream& in);

}  // namespace wsnloc
