#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wsnloc/deployment.hpp"
#include "wsnloc/kernels.hpp"

namespace wsnloc {

// Dense all-pairs hop counts, row-major, 0 on the diagonal.
class HopMatrix {
public:
    HopMatrix() = default;
    explicit HopMatrix(std::size_t n) : n_(n), dist_(n * n, kernels::kUnreachable) {}

    std::size_t size() const { return n_; }
    std::uint16_t operator()(std::size_t j, std::size_t k) const { return dist_[j * n_ + k]; }
    std::uint16_t& at(std::size_t j, std::size_t k) { return dist_[j * n_ + k]; }
    std::span<const std::uint16_t> row(std::size_t j) const { return {dist_.data() + j * n_, n_}; }
    const std::uint16_t* data() const { return dist_.data(); }

private:
    std::size_t n_ = 0;
    std::vector<std::uint16_t> dist_;
};

// BFS hop counts from `source`, restricted to nodes with member[v] != 0 (an
// empty mask means the whole graph). Unreached nodes get kUnreachable.
std::vector<std::uint16_t> bfs_hops(const Adjacency& adj, NodeId source, std::span<const char> member = {});

// Breadth-first search from every node. Throws Error when the graph is
// disconnected.
HopMatrix hop_matrix(const Adjacency& adj);
inline HopMatrix hop_matrix(const Network& network) { return hop_matrix(network.adjacency); }

// Hop matrix of the subgraph induced by `nodes` (local indexing follows the
// order of `nodes`). Disconnected pairs hold kUnreachable.
HopMatrix induced_hop_matrix(const Adjacency& adj, std::span<const NodeId> nodes);

// TS_i: the number of unordered pairs {j, k} such that i lies on at least one
// minimum-hop path between them (endpoints included).
using OccurrenceTable = std::vector<std::uint32_t>;

OccurrenceTable occurrence_counts(const HopMatrix& hops);
inline OccurrenceTable occurrence_counts(const Network&, const HopMatrix& hops) { return occurrence_counts(hops); }

// Dense all-pairs shortest path lengths in meters, each link weighted by its
// measured range.
class PathLengthMatrix {
public:
    PathLengthMatrix() = default;
    explicit PathLengthMatrix(std::size_t n);

    std::size_t size() const { return n_; }
    double operator()(std::size_t j, std::size_t k) const { return dist_[j * n_ + k]; }
    double& at(std::size_t j, std::size_t k) { return dist_[j * n_ + k]; }
    const double* data() const { return dist_.data(); }

private:
    std::size_t n_ = 0;
    std::vector<double> dist_;
};

// Range-weighted shortest path lengths from `source`, restricted to nodes with
// member[v] != 0 (empty mask = whole graph). Unreached nodes get infinity.
std::vector<double> dijkstra_lengths(const Network& network, NodeId source, std::span<const char> member = {});

// Dijkstra from every node. Throws Error when the graph is disconnected.
PathLengthMatrix path_length_matrix(const Network& network);

// Relative slack under which two path lengths count as tied.
inline constexpr double kPathTieTol = 1e-9;

// TS_i over range-weighted shortest paths: pairs {j, k} with
// d(j,i) + d(i,k) <= d(j,k) * (1 + kPathTieTol).
OccurrenceTable occurrence_counts(const PathLengthMatrix& lengths);

// Which shortest paths feed TS: minimum hop count (ties unioned) or minimum
// summed link range.
enum class PathMetric { Hop, Range };
const char* to_string(PathMetric metric);
PathMetric parse_path_metric(const std::string& text);

OccurrenceTable occurrence_profile(const Network& network, PathMetric metric);

}  // namespace wsnloc
