#include "wsnloc/pathgraph.hpp"

#include <cmath>
#include <limits>
#include <queue>

#include "wsnloc/error.hpp"

namespace wsnloc {

std::vector<std::uint16_t> bfs_hops(const Adjacency& adj, NodeId source, std::span<const char> member) {
    const std::size_t n = adj.size();
    std::vector<std::uint16_t> hops(n, kernels::kUnreachable);
    if (!member.empty() && !member[source]) return hops;
    std::vector<NodeId> frontier{source};
    std::vector<NodeId> next;
    hops[source] = 0;
    std::uint16_t level = 0;
    while (!frontier.empty()) {
        ++level;
        next.clear();
        for (NodeId v : frontier) {
            for (NodeId w : adj.neighbors(v)) {
                if (hops[w] != kernels::kUnreachable) continue;
                if (!member.empty() && !member[w]) continue;
                hops[w] = level;
                next.push_back(w);
            }
        }
        frontier.swap(next);
    }
    return hops;
}

HopMatrix hop_matrix(const Adjacency& adj) {
    const std::size_t n = adj.size();
    if (n >= std::numeric_limits<std::uint16_t>::max()) throw Error("network too large for 16-bit hop counts");
    HopMatrix m(n);
    for (std::size_t s = 0; s < n; ++s) {
        const auto hops = bfs_hops(adj, static_cast<NodeId>(s));
        for (std::size_t t = 0; t < n; ++t) {
            if (hops[t] == kernels::kUnreachable) throw Error("network is disconnected");
            m.at(s, t) = hops[t];
        }
    }
    return m;
}

HopMatrix induced_hop_matrix(const Adjacency& adj, std::span<const NodeId> nodes) {
    const std::size_t n = adj.size();
    std::vector<char> member(n, 0);
    for (NodeId v : nodes) member[v] = 1;
    HopMatrix m(nodes.size());
    for (std::size_t s = 0; s < nodes.size(); ++s) {
        const auto hops = bfs_hops(adj, nodes[s], member);
        for (std::size_t t = 0; t < nodes.size(); ++t) m.at(s, t) = hops[nodes[t]];
    }
    return m;
}

OccurrenceTable occurrence_counts(const HopMatrix& hops) {
    const std::size_t n = hops.size();
    OccurrenceTable ts(n, 0);
    if (n >= 2) kernels::occurrence_counts(hops.data(), n, ts.data());
    return ts;
}

PathLengthMatrix::PathLengthMatrix(std::size_t n) : n_(n), dist_(n * n, std::numeric_limits<double>::infinity()) {}

std::vector<double> dijkstra_lengths(const Network& network, NodeId source, std::span<const char> member) {
    const Adjacency& adj = network.adjacency;
    std::vector<double> best(adj.size(), std::numeric_limits<double>::infinity());
    if (!member.empty() && !member[source]) return best;
    using Item = std::pair<double, NodeId>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
    best[source] = 0.0;
    queue.emplace(0.0, source);
    while (!queue.empty()) {
        const auto [d, v] = queue.top();
        queue.pop();
        if (d > best[v]) continue;
        for (NodeId w : adj.neighbors(v)) {
            if (!member.empty() && !member[w]) continue;
            const double cand = d + measure_distance(network, v, w);
            if (cand < best[w]) {
                best[w] = cand;
                queue.emplace(cand, w);
            }
        }
    }
    return best;
}

PathLengthMatrix path_length_matrix(const Network& network) {
    const std::size_t n = network.size();
    const Adjacency& adj = network.adjacency;
    // Link weights in CSR order so every source reuses them.
    std::vector<std::vector<double>> weight(n);
    for (NodeId v = 0; v < n; ++v) {
        for (NodeId w : adj.neighbors(v)) weight[v].push_back(measure_distance(network, v, w));
    }
    PathLengthMatrix m(n);
    using Item = std::pair<double, NodeId>;
    std::vector<double> best(n);
    for (NodeId s = 0; s < n; ++s) {
        std::fill(best.begin(), best.end(), std::numeric_limits<double>::infinity());
        std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
        best[s] = 0.0;
        queue.emplace(0.0, s);
        while (!queue.empty()) {
            const auto [d, v] = queue.top();
            queue.pop();
            if (d > best[v]) continue;
            const auto nbrs = adj.neighbors(v);
            for (std::size_t e = 0; e < nbrs.size(); ++e) {
                const double cand = d + weight[v][e];
                if (cand < best[nbrs[e]]) {
                    best[nbrs[e]] = cand;
                    queue.emplace(cand, nbrs[e]);
                }
            }
        }
        for (std::size_t t = 0; t < n; ++t) {
            if (!std::isfinite(best[t])) throw Error("network is disconnected");
            m.at(s, t) = best[t];
        }
    }
    return m;
}

OccurrenceTable occurrence_counts(const PathLengthMatrix& lengths) {
    const std::size_t n = lengths.size();
    OccurrenceTable ts(n, 0);
    if (n >= 2) kernels::weighted_occurrence_counts(lengths.data(), n, kPathTieTol, ts.data());
    return ts;
}

const char* to_string(PathMetric metric) { return metric == PathMetric::Hop ? "hop" : "range"; }

PathMetric parse_path_metric(const std::string& text) {
    if (text == "hop") return PathMetric::Hop;
    if (text == "range") return PathMetric::Range;
    throw Error("unknown path metric: " + text);
}

OccurrenceTable occurrence_profile(const Network& network, PathMetric metric) {
    if (metric == PathMetric::Hop) return occurrence_counts(hop_matrix(network));
    return occurrence_counts(path_length_matrix(network));
}

}  // namespace wsnloc
