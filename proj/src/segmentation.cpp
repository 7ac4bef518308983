#include "wsnloc/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "wsnloc/error.hpp"
#include "wsnloc/seeding.hpp"

namespace wsnloc {

Clustering kmeans_two(const OccurrenceTable& ts, const KMeansOptions& options) {
    if (ts.empty()) throw Error("degenerate occurrence profile");
    const auto [lo, hi] = std::minmax_element(ts.begin(), ts.end());
    if (*lo == *hi) throw Error("degenerate occurrence profile");

    Clustering c;
    c.assignment.assign(ts.size(), 1);
    if (options.random_init_seed) {
        std::mt19937_64 rng(splitmix64(*options.random_init_seed));
        std::uniform_int_distribution<std::size_t> pick(0, ts.size() - 1);
        std::size_t i = pick(rng);
        std::size_t j = pick(rng);
        while (ts[j] == ts[i]) j = pick(rng);
        c.mu1 = ts[i];
        c.mu2 = ts[j];
    } else {
        c.mu1 = *lo;
        c.mu2 = *hi;
    }

    for (c.iterations = 1; c.iterations <= options.max_iterations; ++c.iterations) {
        double sum1 = 0.0;
        double sum2 = 0.0;
        std::size_t n1 = 0;
        std::size_t n2 = 0;
        for (std::size_t i = 0; i < ts.size(); ++i) {
            const double v = ts[i];
            if (std::abs(v - c.mu1) <= std::abs(v - c.mu2)) {
                c.assignment[i] = 1;
                sum1 += v;
                ++n1;
            } else {
                c.assignment[i] = 2;
                sum2 += v;
                ++n2;
            }
        }
        // An emptied cluster keeps its previous centre.
        const double next1 = n1 ? sum1 / static_cast<double>(n1) : c.mu1;
        const double next2 = n2 ? sum2 / static_cast<double>(n2) : c.mu2;
        if (next1 == c.mu1 && next2 == c.mu2) break;
        c.mu1 = next1;
        c.mu2 = next2;
    }
    c.high_cluster = c.mu1 >= c.mu2 ? 1 : 2;
    return c;
}

std::vector<NodeId> select_segmentation_nodes(const Clustering& clustering) {
    std::vector<NodeId> out;
    for (std::size_t i = 0; i < clustering.assignment.size(); ++i) {
        if (clustering.assignment[i] == clustering.high_cluster) out.push_back(static_cast<NodeId>(i));
    }
    return out;
}

PairFormation form_pairs(const std::vector<NodeId>& seg, const Network& network) {
    std::vector<NodeId> nodes = seg;
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());

    PairFormation out;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        for (std::size_t j = i + 1; j < nodes.size(); ++j) {
            if (network.adjacency.adjacent(nodes[i], nodes[j])) out.candidates.push_back({nodes[i], nodes[j]});
        }
    }

    // Number of candidate pairs each node takes part in.
    std::vector<int> membership(network.size(), 0);
    for (const auto& p : out.candidates) {
        ++membership[p.a];
        ++membership[p.b];
    }
    // A pair {a, b} is redundant when a sits in another pair and b sits in a
    // different other pair. Any other pair holding a cannot hold b, so that is
    // exactly "both endpoints have another pair".
    for (const auto& p : out.candidates) {
        if (membership[p.a] >= 2 && membership[p.b] >= 2) {
            out.removed.push_back(p);
        } else {
            out.pairs.push_back(p);
        }
    }

    for (const auto& p : out.candidates) {
        for (NodeId c : nodes) {
            if (c > p.b && network.adjacency.adjacent(p.a, c) && network.adjacency.adjacent(p.b, c)) ++out.triangles;
        }
    }
    return out;
}

}  // namespace wsnloc
