#include "wsnloc/partitioning.hpp"

#include <algorithm>
#include <ostream>

#include "wsnloc/deployment.hpp"

namespace wsnloc {

const char* to_string(SplitStatus status) {
    switch (status) {
        case SplitStatus::Split: return "split";
        case SplitStatus::AlreadySeparated: return "already_separated";
        case SplitStatus::SmallSide: return "small_side";
        case SplitStatus::Degenerate: return "degenerate";
    }
    return "?";
}

std::vector<std::vector<NodeId>> PartitionMap::areas() const {
    std::vector<std::vector<NodeId>> out(z);
    for (std::size_t i = 0; i < label.size(); ++i) out[label[i]].push_back(static_cast<NodeId>(i));
    return out;
}

std::vector<SegPair> order_pairs(std::span<const SegPair> pairs, const OccurrenceTable& ts, PairOrder order) {
    std::vector<SegPair> out(pairs.begin(), pairs.end());
    auto key = [&](const SegPair& p) { return std::uint64_t{ts[p.a]} + ts[p.b]; };
    std::stable_sort(out.begin(), out.end(), [&](const SegPair& l, const SegPair& r) {
        const auto kl = key(l);
        const auto kr = key(r);
        if (kl != kr) return kl > kr;
        return std::minmax(l.a, l.b) < std::minmax(r.a, r.b);
    });
    if (order == PairOrder::ReversedDescendingTs) std::reverse(out.begin(), out.end());
    return out;
}

namespace {

bool induced_connected(const Adjacency& adj, const std::vector<NodeId>& nodes, std::vector<char>& member) {
    if (nodes.empty()) return true;
    for (NodeId v : nodes) member[v] = 1;
    const auto hops = bfs_hops(adj, nodes.front(), member);
    bool ok = std::all_of(nodes.begin(), nodes.end(), [&](NodeId v) { return hops[v] != kernels::kUnreachable; });
    for (NodeId v : nodes) member[v] = 0;
    return ok;
}

}  // namespace

PartitionMap partition(const Network& network, std::span<const SegPair> pairs, const OccurrenceTable& ts,
                       const PartitionOptions& options) {
    const std::size_t n = network.size();
    const Adjacency& adj = network.adjacency;
    PartitionMap map;
    map.label.assign(n, 0);

    std::vector<char> member(n, 0);
    for (SegPair pair : order_pairs(pairs, ts, options.order)) {
        // The busier node leads, so tied bisector nodes do not follow node ids.
        if (ts[pair.b] > ts[pair.a]) std::swap(pair.a, pair.b);
        SplitRecord rec;
        rec.pair = pair;
        rec.parent = map.label[pair.a];
        if (map.label[pair.a] != map.label[pair.b]) {
            rec.status = SplitStatus::AlreadySeparated;
            map.history.push_back(std::move(rec));
            continue;
        }

        std::vector<NodeId> area;
        for (std::size_t i = 0; i < n; ++i) {
            if (map.label[i] == rec.parent) area.push_back(static_cast<NodeId>(i));
        }
        for (NodeId v : area) member[v] = 1;
        std::vector<double> hop_a;
        std::vector<double> hop_b;
        if (options.metric == PathMetric::Hop) {
            const auto ha = bfs_hops(adj, pair.a, member);
            const auto hb = bfs_hops(adj, pair.b, member);
            hop_a.assign(ha.begin(), ha.end());
            hop_b.assign(hb.begin(), hb.end());
        } else {
            hop_a = dijkstra_lengths(network, pair.a, member);
            hop_b = dijkstra_lengths(network, pair.b, member);
        }
        const double tie = options.metric == PathMetric::Hop ? 0.0 : kPathTieTol;

        // 0 = N_a side, 1 = N_b side, 2 = bisector (decided afterwards).
        std::vector<std::uint8_t> side(n, 3);
        for (NodeId v : area) {
            const double slack = tie * std::max(hop_a[v], hop_b[v]);
            if (hop_a[v] < hop_b[v] - slack) {
                side[v] = 0;
            } else if (hop_a[v] > hop_b[v] + slack) {
                side[v] = 1;
            } else {
                side[v] = 2;
                rec.bisector.push_back(v);
            }
        }
        // Bisector nodes join the side holding at least as many of their
        // one-hop neighbours; ties favour N_a. Resolution runs in rounds from
        // the decided nodes inward, each round seeing only earlier rounds, so
        // wide bisector bands split down the middle and stay attached.
        std::vector<std::uint8_t> resolved = side;
        std::vector<NodeId> pending = rec.bisector;
        while (!pending.empty()) {
            std::vector<std::pair<NodeId, std::uint8_t>> decided;
            std::vector<NodeId> waiting;
            for (NodeId v : pending) {
                int on_a = 0;
                int on_b = 0;
                for (NodeId w : adj.neighbors(v)) {
                    if (resolved[w] == 0) ++on_a;
                    if (resolved[w] == 1) ++on_b;
                }
                if (on_a + on_b == 0) {
                    waiting.push_back(v);
                } else {
                    decided.emplace_back(v, on_a >= on_b ? 0 : 1);
                }
            }
            if (decided.empty()) {
                // Cut off from both sides inside the area; nothing to attach to.
                for (NodeId v : waiting) resolved[v] = 0;
                break;
            }
            for (auto [v, s] : decided) resolved[v] = s;
            pending = std::move(waiting);
        }
        std::vector<Point2D> anchor_pos[2];
        for (NodeId v : area) {
            member[v] = 0;
            (resolved[v] == 0 ? rec.side_a : rec.side_b)++;
            if (network.nodes[v].is_anchor) anchor_pos[resolved[v]].push_back(network.nodes[v].position);
        }
        rec.anchors_a = anchor_pos[0].size();
        rec.anchors_b = anchor_pos[1].size();
        // A side needs a non-collinear anchor triple to be calibratable.
        const double slack = kCollinearSlack * network.range;
        const bool anchors_ok = options.min_anchors == 0 ||
                                (std::min(rec.anchors_a, rec.anchors_b) >= options.min_anchors &&
                                 best_triple_margin(anchor_pos[0]) >= slack && best_triple_margin(anchor_pos[1]) >= slack);

        if (rec.side_a == 0 || rec.side_b == 0) {
            rec.status = SplitStatus::Degenerate;
        } else if (std::min(rec.side_a, rec.side_b) < options.min_side || !anchors_ok) {
            rec.status = SplitStatus::SmallSide;
        } else {
            rec.status = SplitStatus::Split;
            rec.child = static_cast<AreaId>(map.z);
            for (NodeId v : area) {
                if (resolved[v] == 1) map.label[v] = rec.child;
            }
            ++map.z;
            ++map.w;
        }
        map.history.push_back(std::move(rec));
    }

    const auto areas = map.areas();
    for (std::size_t s = 0; s < areas.size(); ++s) {
        if (!induced_connected(adj, areas[s], member)) map.disconnected_areas.push_back(static_cast<AreaId>(s));
    }
    return map;
}

void write_partition_csv(std::ostream& out, const PartitionMap& map) {
    out << "node_id,area_label\n";
    for (std::size_t i = 0; i < map.label.size(); ++i) out << i << ',' << map.label[i] << '\n';
}

}  // namespace wsnloc
