#include "wsnloc/deployment.hpp"

#include <algorithm>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "wsnloc/error.hpp"
#include "wsnloc/seeding.hpp"

namespace wsnloc {

RangingModel RangingModel::gaussian(double sigma, std::uint64_t seed) {
    if (!(sigma >= 0.0)) throw Error("ranging sigma must be non-negative");
    return {Kind::Gaussian, sigma, seed};
}

RangingModel RangingModel::parse(const std::string& text) {
    if (text == "exact") return exact();
    if (text.rfind("gauss:", 0) == 0) {
        try {
            std::size_t used = 0;
            const double sigma = std::stod(text.substr(6), &used);
            if (used == text.size() - 6) return gaussian(sigma, 0);
        } catch (const std::exception&) {
        }
    }
    throw Error("bad ranging model: " + text);
}

std::string RangingModel::describe() const {
    if (kind == Kind::Exact) return "exact";
    std::ostringstream out;
    out << "gauss:" << sigma;
    return out.str();
}

Adjacency::Adjacency(std::size_t n, const std::vector<std::pair<NodeId, NodeId>>& edges) {
    std::vector<std::size_t> degree(n, 0);
    for (auto [a, b] : edges) {
        if (a == b || a >= n || b >= n) throw Error("bad edge");
        ++degree[a];
        ++degree[b];
    }
    offsets_.assign(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) offsets_[i + 1] = offsets_[i] + degree[i];
    targets_.resize(offsets_[n]);
    std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
    for (auto [a, b] : edges) {
        targets_[fill[a]++] = b;
        targets_[fill[b]++] = a;
    }
    for (std::size_t i = 0; i < n; ++i) {
        auto first = targets_.begin() + static_cast<std::ptrdiff_t>(offsets_[i]);
        auto last = targets_.begin() + static_cast<std::ptrdiff_t>(offsets_[i + 1]);
        std::sort(first, last);
        if (std::adjacent_find(first, last) != last) throw Error("duplicate edge");
    }
}

bool Adjacency::adjacent(NodeId i, NodeId j) const {
    const auto row = neighbors(i);
    return std::binary_search(row.begin(), row.end(), j);
}

std::size_t Network::anchor_count() const {
    return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const Node& n) { return n.is_anchor; }));
}

Network make_network(Scenario scenario, std::vector<Node> nodes, double range, RangingModel ranging) {
    if (!(range > 0.0)) throw Error("radio range must be positive");
    const double r2 = range * range;
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i].id != i) throw Error("node ids must be dense and ordered");
        for (std::size_t j = i + 1; j < nodes.size(); ++j) {
            const Point2D d = nodes[i].position - nodes[j].position;
            if (dot(d, d) > r2) continue;
            if (segment_blocked(scenario, nodes[i].position, nodes[j].position)) continue;
            edges.emplace_back(static_cast<NodeId>(i), static_cast<NodeId>(j));
        }
    }
    Network net;
    net.adjacency = Adjacency(nodes.size(), edges);
    net.scenario = std::move(scenario);
    net.nodes = std::move(nodes);
    net.range = range;
    net.ranging = ranging;
    return net;
}

bool is_connected(const Adjacency& adj) {
    const std::size_t n = adj.size();
    if (n == 0) return true;
    std::vector<char> seen(n, 0);
    std::vector<NodeId> stack{0};
    seen[0] = 1;
    std::size_t reached = 0;
    while (!stack.empty()) {
        const NodeId v = stack.back();
        stack.pop_back();
        ++reached;
        for (NodeId w : adj.neighbors(v)) {
            if (!seen[w]) {
                seen[w] = 1;
                stack.push_back(w);
            }
        }
    }
    return reached == n;
}

Network deploy(const Scenario& scenario, std::size_t n_unknown, std::size_t n_anchor, double range,
               std::uint64_t seed, const DeployOptions& options) {
    const std::size_t n = n_unknown + n_anchor;
    if (n < 4) throw Error("deployment needs at least 4 nodes");
    if (!(range > 0.0)) throw Error("radio range must be positive");

    std::mt19937_64 rng(splitmix64(seed));
    std::uniform_real_distribution<double> ux(0.0, scenario.width);
    std::uniform_real_distribution<double> uy(0.0, scenario.height);
    const RangingModel ranging{RangingModel::Kind::Exact, 0.0, splitmix64(seed ^ 0x5eedULL)};

    for (int attempt = 0; attempt < options.max_attempts; ++attempt) {
        std::vector<Node> nodes(n);
        for (std::size_t i = 0; i < n; ++i) {
            Point2D p;
            int tries = 0;
            do {
                p = {ux(rng), uy(rng)};
                if (++tries > 1'000'000) throw Error("undeployable scenario");
            } while (!point_in_free_space(scenario, p));
            nodes[i] = Node{static_cast<NodeId>(i), p, false};
        }
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t k = 0; k < n_anchor; ++k) nodes[order[k]].is_anchor = true;

        Network net = make_network(scenario, std::move(nodes), range, ranging);
        if (is_connected(net.adjacency)) return net;
    }
    throw Error("undeployable scenario");
}

double measure_distance(const Network& network, NodeId i, NodeId j) {
    const double truth = distance(network.nodes.at(i).position, network.nodes.at(j).position);
    if (i == j) return 0.0;
    if (!network.adjacency.adjacent(i, j)) throw Error("not a one-hop link");
    if (network.ranging.kind == RangingModel::Kind::Exact || network.ranging.sigma == 0.0) return truth;
    // Symmetric, order-free noise: one draw per unordered link.
    const std::uint64_t lo = std::min(i, j);
    const std::uint64_t hi = std::max(i, j);
    std::mt19937_64 rng(split_seed(network.ranging.seed, (hi << 32) | lo));
    std::normal_distribution<double> noise(0.0, network.ranging.sigma);
    return std::max(0.0, truth + noise(rng));
}

void write_node_list(std::ostream& out, const Network& network) {
    out << "# id x y is_anchor\n";
    out.precision(17);
    for (const auto& node : network.nodes) {
        out << node.id << ' ' << node.position.x << ' ' << node.position.y << ' ' << (node.is_anchor ? 1 : 0) << '\n';
    }
}

std::vector<Node> read_node_list(std::istream& in) {
    std::vector<Node> nodes;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream fields(line);
        Node node;
        int anchor = 0;
        if (!(fields >> node.id >> node.position.x >> node.position.y >> anchor) || (anchor != 0 && anchor != 1)) {
            throw Error("bad node list line " + std::to_string(line_no));
        }
        node.is_anchor = anchor == 1;
        if (node.id != nodes.size()) throw Error("node ids must be dense and ordered");
        nodes.push_back(node);
    }
    return nodes;
}

}  // namespace wsnloc
