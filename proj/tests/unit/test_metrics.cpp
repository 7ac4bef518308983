#include <random>

#include "doctest.h"
#include "wsnloc/error.hpp"
#include "wsnloc/localization.hpp"
#include "wsnloc/metrics.hpp"

using namespace wsnloc;

namespace {

LocalizationResult perfect(const Network& net) {
    LocalizationResult r;
    r.subnet_of.assign(net.size(), 0);
    r.tag.assign(net.size(), CaseTag::Trilateration);
    for (const Node& n : net.nodes) {
        r.relative.push_back(n.position);
        r.global_estimate.push_back(n.position);
    }
    return r;
}

// Blocked in-range pairs by direct enumeration.
std::size_t blocked_pairs(const Network& net, const std::vector<AreaId>* labels) {
    std::size_t count = 0;
    for (std::size_t i = 0; i < net.size(); ++i) {
        for (std::size_t j = i + 1; j < net.size(); ++j) {
            const Point2D p = net.nodes[i].position, q = net.nodes[j].position;
            if (distance(p, q) > net.range || !segment_blocked(net.scenario, p, q)) continue;
            if (labels && (*labels)[i] != (*labels)[j]) continue;
            ++count;
        }
    }
    return count;
}

}  // namespace

TEST_CASE("blocked pair counts") {
    const Network open = deploy(build_scenario("none"), 150, 10, 15.0, 1);
    CHECK(spo_count(open) == 0);
    CHECK(in_range_pairs(open) == open.adjacency.edge_count());

    std::mt19937_64 rng(2);
    for (const auto& name : canonical_scenario_names()) {
        CAPTURE(name);
        const Network net = deploy(build_scenario(name), 200, 15, 15.0, 9);
        std::vector<AreaId> labels(net.size());
        for (auto& l : labels) l = static_cast<AreaId>(rng() % 3);
        CHECK(spo_count(net) == blocked_pairs(net, nullptr));
        CHECK(spo_count(net, &labels) == blocked_pairs(net, &labels));
        CHECK(spo_count(net, &labels) <= spo_count(net));
        CHECK(in_range_pairs(net) == net.adjacency.edge_count() + spo_count(net));

        // Giving every node its own label severs everything.
        for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<AreaId>(i);
        CHECK(spo_count(net, &labels) == 0);
    }
}

TEST_CASE("ACD terms") {
    CHECK(acd_term(10, 1) == doctest::Approx(0.9));
    CHECK(acd_term(10, 0) == 1.0);
    CHECK(acd_term(0, 0) == 1.0);
    CHECK(acd_term(4, 4) == 0.0);

    TrialMetrics t;
    t.acd_term = 0.625;
    const std::vector<TrialMetrics> same(7, t);
    CHECK(acd(same) == doctest::Approx(0.625));
    CHECK_THROWS_AS(acd(std::span<const TrialMetrics>{}), Error);
}

TEST_CASE("localization error") {
    const Network net = deploy(build_scenario("c_shape"), 100, 8, 15.0, 3);
    LocalizationResult r = perfect(net);
    const MleResult exact = mle(r, net);
    CHECK(exact.mle == 0.0);
    CHECK(exact.inaccurate == 0);

    // Shift one unknown by 2 m, drop another entirely.
    NodeId first = 0, second = 0;
    for (const Node& n : net.nodes) {
        if (n.is_anchor) continue;
        if (first == 0 && n.id != 0) {
            first = n.id;
        } else if (second == 0 && n.id != first && n.id != 0) {
            second = n.id;
        }
    }
    REQUIRE(first != second);
    r.global_estimate[first] = net.nodes[first].position + Point2D{2, 0};
    r.global_estimate[second].reset();
    const MleResult bad = mle(r, net);
    const double unknowns = static_cast<double>(net.size() - net.anchor_count());
    // Unlocalized nodes are charged their distance to their area's centroid.
    Point2D centroid;
    for (const Node& n : net.nodes) centroid = centroid + n.position;
    centroid = (1.0 / static_cast<double>(net.size())) * centroid;
    const double centre_gap = distance(net.nodes[second].position, centroid);
    CHECK(bad.mle == doctest::Approx((2.0 + centre_gap) / unknowns));
    CHECK(bad.inaccurate == 2);
    CHECK(bad.unlocalized == 1);

    // Sub-tolerance offsets still count as accurate.
    LocalizationResult tiny = perfect(net);
    tiny.global_estimate[first] = net.nodes[first].position + Point2D{1e-8, 0};
    CHECK(mle(tiny, net).inaccurate == 0);
}

TEST_CASE("localization error ignores node order") {
    const Network net = deploy(build_scenario("h_shape"), 60, 6, 15.0, 4);
    LocalizationResult r = perfect(net);
    for (std::size_t i = 0; i < net.size(); i += 3) r.global_estimate[i] = net.nodes[i].position + Point2D{0.5, -0.25};
    const MleResult base = mle(r, net);

    std::vector<Node> reversed(net.nodes.rbegin(), net.nodes.rend());
    for (std::size_t i = 0; i < reversed.size(); ++i) reversed[i].id = static_cast<NodeId>(i);
    const Network flipped = make_network(net.scenario, reversed, net.range);
    LocalizationResult rf = r;
    std::reverse(rf.global_estimate.begin(), rf.global_estimate.end());
    const MleResult other = mle(rf, flipped);
    CHECK(other.mle == doctest::Approx(base.mle));
    CHECK(other.inaccurate == base.inaccurate);
}
