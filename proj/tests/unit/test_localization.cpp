#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "wsnloc/error.hpp"
#include "wsnloc/localization.hpp"

using namespace wsnloc;

namespace {

constexpr double kL = 15.0;

Network network_at(const std::vector<Point2D>& pts, std::vector<bool> anchors = {}) {
    std::vector<Node> nodes;
    for (std::size_t i = 0; i < pts.size(); ++i)
        nodes.push_back({static_cast<NodeId>(i), pts[i], i < anchors.size() && anchors[i]});
    return make_network(build_scenario("none"), std::move(nodes), kL);
}

std::vector<NodeId> all_ids(const Network& net) {
    std::vector<NodeId> ids(net.size());
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<NodeId>(i);
    return ids;
}

bool near(Point2D a, Point2D b, double tol) { return distance(a, b) <= tol; }

}  // namespace

TEST_CASE("reference triple examples") {
    // Triangle {0,1,2} with a pendant 3 hanging off node 2.
    const Network net = network_at({{20, 20}, {30, 20}, {25, 28}, {25, 40}});
    const auto refs = select_references(net, all_ids(net));
    std::set<NodeId> triple{refs.o, refs.x, refs.y};
    CHECK(triple == std::set<NodeId>{0, 1, 2});
    CHECK(refs.objective == 5);

    // Complete graph on four nodes: every triple ties, the smallest wins.
    const Network k4 = network_at({{20, 20}, {30, 20}, {25, 28}, {25, 15}});
    const auto r4 = select_references(k4, all_ids(k4));
    CHECK(r4.o == 0);
    CHECK(r4.x == 1);
    CHECK(r4.y == 2);

    // Collinear triple is rejected.
    const Network line = network_at({{20, 20}, {25, 20}, {30, 20}});
    CHECK_THROWS_WITH_AS(select_references(line, all_ids(line)), "no reference triple", Error);
}

TEST_CASE("trilateration examples") {
    const std::vector<Point2D> k{{0, 0}, {10, 0}, {0, 10}};
    const std::vector<double> d{5, std::sqrt(65.0), std::sqrt(45.0)};
    CHECK(near(trilaterate(k, d, kL), {3, 4}, 1e-12));

    const std::vector<double> at_known{0, 10, 10};
    CHECK(near(trilaterate(k, at_known, kL), {0, 0}, 1e-12));

    const std::vector<Point2D> collinear{{0, 0}, {5, 0}, {10, 0}};
    CHECK_THROWS_AS(trilaterate(collinear, d, kL), Error);
    const std::vector<double> bad{5, 5, 5};
    CHECK_THROWS_WITH_AS(trilaterate(k, bad, kL), "inconsistent trilateration", Error);
}

TEST_CASE("trilateration is order-invariant and rigid-motion equivariant") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(-10, 10);
    for (int t = 0; t < 200; ++t) {
        std::vector<Point2D> k;
        for (int i = 0; i < 4; ++i) k.push_back({u(rng), u(rng)});
        if (best_triple_margin(k) < 0.5) continue;
        const Point2D target{u(rng), u(rng)};
        std::vector<double> d;
        for (Point2D p : k) d.push_back(distance(p, target));
        const Point2D base = trilaterate(k, d, kL);

        std::vector<std::size_t> order{3, 1, 0, 2};
        std::vector<Point2D> k2;
        std::vector<double> d2;
        for (std::size_t i : order) {
            k2.push_back(k[i]);
            d2.push_back(d[i]);
        }
        CHECK(near(trilaterate(k2, d2, kL), base, 1e-9));

        const auto m = oracle::random_motion(rng);
        std::vector<Point2D> km;
        for (Point2D p : k) km.push_back(m(p));
        CHECK(near(trilaterate(km, d, kL), m(base), 1e-8));
    }
}

TEST_CASE("two-circle examples") {
    CHECK(near(two_circle_locate({0, 0}, {10, 0}, 4, 6, {5, 5}, kL), {4, 0}, 1e-12));
    CHECK(near(two_circle_locate({0, 0}, {6, 0}, 5, 5, {3, 10}, kL), {3, -4}, 1e-12));
    CHECK_THROWS_WITH_AS(circle_intersections({0, 0}, 1, {10, 0}, 1, kL), "no intersection", Error);
    // Tangency within tolerance collapses to one point.
    const auto [a, b] = circle_intersections({0, 0}, 4, {10, 0}, 6 + 1e-11, kL);
    CHECK(near(a, b, 1e-6));
    CHECK(near(a, {4, 0}, 1e-6));
}

TEST_CASE("two-circle location is rigid-motion equivariant") {
    std::mt19937_64 rng(32);
    std::uniform_real_distribution<double> u(-10, 10);
    for (int t = 0; t < 200; ++t) {
        const Point2D k1{u(rng), u(rng)}, k2{u(rng), u(rng)}, target{u(rng), u(rng)}, third{u(rng), u(rng)};
        if (distance(k1, k2) < 1.0 || std::abs(cross(k2 - k1, target - k1)) < 1.0) continue;
        if (std::abs(cross(k2 - k1, third - k1)) < 1.0) continue;
        const double d1 = distance(k1, target), d2 = distance(k2, target);
        const Point2D p = two_circle_locate(k1, k2, d1, d2, third, kL);
        const auto m = oracle::random_motion(rng);
        CHECK(near(two_circle_locate(m(k1), m(k2), d1, d2, m(third), kL), m(p), 1e-8));
    }
}

TEST_CASE("arc midpoint examples") {
    const std::vector<Point2D> one{{7, 0}};
    const auto a = arc_midpoint_locate({0, 0}, 5, one, 3);
    CHECK(near(a.position, {-5, 0}, 1e-9));
    CHECK_FALSE(a.low_confidence);

    const auto free = arc_midpoint_locate({2, 3}, 5, {}, 3);
    CHECK(near(free.position, {7, 3}, 1e-12));

    const std::vector<Point2D> pair{{0, 7}, {0, -7}};
    const auto s = arc_midpoint_locate({0, 0}, 5, pair, 3);
    CHECK(std::abs(s.position.y) < 1e-9);
    CHECK(std::abs(std::abs(s.position.x) - 5.0) < 1e-9);
    CHECK(s.end >= s.start);

    const std::vector<Point2D> all{{6, 0}, {-6, 0}, {0, 6}, {0, -6}};
    CHECK(arc_midpoint_locate({0, 0}, 5, all, 6).low_confidence);
    CHECK_THROWS_AS(arc_midpoint_locate({0, 0}, 0, one, 3), Error);
}

TEST_CASE("arc midpoint agrees with angular sampling") {
    std::mt19937_64 rng(33);
    std::uniform_real_distribution<double> ang(0, 2 * std::numbers::pi);
    std::uniform_real_distribution<double> rad(2, 14);
    int checked = 0;
    while (checked < 100) {
        const double d = rad(rng);
        std::vector<Point2D> ex;
        const int m = 1 + static_cast<int>(rng() % 3);
        for (int i = 0; i < m; ++i) {
            std::uniform_real_distribution<double> reach(std::max(0.5, kL - d + 0.1), kL + d - 0.1);
            const double a = ang(rng), r = reach(rng);
            ex.push_back({r * std::cos(a), r * std::sin(a)});
        }
        const auto ref = oracle::sampled_arc({0, 0}, d, ex, kL, 20'000);
        if (!ref.any || ref.full || ref.length - ref.runner_up < 1e-2) continue;
        const auto est = arc_midpoint_locate({0, 0}, d, ex, kL);
        CHECK(oracle::angle_gap(std::atan2(est.position.y, est.position.x), ref.mid) < 1e-3);
        CHECK(distance(est.position, {0, 0}) == doctest::Approx(d));
        ++checked;
    }
}

TEST_CASE("affine fit round trips") {
    std::vector<Point2D> rel{{0, 0}, {10, 0}, {3, 8}, {-4, 6}};
    const auto id = fit_transform(rel, rel, kL);
    CHECK(id.r1 == doctest::Approx(1.0));
    CHECK(std::abs(id.r2) < 1e-12);
    CHECK(std::abs(id.r3) < 1e-12);
    CHECK(id.r4 == doctest::Approx(1.0));
    CHECK(std::abs(id.dx) < 1e-12);
    CHECK(std::abs(id.dy) < 1e-12);

    // 90 degree rotation plus (5, -2).
    std::vector<Point2D> glob;
    for (Point2D p : rel) glob.push_back({-p.y + 5, p.x - 2});
    const auto rot = fit_transform(rel, glob, kL);
    CHECK(std::abs(rot.r1) < 1e-12);
    CHECK(rot.r2 == doctest::Approx(-1.0));
    CHECK(rot.r3 == doctest::Approx(1.0));
    CHECK(std::abs(rot.r4) < 1e-12);
    CHECK(rot.dx == doctest::Approx(5.0));
    CHECK(rot.dy == doctest::Approx(-2.0));

    std::vector<Point2D> mirrored;
    for (Point2D p : rel) mirrored.push_back({p.x + 1, -p.y + 1});
    const auto refl = fit_transform(rel, mirrored, kL);
    CHECK(refl.det() < 0);
    for (std::size_t i = 0; i < rel.size(); ++i) CHECK(near(refl.apply(rel[i]), mirrored[i], 1e-12));

    const std::vector<Point2D> two{{0, 0}, {1, 0}};
    CHECK_THROWS_WITH_AS(fit_transform(two, two, kL), "uncalibratable subnet", Error);
    const std::vector<Point2D> line{{0, 0}, {5, 0}, {10, 0}};
    CHECK_THROWS_WITH_AS(fit_transform(line, line, kL), "uncalibratable subnet", Error);
}

TEST_CASE("dense subnet localizes exactly up to one rigid motion") {
    const Network net = deploy(build_scenario("none"), 150, 10, kL, 4);
    std::vector<NodeId> sub;
    for (NodeId i = 0; i < net.size(); ++i) {
        if (net.nodes[i].position.x < 40 && net.nodes[i].position.y < 40) sub.push_back(i);
    }
    const auto refs = select_references(net, sub);
    const RelativeFrame f = localize_subnetwork(net, sub, refs);
    REQUIRE(f.members == sub);
    std::vector<Point2D> rel, truth;
    for (std::size_t i = 0; i < sub.size(); ++i) {
        if (!f.coords[i] || f.tags[i] == CaseTag::Arc) continue;
        rel.push_back(*f.coords[i]);
        truth.push_back(net.nodes[sub[i]].position);
    }
    REQUIRE(rel.size() >= 3);
    const auto t = fit_transform(rel, truth, kL);
    CHECK(std::abs(std::abs(t.det()) - 1.0) < 1e-9);
    for (std::size_t i = 0; i < rel.size(); ++i) CHECK(near(t.apply(rel[i]), truth[i], 1e-6));

    // Reference roles: origin at 0, x on the positive axis, y above it.
    const auto io = f.index_of(refs.o), ix = f.index_of(refs.x), iy = f.index_of(refs.y);
    REQUIRE((io && ix && iy));
    CHECK(near(*f.coords[*io], {0, 0}, 1e-12));
    CHECK(std::abs(f.coords[*ix]->y) < 1e-12);
    CHECK(f.coords[*ix]->x > 0);
    CHECK(f.coords[*iy]->y > 0);
}

TEST_CASE("nodes that hear all three references are case 1") {
    // Three references near the centre and a ring of nodes within range of all.
    std::vector<Point2D> pts{{50, 50}, {55, 50}, {52, 54}};
    for (int i = 0; i < 12; ++i) {
        const double a = 2 * std::numbers::pi * i / 12;
        pts.push_back({52 + 6 * std::cos(a), 51 + 6 * std::sin(a)});
    }
    const Network net = network_at(pts);
    ReferenceTriple refs{0, 1, 2, 5.0, distance(pts[0], pts[2]), distance(pts[1], pts[2])};
    const RelativeFrame f = localize_subnetwork(net, all_ids(net), refs);
    for (std::size_t i = 3; i < pts.size(); ++i) CHECK(f.tags[i] == CaseTag::Trilateration);
}

TEST_CASE("an isolated node stays unresolved") {
    const Network net = network_at({{20, 20}, {30, 20}, {25, 28}, {22, 25}, {90, 90}});
    const auto ids = all_ids(net);
    const auto refs = select_references(net, std::vector<NodeId>{0, 1, 2, 3});
    const RelativeFrame f = localize_subnetwork(net, ids, refs);
    CHECK(f.tags[4] == CaseTag::Unresolved);
    CHECK_FALSE(f.coords[4].has_value());
}

TEST_CASE("calibration recovers truth and is idempotent") {
    const Network net = deploy(build_scenario("none"), 300, 25, kL, 6);
    const PartitionMap whole{std::vector<AreaId>(net.size(), 0)};
    const LocalizationResult res = localize_network(net, whole);
    REQUIRE(res.subnets.size() == 1);
    REQUIRE(res.subnets[0].calibration.has_value());
    const RelativeFrame& frame = *res.subnets[0].frame;
    std::size_t exact = 0;
    for (std::size_t i = 0; i < frame.members.size(); ++i) {
        const NodeId v = frame.members[i];
        REQUIRE(res.global_estimate[v].has_value());
        if (!frame.clean[i]) continue;
        ++exact;
        CHECK(near(*res.global_estimate[v], net.nodes[v].position, 1e-9));
    }
    CHECK(exact * 10 >= net.size() * 9);

    // Recalibrating a frame already in global coordinates yields the identity.
    RelativeFrame g = *res.subnets[0].frame;
    for (std::size_t i = 0; i < g.members.size(); ++i) g.coords[i] = res.global_estimate[g.members[i]];
    std::vector<std::pair<NodeId, Point2D>> anchors;
    for (const Node& n : net.nodes) {
        if (n.is_anchor) anchors.emplace_back(n.id, n.position);
    }
    const Calibration c = calibrate(g, anchors, kL);
    CHECK(c.transform.r1 == doctest::Approx(1.0));
    CHECK(c.transform.r4 == doctest::Approx(1.0));
    CHECK(std::abs(c.transform.r2) < 1e-9);
    CHECK(std::abs(c.transform.r3) < 1e-9);
    CHECK(std::abs(c.transform.dx) < 1e-9);
    CHECK(std::abs(c.transform.dy) < 1e-9);
    CHECK_FALSE(c.anchor_deficient);
    CHECK(c.anchors_used >= 3);
    CHECK(c.anchors_used <= anchors.size());
}

TEST_CASE("two exact anchors calibrate rigidly, the rest pick the mirror side") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> coord(0.0, 100.0);
    int checked = 0;
    while (checked < 50) {
        const oracle::Motion motion = oracle::random_motion(rng);
        RelativeFrame f;
        std::vector<Point2D> truth;
        std::vector<std::pair<NodeId, Point2D>> anchors;
        for (NodeId v = 0; v < 12; ++v) {
            truth.push_back({coord(rng), coord(rng)});
            f.members.push_back(v);
            f.coords.push_back(motion(truth.back()));
            f.tags.push_back(CaseTag::Trilateration);
            f.clean.push_back(1);
            if (v < 4) anchors.emplace_back(v, truth.back());
        }
        // Anchors 2 and 3 lost exact lineage and sit a few metres off, but
        // well clear of the mirror line through anchors 0 and 1.
        const Point2D axis = truth[1] - truth[0];
        if (norm(axis) < 10.0) continue;
        auto off_axis = [&](Point2D p) { return std::abs(cross(axis, p - truth[0])) / norm(axis); };
        if (off_axis(truth[2]) < 10.0 || off_axis(truth[3]) < 10.0) continue;
        for (NodeId v : {NodeId{2}, NodeId{3}}) {
            f.clean[v] = 0;
            f.tags[v] = CaseTag::Arc;
            *f.coords[v] = *f.coords[v] + Point2D{2.0, -1.5};
        }
        const Calibration c = calibrate(f, anchors, kL);
        CHECK(c.anchor_deficient);
        for (NodeId v = 0; v < 12; ++v) {
            if (f.clean[v]) CHECK(near(c.transform.apply(*f.coords[v]), truth[v], 1e-9));
        }
        ++checked;
    }
}

TEST_CASE("exact placements are exact after calibration on obstacle layouts") {
    for (const char* name : {"c_shape", "h_shape", "s_shape", "circular"}) {
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            CAPTURE(name);
            CAPTURE(seed);
            const Network net = deploy(build_scenario(name), 300, 25, kL, seed);
            const PartitionMap whole{std::vector<AreaId>(net.size(), 0)};
            const LocalizationResult res = localize_network(net, whole);
            for (NodeId i = 0; i < net.size(); ++i) {
                const CaseTag tag = res.tag[i];
                if (tag != CaseTag::Reference && tag != CaseTag::Trilateration && tag != CaseTag::TwoCircle) continue;
                const auto& sub = res.subnets[res.subnet_of[i]];
                if (!sub.calibration || sub.calibration->anchor_deficient) continue;
                REQUIRE(res.global_estimate[i].has_value());
                CHECK(distance(*res.global_estimate[i], net.nodes[i].position) <= 1e-6);
            }
        }
    }
}

TEST_CASE("localization CSV has one row per node") {
    const Network net = deploy(build_scenario("none"), 150, 10, kL, 2);
    const PartitionMap whole{std::vector<AreaId>(net.size(), 0)};
    const LocalizationResult res = localize_network(net, whole);
    std::ostringstream out;
    write_localization_csv(out, res, net);
    const std::string text = out.str();
    CHECK(std::count(text.begin(), text.end(), '\n') == static_cast<long>(net.size() + 1));
    CHECK(text.rfind("node_id,subnet,case_tag,", 0) == 0);
}
