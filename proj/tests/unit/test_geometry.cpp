#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "wsnloc/error.hpp"
#include "wsnloc/geometry.hpp"

using namespace wsnloc;

namespace {

Polygon square(double x0, double y0, double x1, double y1) { return Polygon{{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}}; }

Scenario with(std::vector<Obstacle> obstacles) {
    Scenario s;
    s.name = "test";
    s.obstacles = std::move(obstacles);
    return s;
}

}  // namespace

TEST_CASE("segment blocking examples") {
    const Scenario sq = with({square(40, 40, 60, 60)});
    CHECK(segment_blocked(sq, {0, 50}, {100, 50}));
    CHECK_FALSE(segment_blocked(Obstacle{Circle{{50, 50}, 10}}, {0, 0}, {10, 0}));
    CHECK(segment_blocked(Obstacle{Circle{{5, 5}, 1}}, {0, 0}, {10, 10}));
}

TEST_CASE("grazing contact is not blocking") {
    const Obstacle sq = square(40, 40, 60, 60);
    CHECK_FALSE(segment_blocked(sq, {0, 40}, {100, 40}));  // runs along an edge
    CHECK_FALSE(segment_blocked(sq, {30, 50}, {50, 30}));  // touches only the corner (40,40)
    const Obstacle c = Circle{{50, 50}, 10};
    CHECK_FALSE(segment_blocked(c, {0, 60}, {100, 60}));  // tangent
    CHECK(segment_blocked(c, {0, 59.9}, {100, 59.9}));
}

TEST_CASE("endpoint inside an obstacle is an error") {
    const Scenario sq = with({square(40, 40, 60, 60)});
    CHECK_THROWS_WITH_AS(segment_blocked(sq, {50, 50}, {0, 0}), "endpoint not in free space", Error);
}

TEST_CASE("free space examples") {
    const Scenario sq = with({square(40, 40, 60, 60)});
    CHECK_FALSE(point_in_free_space(sq, {50, 50}));
    CHECK(point_in_free_space(sq, {1, 1}));
    CHECK_FALSE(point_in_free_space(sq, {101, 50}));
}

TEST_CASE("blocking agrees with dense point sampling") {
    const std::vector<Obstacle> shapes{
        square(30, 35, 70, 65),
        Polygon{{{20, 20}, {80, 20}, {80, 80}, {60, 80}, {60, 40}, {40, 40}, {40, 80}, {20, 80}}},  // U, with reflex corners
        Circle{{50, 50}, 22.5},
    };
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> coord(0.0, 100.0);
    int mismatches = 0;
    for (const Obstacle& ob : shapes) {
        int tested = 0;
        while (tested < 1000) {
            const Point2D p{coord(rng), coord(rng)};
            const Point2D q{coord(rng), coord(rng)};
            if (point_in_obstacle(ob, p) || point_in_obstacle(ob, q)) continue;
            ++tested;
            if (segment_blocked(ob, p, q) != oracle::sampled_blocked(ob, p, q, 10'000)) ++mismatches;
        }
    }
    CHECK(mismatches == 0);
}

TEST_CASE("blocking is symmetric and vanishes outside the bounding box") {
    const Scenario sc = build_scenario("smiling_face");
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> coord(0.0, 100.0);
    for (int t = 0; t < 2000; ++t) {
        const Point2D p{coord(rng), coord(rng)};
        const Point2D q{coord(rng), coord(rng)};
        if (!point_in_free_space(sc, p) || !point_in_free_space(sc, q)) continue;
        CHECK(segment_blocked(sc, p, q) == segment_blocked(sc, q, p));
        for (const Obstacle& ob : sc.obstacles) {
            const auto [lo, hi] = bounding_box(ob);
            const bool outside = std::max(p.x, q.x) < lo.x || std::min(p.x, q.x) > hi.x || std::max(p.y, q.y) < lo.y ||
                                 std::min(p.y, q.y) > hi.y;
            if (outside) CHECK_FALSE(segment_blocked(ob, p, q));
        }
    }
}

TEST_CASE("corner classification matches the chord test") {
    // L-shaped obstacle, clockwise, with one reflex vertex.
    const Polygon poly{{{0, 0}, {0, 40}, {20, 40}, {20, 20}, {40, 20}, {40, 0}}};
    const Obstacle ob = poly;
    int convex = 0;
    for (std::size_t i = 0; i < poly.vertices.size(); ++i) {
        const auto kind = classify_corner(poly, i);
        const Point2D v = poly.vertices[i];
        const Point2D prev = poly.vertices[(i + poly.vertices.size() - 1) % poly.vertices.size()];
        const Point2D next = poly.vertices[(i + 1) % poly.vertices.size()];
        for (double t : {0.01, 0.05, 0.2}) {
            const Point2D a = v + t * (prev - v);
            const Point2D b = v + t * (next - v);
            const Point2D mid = 0.5 * (a + b);
            if (kind == CornerKind::Convex) CHECK(point_in_obstacle(ob, mid));
            if (kind == CornerKind::Concave) CHECK_FALSE(point_in_obstacle(ob, mid));
        }
        if (kind == CornerKind::Convex) ++convex;
    }
    CHECK(convex == 5);
    CHECK(classify_corner(poly, 3) == CornerKind::Concave);
}

TEST_CASE("malformed obstacles and scenarios are rejected") {
    CHECK_THROWS_AS(validate_obstacle(Polygon{{{0, 0}, {1, 1}}}), Error);
    CHECK_THROWS_AS(validate_obstacle(Polygon{{{0, 0}, {10, 10}, {20, 20}}}), Error);
    CHECK_THROWS_AS(validate_obstacle(Polygon{{{0, 0}, {10, 10}, {10, 0}, {0, 10}}}), Error);  // bow tie
    CHECK_THROWS_AS(validate_obstacle(Circle{{0, 0}, 0.0}), Error);
    CHECK_THROWS_AS(validate_scenario(with({square(90, 90, 120, 120)})), Error);
    CHECK_THROWS_AS(validate_scenario(with({square(40, 40, 50, 60)}), 15.0), Error);  // 10 m edge
    CHECK_NOTHROW(validate_scenario(with({square(40, 40, 60, 60)}), 15.0));
}

TEST_CASE("canonical scenarios") {
    for (const auto& name : canonical_scenario_names()) {
        CAPTURE(name);
        const Scenario sc = build_scenario(name);
        CHECK(sc.width == 100.0);
        CHECK(sc.height == 100.0);
        CHECK_NOTHROW(validate_scenario(sc, 15.0));
    }
    CHECK(canonical_scenario_names().size() == 8);
    CHECK(build_scenario("none").obstacles.empty());
    CHECK_THROWS_AS(build_scenario("hexagon"), Error);

    const Scenario rect = build_scenario("rectangular");
    REQUIRE(rect.obstacles.size() == 1);
    CHECK(free_convex_corners(rect).size() == 4);

    const Scenario circ = circle_scenario(60.0);
    REQUIRE(circ.obstacles.size() == 1);
    CHECK(std::get<Circle>(circ.obstacles[0]).radius == doctest::Approx(30.0));

    const Scenario smile = build_scenario("smiling_face");
    int circles = 0;
    for (const auto& ob : smile.obstacles) {
        if (const auto* c = std::get_if<Circle>(&ob)) {
            ++circles;
            CHECK(c->radius == doctest::Approx(10.0));
        }
    }
    CHECK(circles == 2);
}

TEST_CASE("ideal partition statistics") {
    const auto c = ideal_partition_stats(build_scenario("c_shape"), 15.0);
    CHECK(c.convex_corners == 2);
    CHECK(c.ideal_pairs == std::set<int>{2});
    CHECK(c.ideal_subnets == std::set<int>{3});

    const auto h = ideal_partition_stats(build_scenario("h_shape"), 15.0);
    CHECK(h.convex_corners == 4);
    CHECK(h.ideal_pairs == std::set<int>{4});
    CHECK(h.ideal_subnets == std::set<int>{3});

    const auto circ = ideal_partition_stats(circle_scenario(60.0), 15.0);
    CHECK_FALSE(circ.convex_corners.has_value());
    CHECK(circ.ideal_seg_nodes == doctest::Approx(12.566).epsilon(1e-4));
    CHECK(circ.ideal_pairs == std::set<int>{0, 1, 2});

    for (double r : {2.0, 5.0, 10.0, 20.0, 30.0, 45.0}) {
        const int p = circle_ideal_pairs(r, 15.0);
        CHECK(p >= 0);
        CHECK(p <= 2);
    }
}

TEST_CASE("bundled scenario files match the builders") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::path(WSNLOC_SOURCE_DIR) / "scenarios";
    std::vector<std::string> names = canonical_scenario_names();
    names.push_back("none");
    for (const auto& name : names) {
        CAPTURE(name);
        const fs::path file = dir / (name + ".json");
        REQUIRE(fs::exists(file));
        const Scenario loaded = load_scenario(file.string());
        CHECK(scenario_to_json(loaded) == scenario_to_json(build_scenario(name)));
    }
}

TEST_CASE("scenario JSON round trip and errors") {
    const Scenario sc = build_scenario("maze");
    const Scenario back = parse_scenario(scenario_to_json(sc));
    CHECK(scenario_to_json(back) == scenario_to_json(sc));
    CHECK_THROWS_AS(parse_scenario("{\"name\": \"x\"}"), Error);
    CHECK_THROWS_AS(parse_scenario("not json"), Error);
    CHECK_THROWS_AS(load_scenario("/nonexistent/path.json"), Error);
}
