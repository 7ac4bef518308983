#pragma once

#include <cmath>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace wsnloc {

// Absolute tolerance for all geometric predicates, in meters.
inline constexpr double kGeomEps = 1e-9;

struct Point2D {
    double x = 0.0;
    double y = 0.0;

    friend Point2D operator+(Point2D a, Point2D b) { return {a.x + b.x, a.y + b.y}; }
    friend Point2D operator-(Point2D a, Point2D b) { return {a.x - b.x, a.y - b.y}; }
    friend Point2D operator*(double s, Point2D a) { return {s * a.x, s * a.y}; }
    friend bool operator==(Point2D a, Point2D b) = default;
};

inline double dot(Point2D a, Point2D b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2D a, Point2D b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2D a) { return std::hypot(a.x, a.y); }
inline double distance(Point2D a, Point2D b) { return norm(a - b); }

// Minimum triangle-inequality margin, as a fraction of the radio range, for a
// triple to count as non-collinear.
inline constexpr double kCollinearSlack = 0.05;

// Smallest of the three triangle-inequality margins of a triangle with the
// given side lengths; near zero for collinear points.
double triangle_margin(double d_ox, double d_oy, double d_xy);
// Largest triangle margin over all triples; -inf with fewer than 3 points.
double best_triple_margin(std::span<const Point2D> pts);

struct Polygon {
    std::vector<Point2D> vertices;  // simple, either orientation
};

struct Circle {
    Point2D center;
    double radius = 0.0;
};

// A single obstacle primitive. Multi-part obstacles are stored in a Scenario
// as several disjoint primitives.
using Obstacle = std::variant<Polygon, Circle>;

struct Scenario {
    std::string name;
    double width = 100.0;
    double height = 100.0;
    std::vector<Obstacle> obstacles;
};

// Signed shoelace area; positive for counter-clockwise vertex order.
double signed_area(const Polygon& poly);

// Throws Error when the polygon/circle is malformed (fewer than 3 vertices,
// non-positive area, self-intersection, non-positive radius).
void validate_obstacle(const Obstacle& obstacle);

// Throws Error when the scenario breaks an invariant: bad dimensions, an
// obstacle leaving the area, or a polygon edge not longer than `range`
// (pass range <= 0 to skip the edge check).
void validate_scenario(const Scenario& scenario, double range = 0.0);

// True iff p lies strictly inside the obstacle (boundary excluded).
bool point_in_obstacle(const Obstacle& obstacle, Point2D p);

// True iff p lies inside the area and strictly outside every obstacle.
bool point_in_free_space(const Scenario& scenario, Point2D p);

// True iff the open segment pq passes through the interior of the obstacle.
// Grazing contact with the boundary does not count.
bool segment_blocked(const Obstacle& obstacle, Point2D p, Point2D q);

// Union of the per-obstacle test. Throws Error("endpoint not in free space")
// when p or q lies strictly inside an obstacle.
bool segment_blocked(const Scenario& scenario, Point2D p, Point2D q);

// Axis-aligned bounding box of an obstacle: {min, max}.
std::pair<Point2D, Point2D> bounding_box(const Obstacle& obstacle);

enum class CornerKind { Convex, Concave, Straight };

// Classifies vertex `index` of the polygon by turning direction: convex when
// the interior angle is below 180 degrees.
CornerKind classify_corner(const Polygon& poly, std::size_t index);

// Convex polygon vertices that do not sit on the deployment area boundary.
// Vertices on the boundary are not reachable by nodes from outside.
std::vector<Point2D> free_convex_corners(const Scenario& scenario);

struct IdealStats {
    std::optional<int> convex_corners;  // nullopt means "infinite" (curved obstacle)
    double ideal_seg_nodes = 0.0;
    std::set<int> ideal_pairs;
    std::set<int> ideal_subnets;
};

// Pair count predicted for one circle of radius r under range L, following
// the three-case analysis of nodes evenly spread along the circumference.
int circle_ideal_pairs(double radius, double range);

IdealStats ideal_partition_stats(const Scenario& scenario, double range);

// Canonical scenario names, in reporting order.
const std::vector<std::string>& canonical_scenario_names();

// One of the canonical names or "none". Throws Error on unknown ids.
Scenario build_scenario(std::string_view id);

// A single circular obstacle of the given diameter centred in the 100x100 area.
Scenario circle_scenario(double diameter);

// Scenario files are JSON documents (see scenarios/ for examples).
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);
std::string scenario_to_json(const Scenario& scenario);

// A canonical name resolves to build_scenario, anything else is read as a file.
Scenario resolve_scenario(const std::string& name_or_path);

}  // namespace wsnloc
