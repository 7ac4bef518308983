#include "wsnloc/geometry.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <queue>
#include <sstream>

#include "json.hpp"
#include "wsnloc/error.hpp"

namespace wsnloc {

namespace {

double distance_to_segment(Point2D p, Point2D a, Point2D b) {
    const Point2D ab = b - a;
    const double len2 = dot(ab, ab);
    if (len2 == 0.0) return distance(p, a);
    const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
    return distance(p, a + t * ab);
}

double distance_to_boundary(const Polygon& poly, Point2D p) {
    double best = std::numeric_limits<double>::infinity();
    const auto& v = poly.vertices;
    for (std::size_t i = 0; i < v.size(); ++i) {
        best = std::min(best, distance_to_segment(p, v[i], v[(i + 1) % v.size()]));
    }
    return best;
}

// Crossing-number test; boundary handling is left to the caller.
bool crossing_inside(const Polygon& poly, Point2D p) {
    bool inside = false;
    const auto& v = poly.vertices;
    for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
        if ((v[i].y > p.y) != (v[j].y > p.y)) {
            const double xi = v[j].x + (p.y - v[j].y) * (v[i].x - v[j].x) / (v[i].y - v[j].y);
            if (p.x < xi) inside = !inside;
        }
    }
    return inside;
}

bool segments_properly_touch(Point2D a, Point2D b, Point2D c, Point2D d) {
    const double d1 = cross(b - a, c - a);
    const double d2 = cross(b - a, d - a);
    const double d3 = cross(d - c, a - c);
    const double d4 = cross(d - c, b - c);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) {
        return true;
    }
    auto on = [](Point2D p, Point2D q, Point2D r) {
        return std::abs(cross(q - p, r - p)) <= kGeomEps &&
               std::min(p.x, q.x) - kGeomEps <= r.x && r.x <= std::max(p.x, q.x) + kGeomEps &&
               std::min(p.y, q.y) - kGeomEps <= r.y && r.y <= std::max(p.y, q.y) + kGeomEps;
    };
    return on(a, b, c) || on(a, b, d) || on(c, d, a) || on(c, d, b);
}

bool polygon_segment_blocked(const Polygon& poly, Point2D p, Point2D q) {
    const Point2D dir = q - p;
    const double len2 = dot(dir, dir);
    if (len2 == 0.0) return point_in_obstacle(poly, p);

    // Parameters along pq where the boundary is met; between consecutive
    // parameters the segment is either wholly inside or wholly outside.
    std::vector<double> ts{0.0, 1.0};
    const auto& v = poly.vertices;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const Point2D a = v[i];
        const Point2D b = v[(i + 1) % v.size()];
        const Point2D e = b - a;
        const double denom = cross(dir, e);
        const Point2D ap = a - p;
        if (std::abs(denom) > 1e-15 * std::sqrt(len2 * dot(e, e))) {
            const double t = cross(ap, e) / denom;
            const double u = cross(ap, dir) / denom;
            if (t > 0.0 && t < 1.0 && u >= -1e-12 && u <= 1.0 + 1e-12) ts.push_back(t);
        } else if (std::abs(cross(ap, dir)) <= kGeomEps * std::sqrt(len2)) {
            for (Point2D w : {a, b}) {
                const double t = dot(w - p, dir) / len2;
                if (t > 0.0 && t < 1.0) ts.push_back(t);
            }
        }
    }
    std::sort(ts.begin(), ts.end());
    const double seg_len = std::sqrt(len2);
    for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
        if ((ts[i + 1] - ts[i]) * seg_len <= kGeomEps) continue;
        const Point2D mid = p + (0.5 * (ts[i] + ts[i + 1])) * dir;
        if (point_in_obstacle(poly, mid)) return true;
    }
    return false;
}

bool on_area_boundary(const Scenario& s, Point2D p) {
    return std::abs(p.x) <= kGeomEps || std::abs(p.y) <= kGeomEps ||
           std::abs(p.x - s.width) <= kGeomEps || std::abs(p.y - s.height) <= kGeomEps;
}

std::string normalize_id(std::string_view id) {
    std::string out;
    for (char c : id) {
        if (c == '-' || c == ' ') {
            out.push_back('_');
        } else {
            out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        }
    }
    return out;
}

Polygon rect(double x0, double y0, double x1, double y1) {
    return Polygon{{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}};
}

struct CanonicalIdeal {
    std::set<int> pairs;
    std::set<int> subnets;
};

// Ideal pair and sub-network counts for the canonical layouts.
const std::map<std::string, CanonicalIdeal>& canonical_ideals() {
    static const std::map<std::string, CanonicalIdeal> table{
        {"c_shape", {{2}, {3}}},
        {"s_shape", {{4}, {5}}},
        {"h_shape", {{4}, {3}}},
        {"rectangular", {{4}, {4}}},
        {"circular", {{0, 1, 2}, {1, 2, 3}}},
        {"asymmetric_multi_rectangular", {{8}, {7}}},
        {"maze", {{6}, {7}}},
        {"smiling_face", {{4, 6, 8}, {4, 5}}},
    };
    return table;
}

}  // namespace

double signed_area(const Polygon& poly) {
    double acc = 0.0;
    const auto& v = poly.vertices;
    for (std::size_t i = 0; i < v.size(); ++i) acc += cross(v[i], v[(i + 1) % v.size()]);
    return 0.5 * acc;
}

void validate_obstacle(const Obstacle& obstacle) {
    if (const auto* c = std::get_if<Circle>(&obstacle)) {
        if (!(c->radius > 0.0) || !std::isfinite(c->radius)) throw Error("circle radius must be positive");
        return;
    }
    const auto& poly = std::get<Polygon>(obstacle);
    const auto& v = poly.vertices;
    if (v.size() < 3) throw Error("polygon needs at least 3 vertices");
    for (Point2D p : v) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw Error("polygon vertex not finite");
    }
    if (std::abs(signed_area(poly)) <= kGeomEps) throw Error("polygon has zero area");
    const std::size_t n = v.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (j == i + 1 || (i == 0 && j == n - 1)) continue;
            if (segments_properly_touch(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n])) {
                throw Error("polygon is self-intersecting");
            }
        }
    }
}

void validate_scenario(const Scenario& scenario, double range) {
    if (!(scenario.width > 0.0) || !(scenario.height > 0.0)) throw Error("scenario dimensions must be positive");
    for (const auto& ob : scenario.obstacles) {
        validate_obstacle(ob);
        auto [lo, hi] = bounding_box(ob);
        if (lo.x < -kGeomEps || lo.y < -kGeomEps || hi.x > scenario.width + kGeomEps ||
            hi.y > scenario.height + kGeomEps) {
            throw Error("obstacle leaves the deployment area");
        }
        if (range > 0.0) {
            if (const auto* poly = std::get_if<Polygon>(&ob)) {
                const auto& v = poly->vertices;
                for (std::size_t i = 0; i < v.size(); ++i) {
                    if (distance(v[i], v[(i + 1) % v.size()]) <= range) {
                        throw Error("polygon edge not longer than the radio range");
                    }
                }
            }
        }
    }

    // Free-space connectivity on a 0.5 m raster.
    const double cell = 0.5;
    const int nx = std::max(1, static_cast<int>(std::ceil(scenario.width / cell)));
    const int ny = std::max(1, static_cast<int>(std::ceil(scenario.height / cell)));
    std::vector<char> free(static_cast<std::size_t>(nx) * ny, 0);
    int total = 0;
    int seed = -1;
    for (int iy = 0; iy < ny; ++iy) {
        for (int ix = 0; ix < nx; ++ix) {
            const Point2D c{(ix + 0.5) * scenario.width / nx, (iy + 0.5) * scenario.height / ny};
            if (point_in_free_space(scenario, c)) {
                free[iy * nx + ix] = 1;
                ++total;
                if (seed < 0) seed = iy * nx + ix;
            }
        }
    }
    if (total == 0) throw Error("scenario has no free space");
    std::vector<char> seen(free.size(), 0);
    std::queue<int> bfs;
    bfs.push(seed);
    seen[seed] = 1;
    int reached = 0;
    while (!bfs.empty()) {
        const int c = bfs.front();
        bfs.pop();
        ++reached;
        const int cx = c % nx;
        const int cy = c / nx;
        const int nbr[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
        for (const auto& d : nbr) {
            const int x = cx + d[0];
            const int y = cy + d[1];
            if (x < 0 || y < 0 || x >= nx || y >= ny) continue;
            const int k = y * nx + x;
            if (free[k] && !seen[k]) {
                seen[k] = 1;
                bfs.push(k);
            }
        }
    }
    if (reached != total) throw Error("free space is not connected");
}

bool point_in_obstacle(const Obstacle& obstacle, Point2D p) {
    if (const auto* c = std::get_if<Circle>(&obstacle)) {
        return distance(p, c->center) < c->radius - kGeomEps;
    }
    const auto& poly = std::get<Polygon>(obstacle);
    return crossing_inside(poly, p) && distance_to_boundary(poly, p) > kGeomEps;
}

bool point_in_free_space(const Scenario& scenario, Point2D p) {
    if (!(p.x >= 0.0 && p.x <= scenario.width && p.y >= 0.0 && p.y <= scenario.height)) return false;
    for (const auto& ob : scenario.obstacles) {
        // Boundary points are not free either.
        if (const auto* c = std::get_if<Circle>(&ob)) {
            if (distance(p, c->center) <= c->radius + kGeomEps) return false;
        } else {
            const auto& poly = std::get<Polygon>(ob);
            if (crossing_inside(poly, p) || distance_to_boundary(poly, p) <= kGeomEps) return false;
        }
    }
    return true;
}

bool segment_blocked(const Obstacle& obstacle, Point2D p, Point2D q) {
    auto [lo, hi] = bounding_box(obstacle);
    if (std::max(p.x, q.x) < lo.x || std::min(p.x, q.x) > hi.x || std::max(p.y, q.y) < lo.y ||
        std::min(p.y, q.y) > hi.y) {
        return false;
    }
    if (const auto* c = std::get_if<Circle>(&obstacle)) {
        return distance_to_segment(c->center, p, q) < c->radius - kGeomEps;
    }
    return polygon_segment_blocked(std::get<Polygon>(obstacle), p, q);
}

bool segment_blocked(const Scenario& scenario, Point2D p, Point2D q) {
    for (const auto& ob : scenario.obstacles) {
        if (point_in_obstacle(ob, p) || point_in_obstacle(ob, q)) throw Error("endpoint not in free space");
    }
    for (const auto& ob : scenario.obstacles) {
        if (segment_blocked(ob, p, q)) return true;
    }
    return false;
}

std::pair<Point2D, Point2D> bounding_box(const Obstacle& obstacle) {
    if (const auto* c = std::get_if<Circle>(&obstacle)) {
        return {{c->center.x - c->radius, c->center.y - c->radius},
                {c->center.x + c->radius, c->center.y + c->radius}};
    }
    const auto& v = std::get<Polygon>(obstacle).vertices;
    Point2D lo = v.front();
    Point2D hi = v.front();
    for (Point2D p : v) {
        lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
        hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
    }
    return {lo, hi};
}

CornerKind classify_corner(const Polygon& poly, std::size_t index) {
    const auto& v = poly.vertices;
    const std::size_t n = v.size();
    const Point2D prev = v[(index + n - 1) % n];
    const Point2D cur = v[index];
    const Point2D next = v[(index + 1) % n];
    const double turn = cross(cur - prev, next - cur);
    const double orient = signed_area(poly) > 0.0 ? 1.0 : -1.0;
    const double scale = distance(prev, cur) * distance(cur, next);
    if (std::abs(turn) <= 1e-12 * scale) return CornerKind::Straight;
    return turn * orient > 0.0 ? CornerKind::Convex : CornerKind::Concave;
}

std::vector<Point2D> free_convex_corners(const Scenario& scenario) {
    std::vector<Point2D> out;
    for (const auto& ob : scenario.obstacles) {
        const auto* poly = std::get_if<Polygon>(&ob);
        if (!poly) continue;
        for (std::size_t i = 0; i < poly->vertices.size(); ++i) {
            if (classify_corner(*poly, i) == CornerKind::Convex && !on_area_boundary(scenario, poly->vertices[i])) {
                out.push_back(poly->vertices[i]);
            }
        }
    }
    return out;
}

int circle_ideal_pairs(double radius, double range) {
    const double seg = 2.0 * std::numbers::pi * radius / range;
    const double rounded = std::round(seg);
    const bool integral = std::abs(seg - rounded) <= 1e-9;
    if (seg < 2.0) return 0;
    if (seg < 3.0) return 1;
    if (integral) return 0;  // closed loop of pairs cancels out
    return 2;
}

IdealStats ideal_partition_stats(const Scenario& scenario, double range) {
    if (!(range > 0.0)) throw Error("radio range must be positive");
    IdealStats stats;
    const int corners = static_cast<int>(free_convex_corners(scenario).size());
    std::vector<double> radii;
    for (const auto& ob : scenario.obstacles) {
        if (const auto* c = std::get_if<Circle>(&ob)) radii.push_back(c->radius);
    }
    stats.convex_corners = radii.empty() ? std::optional<int>(corners) : std::nullopt;
    stats.ideal_seg_nodes = 2.0 * corners;
    for (double r : radii) stats.ideal_seg_nodes += 2.0 * std::numbers::pi * r / range;

    const auto& table = canonical_ideals();
    if (auto it = table.find(normalize_id(scenario.name)); it != table.end()) {
        stats.ideal_pairs = it->second.pairs;
        stats.ideal_subnets = it->second.subnets;
        return stats;
    }
    // Generic layouts: one pair per corner; each circle contributes 0, 1 or 2.
    std::set<int> pairs{corners};
    for (std::size_t i = 0; i < radii.size(); ++i) {
        std::set<int> next;
        for (int p : pairs) {
            for (int extra : {0, 1, 2}) next.insert(p + extra);
        }
        pairs = std::move(next);
    }
    stats.ideal_pairs = pairs;
    for (int p : pairs) stats.ideal_subnets.insert(p + 1);
    return stats;
}

const std::vector<std::string>& canonical_scenario_names() {
    static const std::vector<std::string> names{
        "c_shape",  "s_shape",  "h_shape", "rectangular", "circular", "asymmetric_multi_rectangular",
        "maze",     "smiling_face"};
    return names;
}

Scenario circle_scenario(double diameter) {
    if (!(diameter > 0.0) || diameter >= 100.0) throw Error("circle diameter must be in (0, 100)");
    std::ostringstream name;
    name << "circle_d" << diameter;
    return Scenario{name.str(), 100.0, 100.0, {Circle{{50.0, 50.0}, 0.5 * diameter}}};
}

Scenario build_scenario(std::string_view id) {
    std::string key = normalize_id(id);
    if (key == "maze_like") key = "maze";
    if (key == "smiling") key = "smiling_face";
    if (key == "asymmetric") key = "asymmetric_multi_rectangular";

    Scenario s;
    s.name = key;
    if (key == "none") {
        // obstacle-free
    } else if (key == "c_shape") {
        // Slab from the right wall; the free space wraps around it like a C.
        s.obstacles = {rect(35, 35, 100, 65)};
    } else if (key == "s_shape") {
        s.obstacles = {rect(0, 23, 75, 39), rect(25, 61, 100, 77)};
    } else if (key == "h_shape") {
        s.obstacles = {rect(35, 0, 65, 40), rect(35, 60, 65, 100)};
    } else if (key == "rectangular") {
        s.obstacles = {rect(30, 35, 70, 65)};
    } else if (key == "circular") {
        s.obstacles = {Circle{{50, 50}, 30}};
    } else if (key == "asymmetric_multi_rectangular") {
        s.obstacles = {rect(0, 60, 30, 78), rect(55, 72, 73, 100), rect(70, 30, 100, 46), rect(22, 0, 40, 25)};
    } else if (key == "maze") {
        s.obstacles = {rect(0, 13, 75, 29), rect(25, 42, 100, 58), rect(0, 71, 75, 87)};
    } else if (key == "smiling_face") {
        s.obstacles = {Circle{{32, 68}, 10}, Circle{{68, 68}, 10}, rect(30, 25, 70, 41)};
    } else {
        throw Error("unknown scenario: " + std::string(id));
    }
    return s;
}

Scenario parse_scenario(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("malformed scenario file: ") + e.what());
    }
    try {
        Scenario s;
        s.name = doc.at("name").get<std::string>();
        s.width = doc.at("width").get<double>();
        s.height = doc.at("height").get<double>();
        for (const auto& ob : doc.at("obstacles")) {
            const auto kind = ob.at("kind").get<std::string>();
            if (kind == "polygon") {
                Polygon poly;
                for (const auto& v : ob.at("vertices")) poly.vertices.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
                s.obstacles.emplace_back(std::move(poly));
            } else if (kind == "circle") {
                const auto& c = ob.at("center");
                s.obstacles.emplace_back(Circle{{c.at(0).get<double>(), c.at(1).get<double>()}, ob.at("radius").get<double>()});
            } else {
                throw Error("unknown obstacle kind: " + kind);
            }
        }
        validate_scenario(s);
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("malformed scenario file: ") + e.what());
    }
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open scenario file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

std::string scenario_to_json(const Scenario& scenario) {
    nlohmann::ordered_json doc;
    doc["name"] = scenario.name;
    doc["width"] = scenario.width;
    doc["height"] = scenario.height;
    doc["obstacles"] = nlohmann::ordered_json::array();
    for (const auto& ob : scenario.obstacles) {
        nlohmann::ordered_json o;
        if (const auto* c = std::get_if<Circle>(&ob)) {
            o["kind"] = "circle";
            o["center"] = {c->center.x, c->center.y};
            o["radius"] = c->radius;
        } else {
            o["kind"] = "polygon";
            o["vertices"] = nlohmann::ordered_json::array();
            for (Point2D v : std::get<Polygon>(ob).vertices) o["vertices"].push_back({v.x, v.y});
        }
        doc["obstacles"].push_back(std::move(o));
    }
    return doc.dump(2) + "\n";
}

Scenario resolve_scenario(const std::string& name_or_path) {
    try {
        return build_scenario(name_or_path);
    } catch (const Error&) {
        return load_scenario(name_or_path);
    }
}

double triangle_margin(double d_ox, double d_oy, double d_xy) {
    return std::min({d_ox + d_xy - d_oy, d_ox + d_oy - d_xy, d_oy + d_xy - d_ox});
}

double best_triple_margin(std::span<const Point2D> pts) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pts.size(); ++i) {
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            for (std::size_t k = j + 1; k < pts.size(); ++k) {
                best = std::max(best, triangle_margin(distance(pts[i], pts[j]), distance(pts[i], pts[k]),
                                                      distance(pts[j], pts[k])));
            }
        }
    }
    return best;
}

}  // namespace wsnloc
