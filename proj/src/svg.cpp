#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <variant>

#include "wsnloc/error.hpp"
#include "wsnloc/harness.hpp"

namespace wsnloc {

namespace {

constexpr double kScale = 6.0;
constexpr double kMargin = 10.0;

const char* const kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
                                "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#393b79", "#637939"};

struct Canvas {
    double height;
    double px(double x) const { return kMargin + x * kScale; }
    double py(double y) const { return kMargin + (height - y) * kScale; }
};

std::string fmt(const char* pattern, auto... args) {
    char buf[256];
    std::snprintf(buf, sizeof buf, pattern, args...);
    return buf;
}

// Blue (low) to red (high).
std::string ramp(double t) {
    t = std::clamp(t, 0.0, 1.0);
    const int r = static_cast<int>(255.0 * t);
    const int b = static_cast<int>(255.0 * (1.0 - t));
    const int g = static_cast<int>(80.0 * (1.0 - std::abs(2.0 * t - 1.0)));
    return fmt("#%02x%02x%02x", r, g, b);
}

}  // namespace

std::optional<SvgLayer> parse_svg_layer(const std::string& name) {
    if (name == "partition") return SvgLayer::Partition;
    if (name == "occurrence") return SvgLayer::Occurrence;
    if (name == "errors") return SvgLayer::Errors;
    return std::nullopt;
}

std::string render_svg(const TrialArtifacts& trial, SvgLayer layer, bool edges) {
    const Network& net = trial.network;
    const Scenario& sc = net.scenario;
    const Canvas cv{sc.height};
    std::ostringstream out;
    out << fmt("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\">\n",
               2 * kMargin + sc.width * kScale, 2 * kMargin + sc.height * kScale);
    out << fmt("<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" fill=\"white\" stroke=\"black\"/>\n",
               kMargin, kMargin, sc.width * kScale, sc.height * kScale);

    for (const Obstacle& ob : sc.obstacles) {
        if (const auto* poly = std::get_if<Polygon>(&ob)) {
            out << "<polygon fill=\"#bbbbbb\" stroke=\"#555555\" points=\"";
            for (Point2D v : poly->vertices) out << fmt("%.2f,%.2f ", cv.px(v.x), cv.py(v.y));
            out << "\"/>\n";
        } else {
            const auto& c = std::get<Circle>(ob);
            out << fmt("<circle cx=\"%.2f\" cy=\"%.2f\" r=\"%.2f\" fill=\"#bbbbbb\" stroke=\"#555555\"/>\n",
                       cv.px(c.center.x), cv.py(c.center.y), c.radius * kScale);
        }
    }

    if (edges) {
        out << "<g stroke=\"#dddddd\" stroke-width=\"0.5\">\n";
        for (NodeId i = 0; i < net.size(); ++i) {
            for (NodeId j : net.adjacency.neighbors(i)) {
                if (j <= i) continue;
                const Point2D a = net.nodes[i].position;
                const Point2D b = net.nodes[j].position;
                out << fmt("<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\"/>\n", cv.px(a.x), cv.py(a.y),
                           cv.px(b.x), cv.py(b.y));
            }
        }
        out << "</g>\n";
    }

    std::uint32_t ts_lo = 0;
    std::uint32_t ts_hi = 1;
    if (!trial.ts.empty()) {
        const auto [lo, hi] = std::minmax_element(trial.ts.begin(), trial.ts.end());
        ts_lo = *lo;
        ts_hi = std::max(*hi, *lo + 1);
    }

    if (layer == SvgLayer::Errors) {
        out << "<g stroke=\"#d62728\" stroke-width=\"1\">\n";
        for (std::size_t i = 0; i < net.size(); ++i) {
            const auto& est = trial.localization.global_estimate.size() > i ? trial.localization.global_estimate[i]
                                                                          : std::nullopt;
            if (!est) continue;
            const Point2D t = net.nodes[i].position;
            out << fmt("<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\"/>\n", cv.px(est->x), cv.py(est->y),
                       cv.px(t.x), cv.py(t.y));
        }
        out << "</g>\n";
    }

    for (std::size_t i = 0; i < net.size(); ++i) {
        const Node& node = net.nodes[i];
        std::string fill = "#333333";
        if (layer == SvgLayer::Partition && i < trial.partition.label.size()) {
            fill = kPalette[trial.partition.label[i] % std::size(kPalette)];
        } else if (layer == SvgLayer::Occurrence && i < trial.ts.size()) {
            fill = ramp(static_cast<double>(trial.ts[i] - ts_lo) / static_cast<double>(ts_hi - ts_lo));
        } else if (layer == SvgLayer::Errors) {
            const bool located = i < trial.localization.global_estimate.size() && trial.localization.global_estimate[i];
            fill = located ? "#2ca02c" : "#d62728";
        }
        const double x = cv.px(node.position.x);
        const double y = cv.py(node.position.y);
        if (node.is_anchor) {
            out << fmt("<rect x=\"%.2f\" y=\"%.2f\" width=\"8\" height=\"8\" fill=\"%s\" stroke=\"black\"/>\n", x - 4,
                       y - 4, fill.c_str());
        } else {
            out << fmt("<circle cx=\"%.2f\" cy=\"%.2f\" r=\"3\" fill=\"%s\"/>\n", x, y, fill.c_str());
        }
    }
    out << "</svg>\n";
    return out.str();
}

void write_svg(const TrialArtifacts& trial, SvgLayer layer, const std::string& path, bool edges) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << render_svg(trial, layer, edges);
    if (!out) throw Error("write failed: " + path);
}

}  // namespace wsnloc
