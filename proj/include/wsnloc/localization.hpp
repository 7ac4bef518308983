#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wsnloc/deployment.hpp"
#include "wsnloc/partitioning.hpp"

namespace wsnloc {

// Circle tangency tolerance, relative to the radio range.
inline constexpr double kTangencyTol = 1e-9;
// Accepted trilateration residual, relative to the radio range.
inline constexpr double kResidualTol = 1e-6;

struct ReferenceTriple {
    NodeId o = 0;  // origin
    NodeId x = 0;  // on the positive x-axis
    NodeId y = 0;  // fixes the y orientation
    double d_ox = 0.0;
    double d_oy = 0.0;
    double d_xy = 0.0;
    std::uint32_t objective = 0;  // max over the subnet of the hop sum to o, x, y
};

// Mutually one-hop, non-collinear triple minimising the largest hop sum to
// any subnet node. Ties go to the lexicographically smallest (o, x, y).
// Throws Error("no reference triple").
ReferenceTriple select_references(const Network& network, std::span<const NodeId> subnet);

// Linearised least-squares multilateration. Throws
// Error("inconsistent trilateration") for collinear knowns or a residual
// above kResidualTol * range.
Point2D trilaterate(std::span<const Point2D> knowns, std::span<const double> dists, double range);

struct LeastSquaresFix {
    Point2D position;
    double residual = 0.0;    // RMS of |p - k_u| - d_u
    bool well_posed = false;  // knowns span the plane
};
// Same solve without the acceptance checks.
LeastSquaresFix least_squares_fix(std::span<const Point2D> knowns, std::span<const double> dists, double range);

// Both intersections of two circles; equal when they are tangent. Throws
// Error("no intersection") when the circles miss each other beyond tolerance.
std::pair<Point2D, Point2D> circle_intersections(Point2D k1, double d1, Point2D k2, double d2, double range);

// Tangent circles give the touch point; otherwise the intersection farther
// from `third`.
Point2D two_circle_locate(Point2D k1, Point2D k2, double d1, double d2, Point2D third, double range);

struct ArcEstimate {
    Point2D position;
    double start = 0.0;  // surviving arc [start, end], radians, end >= start
    double end = 0.0;
    bool low_confidence = false;  // no arc survived every exclusion
};

// Midpoint of the largest arc of circle (k, d) lying farther than `range`
// from every excluder. With no exclusions the estimate is k + (d, 0).
// Throws Error when d <= 0.
ArcEstimate arc_midpoint_locate(Point2D k, double d, std::span<const Point2D> excluders, double range);

enum class CaseTag : std::uint8_t { Reference, Trilateration, TwoCircle, Arc, Unresolved };
const char* to_string(CaseTag tag);

struct RelativeFrame {
    AreaId subnet = 0;
    ReferenceTriple refs;
    std::vector<NodeId> members;               // ascending
    std::vector<std::optional<Point2D>> coords;  // aligned with members
    std::vector<CaseTag> tags;                   // aligned with members
    std::vector<char> clean;                     // placed from exact cases only, free of conflicts
    std::vector<NodeId> known_order;             // order nodes joined the known set
    std::size_t low_confidence = 0;              // degraded placements (noisy or inconsistent data)
    std::size_t growth_runs = 1;                 // passes spent revisiting Case-2 mirror choices

    std::optional<std::size_t> index_of(NodeId id) const;
};

// Grows the known set from the reference triple: Case 1 (three or more known
// neighbours) first, then Case 2 (two), and Case 3 (one) only when neither
// makes progress. Nodes that never reach a known neighbour stay unresolved.
// With exact ranging, a Case-1 fix from clean knowns that leaves a residual
// sends the search back to flip the latest Case-2 mirror choice it depends on.
RelativeFrame localize_subnetwork(const Network& network, std::span<const NodeId> subnet, const ReferenceTriple& refs,
                                  AreaId subnet_id = 0);

struct FrameTransform {
    double r1 = 1.0, r2 = 0.0, r3 = 0.0, r4 = 1.0;
    double dx = 0.0, dy = 0.0;

    Point2D apply(Point2D p) const { return {r1 * p.x + r2 * p.y + dx, r3 * p.x + r4 * p.y + dy}; }
    double det() const { return r1 * r4 - r2 * r3; }
};

// Least-squares affine map taking `rel` onto `glob`. Throws
// Error("uncalibratable subnet") for fewer than 3 points, a collinear set, or
// a singular linear block.
FrameTransform fit_transform(std::span<const Point2D> rel, std::span<const Point2D> glob, double range);

struct Calibration {
    FrameTransform transform;
    bool anchor_deficient = false;  // Case-3 anchors had to be used
    std::size_t anchors_used = 0;
};

// Clean anchors (placed through reference/Case 1/Case 2 only) are preferred;
// the rest are added only when the former are fewer than 3 or collinear.
Calibration calibrate(const RelativeFrame& frame, std::span<const std::pair<NodeId, Point2D>> anchors, double range);

struct SubnetOutcome {
    AreaId subnet = 0;
    std::optional<RelativeFrame> frame;
    std::optional<Calibration> calibration;
    std::vector<std::string> flags;
    std::size_t branch_frames = 0;  // extra frames for nodes the main frame reached only inexactly
};

struct LocalizationResult {
    std::vector<SubnetOutcome> subnets;
    std::vector<AreaId> subnet_of;                         // per node
    std::vector<CaseTag> tag;                              // per node
    std::vector<std::optional<Point2D>> relative;          // per node
    std::vector<std::optional<Point2D>> global_estimate;   // per node; nullopt = unlocalized
};

// Localizes every area of the partition independently and calibrates each
// frame with the anchors it contains.
LocalizationResult localize_network(const Network& network, const PartitionMap& partition);

// node_id,subnet,case_tag,x_rel,y_rel,x_glob,y_glob,true_x,true_y,error_m
void write_localization_csv(std::ostream& out, const LocalizationResult& result, const Network& network);

}  // namespace wsnloc
