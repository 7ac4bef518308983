#include "wsnloc/localization.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <iterator>
#include <numbers>
#include <ostream>

#include "wsnloc/error.hpp"
#include "wsnloc/kernels.hpp"
#include "wsnloc/pathgraph.hpp"

namespace wsnloc {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_angle(double a) {
    a = std::fmod(a, kTwoPi);
    return a < 0.0 ? a + kTwoPi : a;
}

}  // namespace

ReferenceTriple select_references(const Network& network, std::span<const NodeId> subnet) {
    const std::size_t m = subnet.size();
    if (m < 3) throw Error("no reference triple");
    const Adjacency& adj = network.adjacency;
    const HopMatrix hops = induced_hop_matrix(adj, subnet);
    const double slack = kCollinearSlack * network.range;

    std::vector<int> local(network.size(), -1);
    for (std::size_t i = 0; i < m; ++i) local[subnet[i]] = static_cast<int>(i);
    // Sorted local neighbour lists, so (a, b, c) is enumerated lexicographically
    // in local order; local order follows node ids when subnet is ascending.
    std::vector<std::vector<std::size_t>> nbr(m);
    for (std::size_t i = 0; i < m; ++i) {
        for (NodeId w : adj.neighbors(subnet[i])) {
            if (local[w] > static_cast<int>(i)) nbr[i].push_back(static_cast<std::size_t>(local[w]));
        }
        std::sort(nbr[i].begin(), nbr[i].end());
    }

    std::optional<ReferenceTriple> best;
    std::array<NodeId, 3> best_ids{};
    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t bi = 0; bi < nbr[a].size(); ++bi) {
            const std::size_t b = nbr[a][bi];
            const double d_ab = measure_distance(network, subnet[a], subnet[b]);
            for (std::size_t ci = bi + 1; ci < nbr[a].size(); ++ci) {
                const std::size_t c = nbr[a][ci];
                if (!adj.adjacent(subnet[b], subnet[c])) continue;
                const auto objective =
                    kernels::max_hop_sum3(hops.row(a).data(), hops.row(b).data(), hops.row(c).data(), m);
                std::array<NodeId, 3> ids{subnet[a], subnet[b], subnet[c]};
                std::sort(ids.begin(), ids.end());
                if (best && (objective > best->objective || (objective == best->objective && ids >= best_ids))) continue;
                const double d_ac = measure_distance(network, subnet[a], subnet[c]);
                const double d_bc = measure_distance(network, subnet[b], subnet[c]);
                if (triangle_margin(d_ab, d_ac, d_bc) < slack) continue;
                ReferenceTriple t;
                t.o = ids[0];
                t.x = ids[1];
                t.y = ids[2];
                t.d_ox = measure_distance(network, t.o, t.x);
                t.d_oy = measure_distance(network, t.o, t.y);
                t.d_xy = measure_distance(network, t.x, t.y);
                t.objective = objective;
                best = t;
                best_ids = ids;
            }
        }
    }
    if (!best) throw Error("no reference triple");
    return *best;
}

LeastSquaresFix least_squares_fix(std::span<const Point2D> knowns, std::span<const double> dists, double range) {
    if (knowns.size() != dists.size() || knowns.size() < 3) throw Error("inconsistent trilateration");
    (void)range;
    const std::size_t m = knowns.size();
    // Work relative to the first known for conditioning.
    const Point2D origin = knowns[0];
    Eigen::MatrixXd a(m - 1, 2);
    Eigen::VectorXd rhs(m - 1);
    for (std::size_t u = 1; u < m; ++u) {
        const Point2D k = knowns[u] - origin;
        a(u - 1, 0) = 2.0 * k.x;
        a(u - 1, 1) = 2.0 * k.y;
        rhs(u - 1) = dot(k, k) - dists[u] * dists[u] + dists[0] * dists[0];
    }
    LeastSquaresFix fix;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
    const auto& sv = svd.singularValues();
    fix.well_posed = sv.size() == 2 && sv(0) > 0.0 && sv(1) > 1e-9 * sv(0);
    const Eigen::Vector2d p = a.colPivHouseholderQr().solve(rhs);
    fix.position = Point2D{p(0), p(1)} + origin;
    double acc = 0.0;
    for (std::size_t u = 0; u < m; ++u) {
        const double r = distance(fix.position, knowns[u]) - dists[u];
        acc += r * r;
    }
    fix.residual = std::sqrt(acc / static_cast<double>(m));
    return fix;
}

Point2D trilaterate(std::span<const Point2D> knowns, std::span<const double> dists, double range) {
    const LeastSquaresFix fix = least_squares_fix(knowns, dists, range);
    if (!fix.well_posed || fix.residual > kResidualTol * range) throw Error("inconsistent trilateration");
    return fix.position;
}

std::pair<Point2D, Point2D> circle_intersections(Point2D k1, double d1, Point2D k2, double d2, double range) {
    const double tol = kTangencyTol * range;
    const Point2D v = k2 - k1;
    const double dist = norm(v);
    if (dist <= tol) throw Error("no intersection");
    const Point2D u = (1.0 / dist) * v;
    const double along = (d1 * d1 - d2 * d2 + dist * dist) / (2.0 * dist);
    const bool tangent = std::abs(dist - (d1 + d2)) <= tol || std::abs(dist - std::abs(d1 - d2)) <= tol;
    if (tangent) {
        const Point2D touch = k1 + along * u;
        return {touch, touch};
    }
    if (dist > d1 + d2 || dist < std::abs(d1 - d2)) throw Error("no intersection");
    const double h = std::sqrt(std::max(0.0, d1 * d1 - along * along));
    const Point2D base = k1 + along * u;
    const Point2D perp{-u.y, u.x};
    return {base + h * perp, base - h * perp};
}

Point2D two_circle_locate(Point2D k1, Point2D k2, double d1, double d2, Point2D third, double range) {
    const auto [p, q] = circle_intersections(k1, d1, k2, d2, range);
    return distance(p, third) >= distance(q, third) ? p : q;
}

ArcEstimate arc_midpoint_locate(Point2D k, double d, std::span<const Point2D> excluders, double range) {
    if (!(d > 0.0)) throw Error("arc radius must be positive");

    struct Interval {
        double lo;  // wrapped start
        double len;
    };
    std::vector<Interval> cover;
    for (Point2D e : excluders) {
        const double dist = distance(k, e);
        if (dist == 0.0) {
            if (d <= range) cover.push_back({0.0, kTwoPi});
            continue;
        }
        const double c = (d * d + dist * dist - range * range) / (2.0 * d * dist);
        if (c > 1.0) continue;
        if (c <= -1.0) {
            cover.push_back({0.0, kTwoPi});
            continue;
        }
        const double phi = std::atan2(e.y - k.y, e.x - k.x);
        const double half = std::acos(c);
        cover.push_back({wrap_angle(phi - half), 2.0 * half});
    }

    ArcEstimate est;
    if (cover.empty()) {
        est.position = {k.x + d, k.y};
        est.start = -std::numbers::pi;
        est.end = std::numbers::pi;
        return est;
    }

    std::vector<double> cuts;
    for (const auto& iv : cover) {
        if (iv.len >= kTwoPi) continue;
        cuts.push_back(iv.lo);
        cuts.push_back(wrap_angle(iv.lo + iv.len));
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    auto covered = [&](double theta) {
        int count = 0;
        for (const auto& iv : cover) {
            if (iv.len >= kTwoPi || wrap_angle(theta - iv.lo) < iv.len) ++count;
        }
        return count;
    };

    // Elementary arcs between consecutive cuts, with their coverage.
    struct Piece {
        double start;
        double len;
        int count;
    };
    std::vector<Piece> pieces;
    if (cuts.empty()) {
        pieces.push_back({0.0, kTwoPi, covered(0.0)});
    } else {
        for (std::size_t i = 0; i < cuts.size(); ++i) {
            const double start = cuts[i];
            const double stop = i + 1 < cuts.size() ? cuts[i + 1] : cuts[0] + kTwoPi;
            const double len = stop - start;
            if (len <= 0.0) continue;
            pieces.push_back({start, len, covered(start + 0.5 * len)});
        }
    }

    const int least = std::min_element(pieces.begin(), pieces.end(), [](const Piece& a, const Piece& b) {
                          return a.count < b.count;
                      })->count;
    est.low_confidence = least > 0;

    // Merge circularly adjacent pieces at the least coverage into runs.
    std::vector<std::pair<double, double>> runs;  // start, length
    const std::size_t np = pieces.size();
    std::size_t first = 0;
    while (first < np && pieces[first].count == least) ++first;
    if (first == np) {
        runs.emplace_back(0.0, kTwoPi);
    } else {
        for (std::size_t step = 1; step <= np; ++step) {
            const Piece& p = pieces[(first + step) % np];
            if (p.count != least) continue;
            if (!runs.empty()) {
                const Piece& prev = pieces[(first + step - 1) % np];
                if (prev.count == least) {
                    runs.back().second += p.len;
                    continue;
                }
            }
            runs.emplace_back(p.start, p.len);
        }
    }

    double best_len = -1.0;
    double best_mid = 0.0;
    double best_start = 0.0;
    for (auto [start, len] : runs) {
        const double mid = len >= kTwoPi ? 0.0 : wrap_angle(start + 0.5 * len);
        const bool longer = len > best_len + 1e-12;
        const bool tie = std::abs(len - best_len) <= 1e-12;
        if (longer || (tie && mid < best_mid)) {
            best_len = len;
            best_mid = mid;
            best_start = start;
        }
    }
    est.start = best_len >= kTwoPi ? best_mid - std::numbers::pi : best_start;
    est.end = est.start + best_len;
    est.position = {k.x + d * std::cos(best_mid), k.y + d * std::sin(best_mid)};
    return est;
}

const char* to_string(CaseTag tag) {
    switch (tag) {
        case CaseTag::Reference: return "reference";
        case CaseTag::Trilateration: return "1";
        case CaseTag::TwoCircle: return "2";
        case CaseTag::Arc: return "3";
        case CaseTag::Unresolved: return "unresolved";
    }
    return "?";
}

std::optional<std::size_t> RelativeFrame::index_of(NodeId id) const {
    auto it = std::lower_bound(members.begin(), members.end(), id);
    if (it == members.end() || *it != id) return std::nullopt;
    return static_cast<std::size_t>(it - members.begin());
}

namespace {

// One pass of known-set growth. Case-2 mirror choices are decision points:
// `forced` fixes the first choices (0 = preferred candidate, 1 = the other),
// later ones take the preferred candidate.
struct GrowthRun {
    RelativeFrame frame;
    std::vector<std::uint8_t> choices;  // one per Case-2 decision, in order
    std::size_t conflicts = 0;          // exact-only fixes with a large residual
    // Decisions the first conflict depends on, ascending; empty when none.
    std::vector<std::size_t> conflict_cause;
};

class Grower {
public:
    Grower(const Network& network, const std::vector<NodeId>& members, const ReferenceTriple& refs)
        : net_(network), members_(members), refs_(refs), range_(network.range), m_(members.size()) {
        std::vector<int> local(network.size(), -1);
        for (std::size_t i = 0; i < m_; ++i) local[members_[i]] = static_cast<int>(i);
        nbr_.resize(m_);
        for (std::size_t i = 0; i < m_; ++i) {
            for (NodeId w : network.adjacency.neighbors(members_[i])) {
                if (local[w] >= 0) nbr_[i].push_back(static_cast<std::size_t>(local[w]));
            }
        }
        lo_ = local.at(refs.o);
        lx_ = local.at(refs.x);
        ly_ = local.at(refs.y);
        if (lo_ < 0 || lx_ < 0 || ly_ < 0) throw Error("reference triple outside the subnet");
    }

    GrowthRun run(const std::vector<std::uint8_t>& forced);

private:
    const Network& net_;
    const std::vector<NodeId>& members_;
    const ReferenceTriple& refs_;
    double range_;
    std::size_t m_;
    std::vector<std::vector<std::size_t>> nbr_;
    int lo_, lx_, ly_;
};

using DecisionSet = std::vector<std::size_t>;  // sorted, unique

DecisionSet merge(const DecisionSet& a, const DecisionSet& b) {
    DecisionSet out;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

GrowthRun Grower::run(const std::vector<std::uint8_t>& forced) {
    GrowthRun out;
    RelativeFrame& frame = out.frame;
    frame.refs = refs_;
    frame.members = members_;
    frame.coords.assign(m_, std::nullopt);
    frame.tags.assign(m_, CaseTag::Unresolved);
    frame.clean.assign(m_, 0);

    std::vector<DecisionSet> depends(m_);
    std::vector<int> known_nbrs(m_, 0);
    std::vector<std::size_t> known;
    auto place = [&](std::size_t i, Point2D p, CaseTag tag, bool clean, DecisionSet deps) {
        frame.coords[i] = p;
        frame.tags[i] = tag;
        frame.clean[i] = clean;
        depends[i] = std::move(deps);
        frame.known_order.push_back(members_[i]);
        known.push_back(i);
        for (std::size_t w : nbr_[i]) ++known_nbrs[w];
    };
    auto dist = [&](std::size_t i, std::size_t j) { return measure_distance(net_, members_[i], members_[j]); };
    auto resolved = [&](std::size_t i) { return frame.coords[i].has_value(); };
    auto known_neighbours = [&](std::size_t i) {
        std::vector<std::size_t> all;
        for (std::size_t w : nbr_[i]) {
            if (resolved(w)) all.push_back(w);
        }
        return all;
    };
    auto silent_knowns = [&](std::size_t i) {
        std::vector<char> hears(m_, 0);
        for (std::size_t w : nbr_[i]) hears[w] = 1;
        std::vector<Point2D> pts;
        for (std::size_t k : known) {
            if (!hears[k]) pts.push_back(*frame.coords[k]);
        }
        return pts;
    };

    const double y_x = (refs_.d_oy * refs_.d_oy - refs_.d_xy * refs_.d_xy + refs_.d_ox * refs_.d_ox) / (2.0 * refs_.d_ox);
    const double y_y = std::sqrt(std::max(0.0, refs_.d_oy * refs_.d_oy - y_x * y_x));
    place(static_cast<std::size_t>(lo_), {0.0, 0.0}, CaseTag::Reference, true, {});
    place(static_cast<std::size_t>(lx_), {refs_.d_ox, 0.0}, CaseTag::Reference, true, {});
    place(static_cast<std::size_t>(ly_), {y_x, y_y}, CaseTag::Reference, true, {});

    const double slack = kCollinearSlack * range_;
    const double hear_limit = range_ * (1.0 - 1e-9);
    std::vector<int> collinear_at(m_, -1);

    while (true) {
        // Case 1: three or more known neighbours, exact-lineage ones preferred.
        // Best-supported nodes go first so errors do not compound along thin
        // chains: most clean known neighbours, then most known neighbours.
        std::vector<std::pair<std::pair<int, int>, std::size_t>> queue;
        for (std::size_t i = 0; i < m_; ++i) {
            if (resolved(i) || known_nbrs[i] < 3 || collinear_at[i] == known_nbrs[i]) continue;
            int clean_count = 0;
            for (std::size_t w : nbr_[i]) clean_count += resolved(w) && frame.clean[w];
            queue.push_back({{-clean_count, -known_nbrs[i]}, i});
        }
        std::sort(queue.begin(), queue.end());
        bool progress = false;
        for (std::size_t q = 0; q < queue.size() && !progress; ++q) {
            const std::size_t i = queue[q].second;
            const auto ks = known_neighbours(i);
            std::vector<std::size_t> clean_ks;
            for (std::size_t k : ks) {
                if (frame.clean[k]) clean_ks.push_back(k);
            }
            auto gather = [&](const std::vector<std::size_t>& set, std::vector<Point2D>& pts, std::vector<double>& ds) {
                pts.clear();
                ds.clear();
                for (std::size_t k : set) {
                    pts.push_back(*frame.coords[k]);
                    ds.push_back(dist(i, k));
                }
            };
            std::vector<Point2D> pts;
            std::vector<double> ds;
            bool clean = false;
            gather(clean_ks, pts, ds);
            if (clean_ks.size() >= 3 && best_triple_margin(pts) >= slack) {
                clean = true;
            } else {
                gather(ks, pts, ds);
                if (best_triple_margin(pts) < slack) {
                    collinear_at[i] = known_nbrs[i];
                    continue;
                }
            }
            const auto& used = clean ? clean_ks : ks;
            DecisionSet deps;
            for (std::size_t k : used) deps = merge(deps, depends[k]);
            const LeastSquaresFix fix = least_squares_fix(pts, ds, range_);
            if (fix.residual > kResidualTol * range_) {
                ++frame.low_confidence;
                if (clean) {
                    if (out.conflicts == 0) out.conflict_cause = deps;
                    ++out.conflicts;
                }
                clean = false;
            }
            place(i, fix.position, CaseTag::Trilateration, clean, std::move(deps));
            progress = true;
        }
        if (progress) continue;

        // Case 2: two usable known neighbours. Candidates whose mirror image is
        // ruled out by a silent known go first.
        struct Choice {
            std::size_t node;
            Point2D preferred, other;
            bool decisive, tangent, clean;
            DecisionSet deps;
        };
        std::optional<Choice> pick;
        for (std::size_t i = 0; i < m_; ++i) {
            if (resolved(i) || known_nbrs[i] < 2) continue;
            const auto ks = known_neighbours(i);
            std::vector<std::size_t> pool;
            for (std::size_t k : ks) {
                if (frame.clean[k]) pool.push_back(k);
            }
            if (pool.size() < 2) pool = ks;
            std::size_t ka = pool[0];
            std::size_t kb = pool[1];
            double spread = -1.0;
            for (std::size_t u = 0; u < pool.size(); ++u) {
                for (std::size_t v = u + 1; v < pool.size(); ++v) {
                    const double s = distance(*frame.coords[pool[u]], *frame.coords[pool[v]]);
                    if (s > spread) {
                        spread = s;
                        ka = pool[u];
                        kb = pool[v];
                    }
                }
            }
            const Point2D p1 = *frame.coords[ka];
            const Point2D p2 = *frame.coords[kb];
            const double d1 = dist(i, ka);
            const double d2 = dist(i, kb);
            Choice c{i, {}, {}, false, false, frame.clean[ka] && frame.clean[kb], merge(depends[ka], depends[kb])};
            std::pair<Point2D, Point2D> cands;
            try {
                cands = circle_intersections(p1, d1, p2, d2, range_);
            } catch (const Error&) {
                // Only reachable with noisy or inconsistent ranges: closest approach.
                const double sep = distance(p1, p2);
                const Point2D u = (1.0 / sep) * (p2 - p1);
                const double along = std::clamp((d1 * d1 - d2 * d2 + sep * sep) / (2.0 * sep), -d1, d1);
                cands = {p1 + along * u, p1 + along * u};
                c.clean = false;
            }
            c.tangent = distance(cands.first, cands.second) <= kTangencyTol * range_;
            const auto silent = silent_knowns(i);
            c.preferred = cands.first;
            c.other = cands.second;
            if (c.tangent) {
                c.decisive = true;
            } else if (!silent.empty()) {
                std::size_t nearest = 0;
                double nearest_d = std::numeric_limits<double>::infinity();
                int v1 = 0;
                int v2 = 0;
                for (std::size_t s = 0; s < silent.size(); ++s) {
                    const double a = distance(cands.first, silent[s]);
                    const double b = distance(cands.second, silent[s]);
                    v1 += a < hear_limit;
                    v2 += b < hear_limit;
                    if (std::min(a, b) < nearest_d) {
                        nearest_d = std::min(a, b);
                        nearest = s;
                    }
                }
                c.decisive = v1 != v2;
                c.preferred = two_circle_locate(p1, p2, d1, d2, silent[nearest], range_);
                c.other = c.preferred == cands.first ? cands.second : cands.first;
            } else if (cross(p2 - p1, cands.first - p1) < 0.0) {
                // No evidence at all: prefer the candidate left of p1 -> p2.
                std::swap(c.preferred, c.other);
            }
            if (!pick || (c.decisive && !pick->decisive)) pick = std::move(c);
            if (pick->decisive) break;
        }
        if (pick) {
            Point2D position = pick->preferred;
            DecisionSet deps = std::move(pick->deps);
            if (!pick->tangent) {
                const std::size_t index = out.choices.size();
                const std::uint8_t choice = index < forced.size() ? forced[index] : 0;
                out.choices.push_back(choice);
                if (choice) position = pick->other;
                deps = merge(deps, {index});
                if (!pick->decisive) ++frame.low_confidence;
            }
            place(pick->node, position, CaseTag::TwoCircle, pick->clean, std::move(deps));
            continue;
        }

        // Case 3: a single known neighbour.
        for (std::size_t i = 0; i < m_ && !progress; ++i) {
            if (resolved(i) || known_nbrs[i] != 1) continue;
            const std::size_t k = known_neighbours(i).front();
            const double d = dist(i, k);
            Point2D position = *frame.coords[k];
            if (d > 0.0) position = arc_midpoint_locate(*frame.coords[k], d, silent_knowns(i), range_).position;
            place(i, position, CaseTag::Arc, false, depends[k]);
            progress = true;
        }
        if (!progress) break;
    }

    // Degraded placements made before enough exact neighbours existed are
    // solved again from those neighbours, until nothing changes.
    for (bool changed = true; changed;) {
        changed = false;
        for (std::size_t i = 0; i < m_; ++i) {
            if (!resolved(i) || frame.clean[i]) continue;
            std::vector<Point2D> pts;
            std::vector<double> ds;
            DecisionSet deps;
            for (std::size_t w : nbr_[i]) {
                if (!resolved(w) || !frame.clean[w]) continue;
                pts.push_back(*frame.coords[w]);
                ds.push_back(dist(i, w));
                deps = merge(deps, depends[w]);
            }
            if (pts.size() < 3 || best_triple_margin(pts) < slack) continue;
            const LeastSquaresFix fix = least_squares_fix(pts, ds, range_);
            if (fix.residual > kResidualTol * range_) continue;
            frame.coords[i] = fix.position;
            frame.tags[i] = CaseTag::Trilateration;
            frame.clean[i] = 1;
            depends[i] = std::move(deps);
            changed = true;
        }
    }

    // Clean anchors must agree on one rigid placement; a mirrored branch that
    // never met a Case-1 check shows up here.
    std::vector<Point2D> rel;
    std::vector<Point2D> glob;
    DecisionSet anchor_deps;
    for (std::size_t i = 0; i < m_; ++i) {
        const Node& node = net_.nodes[members_[i]];
        if (!node.is_anchor || !frame.clean[i]) continue;
        rel.push_back(*frame.coords[i]);
        glob.push_back(node.position);
        anchor_deps = merge(anchor_deps, depends[i]);
    }
    if (rel.size() >= 4 && best_triple_margin(rel) >= slack) {
        const FrameTransform t = fit_transform(rel, glob, range_);
        double worst = 0.0;
        for (std::size_t u = 0; u < rel.size(); ++u) worst = std::max(worst, distance(t.apply(rel[u]), glob[u]));
        if (worst > kResidualTol * range_) {
            if (out.conflicts == 0) out.conflict_cause = std::move(anchor_deps);
            ++out.conflicts;
        }
    }

    return out;
}

// Upper bound on growth passes spent searching Case-2 choices.
constexpr std::size_t kMaxGrowthRuns = 64;

}  // namespace

RelativeFrame localize_subnetwork(const Network& network, std::span<const NodeId> subnet, const ReferenceTriple& refs,
                                  AreaId subnet_id) {
    std::vector<NodeId> members(subnet.begin(), subnet.end());
    std::sort(members.begin(), members.end());
    Grower grower(network, members, refs);

    GrowthRun best = grower.run({});
    std::size_t runs = 1;
    // With exact ranges a large exact-only residual means an earlier mirror
    // choice was wrong: flip the latest untried choice it depends on.
    GrowthRun current = best;
    while (network.ranging.kind == RangingModel::Kind::Exact && current.conflicts > 0 && runs < kMaxGrowthRuns) {
        std::optional<std::size_t> flip;
        for (auto it = current.conflict_cause.rbegin(); it != current.conflict_cause.rend(); ++it) {
            if (current.choices[*it] == 0) {
                flip = *it;
                break;
            }
        }
        if (!flip) break;
        std::vector<std::uint8_t> forced(current.choices.begin(), current.choices.begin() + static_cast<long>(*flip));
        forced.push_back(1);
        current = grower.run(forced);
        ++runs;
        if (current.conflicts < best.conflicts) best = current;
    }
    best.frame.subnet = subnet_id;
    best.frame.growth_runs = runs;
    return std::move(best.frame);
}

FrameTransform fit_transform(std::span<const Point2D> rel, std::span<const Point2D> glob, double range) {
    if (rel.size() != glob.size() || rel.size() < 3) throw Error("uncalibratable subnet");
    if (best_triple_margin(rel) < kCollinearSlack * range) throw Error("uncalibratable subnet");
    const std::size_t m = rel.size();
    // Centre both sides for conditioning, then fold the offsets back in.
    Point2D cr{0, 0};
    Point2D cg{0, 0};
    for (std::size_t u = 0; u < m; ++u) {
        cr = cr + rel[u];
        cg = cg + glob[u];
    }
    cr = (1.0 / static_cast<double>(m)) * cr;
    cg = (1.0 / static_cast<double>(m)) * cg;
    Eigen::MatrixXd a(m, 3);
    Eigen::MatrixXd b(m, 2);
    for (std::size_t u = 0; u < m; ++u) {
        const Point2D r = rel[u] - cr;
        const Point2D g = glob[u] - cg;
        a.row(static_cast<Eigen::Index>(u)) << r.x, r.y, 1.0;
        b.row(static_cast<Eigen::Index>(u)) << g.x, g.y;
    }
    const Eigen::MatrixXd coef = a.colPivHouseholderQr().solve(b);
    FrameTransform t;
    t.r1 = coef(0, 0);
    t.r2 = coef(1, 0);
    t.r3 = coef(0, 1);
    t.r4 = coef(1, 1);
    const Point2D off{coef(2, 0), coef(2, 1)};
    // glob = R (rel - cr) + off + cg  =>  delta = off + cg - R cr
    t.dx = off.x + cg.x - (t.r1 * cr.x + t.r2 * cr.y);
    t.dy = off.y + cg.y - (t.r3 * cr.x + t.r4 * cr.y);
    if (!(std::abs(t.det()) > 1e-9)) throw Error("uncalibratable subnet");
    return t;
}

namespace {

// A range from a branch node to a node already placed in global coordinates.
struct LinkRange {
    Point2D rel;     // branch node, branch frame
    Point2D target;  // partner, global
    double range = 0.0;
};

struct RigidFit {
    FrameTransform transform;
    double rms = 0.0;
};

FrameTransform rigid(double theta, bool mirror, double tx, double ty) {
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    const double m = mirror ? -1.0 : 1.0;
    // Rotation applied after an optional flip of the y axis.
    return {c, -s * m, s, c * m, tx, ty};
}

// Rigid placements (rotation, optional reflection, translation) of a branch
// frame matching anchor positions and link ranges, from several starts.
std::vector<RigidFit> fit_rigid(std::span<const std::pair<Point2D, Point2D>> points, std::span<const LinkRange> links) {
    const std::size_t rows = 2 * points.size() + links.size();
    Point2D from{0, 0};
    Point2D to{0, 0};
    for (const auto& [rel, glob] : points) {
        from = from + rel;
        to = to + glob;
    }
    for (const auto& l : links) {
        from = from + l.rel;
        to = to + l.target;
    }
    const double count = static_cast<double>(points.size() + links.size());
    from = (1.0 / count) * from;
    to = (1.0 / count) * to;

    auto residuals = [&](const Eigen::Vector3d& x, bool mirror, Eigen::VectorXd& r, Eigen::MatrixXd& jac) {
        const double c = std::cos(x(0));
        const double s = std::sin(x(0));
        const double m = mirror ? -1.0 : 1.0;
        auto map = [&](Point2D p) { return Point2D{c * p.x - s * m * p.y + x(1), s * p.x + c * m * p.y + x(2)}; };
        auto dmap = [&](Point2D p) { return Point2D{-s * p.x - c * m * p.y, c * p.x - s * m * p.y}; };
        std::size_t row = 0;
        for (const auto& [rel, glob] : points) {
            const Point2D q = map(rel);
            const Point2D dq = dmap(rel);
            r(row) = q.x - glob.x;
            jac.row(row) << dq.x, 1.0, 0.0;
            ++row;
            r(row) = q.y - glob.y;
            jac.row(row) << dq.y, 0.0, 1.0;
            ++row;
        }
        for (const auto& l : links) {
            const Point2D q = map(l.rel);
            const Point2D dq = dmap(l.rel);
            const Point2D diff = q - l.target;
            const double len = std::max(norm(diff), 1e-12);
            r(row) = len - l.range;
            jac.row(row) << (diff.x * dq.x + diff.y * dq.y) / len, diff.x / len, diff.y / len;
            ++row;
        }
    };

    std::vector<RigidFit> out;
    Eigen::VectorXd r(rows);
    Eigen::MatrixXd jac(rows, 3);
    constexpr int kStarts = 24;
    for (bool mirror : {false, true}) {
        for (int k = 0; k < kStarts; ++k) {
            const double theta0 = 2.0 * std::numbers::pi * k / kStarts;
            const FrameTransform t0 = rigid(theta0, mirror, 0.0, 0.0);
            const Point2D moved = t0.apply(from);
            Eigen::Vector3d x(theta0, to.x - moved.x, to.y - moved.y);
            residuals(x, mirror, r, jac);
            double cost = r.squaredNorm();
            double lambda = 1e-3;
            for (int it = 0; it < 100 && cost > 0.0; ++it) {
                Eigen::Matrix3d h = jac.transpose() * jac;
                const Eigen::Vector3d g = jac.transpose() * r;
                h.diagonal() *= 1.0 + lambda;
                const Eigen::Vector3d step = h.ldlt().solve(-g);
                const Eigen::Vector3d trial = x + step;
                Eigen::VectorXd r2(rows);
                Eigen::MatrixXd j2(rows, 3);
                residuals(trial, mirror, r2, j2);
                const double cost2 = r2.squaredNorm();
                if (cost2 < cost) {
                    const bool done = cost - cost2 <= 1e-30 + 1e-15 * cost;
                    x = trial;
                    r = r2;
                    jac = j2;
                    cost = cost2;
                    lambda = std::max(lambda * 0.1, 1e-12);
                    if (done) break;
                } else {
                    lambda *= 10.0;
                    if (lambda > 1e12) break;
                }
            }
            out.push_back({rigid(x(0), mirror, x(1), x(2)), std::sqrt(cost / static_cast<double>(rows))});
        }
    }
    return out;
}

}  // namespace

Calibration calibrate(const RelativeFrame& frame, std::span<const std::pair<NodeId, Point2D>> anchors, double range) {
    std::vector<Point2D> rel_exact, glob_exact, rel_all, glob_all;
    for (const auto& [id, global] : anchors) {
        const auto idx = frame.index_of(id);
        if (!idx || !frame.coords[*idx]) continue;
        rel_all.push_back(*frame.coords[*idx]);
        glob_all.push_back(global);
        const CaseTag tag = frame.tags[*idx];
        const bool exact = frame.clean.empty()
                               ? tag == CaseTag::Reference || tag == CaseTag::Trilateration || tag == CaseTag::TwoCircle
                               : frame.clean[*idx] != 0;
        if (exact) {
            rel_exact.push_back(*frame.coords[*idx]);
            glob_exact.push_back(global);
        }
    }
    Calibration cal;
    if (rel_exact.size() >= 3 && best_triple_margin(rel_exact) >= kCollinearSlack * range) {
        cal.transform = fit_transform(rel_exact, glob_exact, range);
        cal.anchors_used = rel_exact.size();
        return cal;
    }
    cal.anchor_deficient = true;
    // Two exact anchors fix the frame up to a mirror; the remaining anchors
    // only pick the side.
    if (rel_exact.size() >= 2 && rel_all.size() > rel_exact.size() &&
        distance(rel_exact[0], rel_exact[1]) >= kCollinearSlack * range) {
        std::vector<std::pair<Point2D, Point2D>> points;
        for (std::size_t u = 0; u < rel_exact.size(); ++u) points.emplace_back(rel_exact[u], glob_exact[u]);
        std::optional<FrameTransform> best;
        double best_miss = std::numeric_limits<double>::infinity();
        for (const RigidFit& fit : fit_rigid(points, {})) {
            if (fit.rms > kResidualTol * range) continue;
            double miss = 0.0;
            for (std::size_t u = 0; u < rel_all.size(); ++u) miss += distance(fit.transform.apply(rel_all[u]), glob_all[u]);
            if (miss < best_miss) {
                best_miss = miss;
                best = fit.transform;
            }
        }
        if (best) {
            cal.transform = *best;
            cal.anchors_used = rel_all.size();
            return cal;
        }
    }
    cal.transform = fit_transform(rel_all, glob_all, range);
    cal.anchors_used = rel_all.size();
    return cal;
}

namespace {

// Connected groups of `nodes` in the link graph restricted to them.
std::vector<std::vector<NodeId>> groups_of(const Network& network, const std::vector<NodeId>& nodes) {
    std::vector<char> in(network.size(), 0);
    for (NodeId v : nodes) in[v] = 1;
    std::vector<std::vector<NodeId>> out;
    for (NodeId seed : nodes) {
        if (in[seed] != 1) continue;
        std::vector<NodeId> group{seed};
        in[seed] = 2;
        for (std::size_t h = 0; h < group.size(); ++h) {
            for (NodeId w : network.adjacency.neighbors(group[h])) {
                if (in[w] == 1) {
                    in[w] = 2;
                    group.push_back(w);
                }
            }
        }
        out.push_back(std::move(group));
    }
    return out;
}

// Places the clean part of `branch` rigidly from its anchors and the ranges
// to trusted nodes; false when no single exact placement exists.
bool place_piece(const Network& network, const std::vector<NodeId>& members, const RelativeFrame& branch,
                 std::vector<char>& pending, std::vector<char>& trusted, LocalizationResult& result) {
    const double range = network.range;
    std::vector<char> in_branch(network.size(), 0);
    for (std::size_t i = 0; i < branch.members.size(); ++i) in_branch[branch.members[i]] = branch.clean[i];
    auto links_of = [&](std::size_t i) {
        std::vector<LinkRange> out;
        const NodeId v = branch.members[i];
        for (NodeId w : network.adjacency.neighbors(v)) {
            if (!trusted[w] || in_branch[w] || result.subnet_of[w] != result.subnet_of[v]) continue;
            out.push_back({*branch.coords[i], *result.global_estimate[w], measure_distance(network, v, w)});
        }
        return out;
    };

    auto place = [&](const std::vector<char>& used) -> std::optional<FrameTransform> {
        std::vector<std::pair<Point2D, Point2D>> points;
        std::vector<LinkRange> links;
        for (std::size_t i = 0; i < branch.members.size(); ++i) {
            if (!used[i]) continue;
            const NodeId v = branch.members[i];
            if (network.nodes[v].is_anchor) points.emplace_back(*branch.coords[i], network.nodes[v].position);
            for (const LinkRange& l : links_of(i)) links.push_back(l);
        }
        if (2 * points.size() + links.size() < 4) return std::nullopt;

        auto same = [&](const FrameTransform& x, const FrameTransform& y) {
            for (std::size_t i = 0; i < branch.members.size(); ++i) {
                if (used[i] && distance(x.apply(*branch.coords[i]), y.apply(*branch.coords[i])) > kResidualTol * range)
                    return false;
            }
            return true;
        };
        std::vector<FrameTransform> distinct;
        for (const RigidFit& fit : fit_rigid(points, links)) {
            if (fit.rms > kResidualTol * range) continue;
            if (std::none_of(distinct.begin(), distinct.end(),
                             [&](const FrameTransform& t) { return same(t, fit.transform); }))
                distinct.push_back(fit.transform);
        }
        // Silence towards trusted nodes only breaks ties, since obstacles can
        // hide close nodes from each other.
        if (distinct.size() > 1) {
            std::erase_if(distinct, [&](const FrameTransform& t) {
                for (std::size_t i = 0; i < branch.members.size(); ++i) {
                    if (!used[i]) continue;
                    const Point2D p = t.apply(*branch.coords[i]);
                    for (NodeId w : members) {
                        if (!trusted[w] || in_branch[w] || network.adjacency.adjacent(branch.members[i], w)) continue;
                        if (distance(p, *result.global_estimate[w]) < range * (1.0 - kResidualTol)) return true;
                    }
                }
                return false;
            });
        }
        if (distinct.size() != 1) return std::nullopt;
        return distinct.front();
    };

    // A two-circle placement picks its mirror side blindly when nothing
    // outside the piece is visible; when the whole piece does not fit, retry
    // without them and keep only those whose links confirm the side.
    std::vector<char> used(branch.clean.begin(), branch.clean.end());
    std::optional<FrameTransform> chosen = place(used);
    if (!chosen) {
        for (std::size_t i = 0; i < used.size(); ++i) used[i] = used[i] && branch.tags[i] != CaseTag::TwoCircle;
        chosen = place(used);
    }
    if (!chosen) return false;
    bool placed = false;
    for (std::size_t i = 0; i < branch.members.size(); ++i) {
        if (!branch.clean[i]) continue;
        const Point2D p = chosen->apply(*branch.coords[i]);
        if (!used[i]) {
            const auto links = links_of(i);
            const bool confirmed = !links.empty() && std::all_of(links.begin(), links.end(), [&](const LinkRange& l) {
                return std::abs(distance(p, l.target) - l.range) <= kResidualTol * range;
            });
            if (!confirmed) continue;
        }
        const NodeId v = branch.members[i];
        trusted[v] = 1;
        pending[v] = 0;
        result.tag[v] = branch.tags[i];
        result.global_estimate[v] = p;
        placed = true;
    }
    return placed;
}

// Pending nodes get frames of their own, one per connected group, until no
// group can be placed.
std::size_t place_branches(const Network& network, const std::vector<NodeId>& members, std::vector<char>& pending,
                           std::vector<char>& trusted, LocalizationResult& result) {
    std::size_t frames = 0;
    for (bool progress = true; progress;) {
        progress = false;
        std::vector<NodeId> rest;
        for (NodeId v : members) {
            if (pending[v]) rest.push_back(v);
        }
        for (const auto& group : groups_of(network, rest)) {
            if (group.size() < 3) continue;
            RelativeFrame branch;
            try {
                branch = localize_subnetwork(network, group, select_references(network, group),
                                             result.subnet_of[group.front()]);
            } catch (const Error&) {
                continue;
            }
            if (place_piece(network, members, branch, pending, trusted, result)) {
                ++frames;
                progress = true;
            }
        }
    }
    return frames;
}

}  // namespace

LocalizationResult localize_network(const Network& network, const PartitionMap& partition) {
    const std::size_t n = network.size();
    LocalizationResult result;
    result.subnet_of = partition.label;
    result.tag.assign(n, CaseTag::Unresolved);
    result.relative.assign(n, std::nullopt);
    result.global_estimate.assign(n, std::nullopt);

    const auto areas = partition.areas();
    for (std::size_t s = 0; s < areas.size(); ++s) {
        SubnetOutcome out;
        out.subnet = static_cast<AreaId>(s);
        const auto& members = areas[s];
        try {
            const ReferenceTriple refs = select_references(network, members);
            out.frame = localize_subnetwork(network, members, refs, out.subnet);
        } catch (const Error&) {
            out.flags.emplace_back("no_reference_triple");
            result.subnets.push_back(std::move(out));
            continue;
        }
        const RelativeFrame& frame = *out.frame;
        for (std::size_t i = 0; i < frame.members.size(); ++i) {
            result.tag[frame.members[i]] = frame.tags[i];
            result.relative[frame.members[i]] = frame.coords[i];
        }
        if (frame.low_confidence > 0) out.flags.emplace_back("low_confidence");

        std::vector<std::pair<NodeId, Point2D>> anchors;
        for (NodeId v : members) {
            if (network.nodes[v].is_anchor) anchors.emplace_back(v, network.nodes[v].position);
        }
        try {
            out.calibration = calibrate(frame, anchors, network.range);
        } catch (const Error&) {
            out.flags.emplace_back("uncalibratable");
            result.subnets.push_back(std::move(out));
            continue;
        }
        if (out.calibration->anchor_deficient) out.flags.emplace_back("anchor_deficient");
        for (std::size_t i = 0; i < frame.members.size(); ++i) {
            if (frame.coords[i]) result.global_estimate[frame.members[i]] = out.calibration->transform.apply(*frame.coords[i]);
        }

        // Nodes reached only through a Case-3 placement (typically past a
        // one-link neck) get frames of their own, one per connected group,
        // placed rigidly from their anchors and the ranges to trusted nodes.
        // Without an exact calibration the clean part cannot serve as a target.
        std::vector<char> pending(n, 0);
        std::vector<char> trusted(n, 0);
        for (std::size_t i = 0; i < frame.members.size(); ++i) {
            pending[frame.members[i]] = !frame.clean[i];
            trusted[frame.members[i]] = frame.clean[i] && !out.calibration->anchor_deficient;
        }
        out.branch_frames = place_branches(network, members, pending, trusted, result);
        // Branches carrying the anchors can in turn place the clean part.
        if (out.calibration->anchor_deficient && out.branch_frames > 0 &&
            place_piece(network, members, frame, pending, trusted, result)) {
            out.branch_frames += 1 + place_branches(network, members, pending, trusted, result);
        }
        result.subnets.push_back(std::move(out));
    }
    return result;
}

void write_localization_csv(std::ostream& out, const LocalizationResult& result, const Network& network) {
    out << "node_id,subnet,case_tag,x_rel,y_rel,x_glob,y_glob,true_x,true_y,error_m\n";
    out.precision(17);
    for (std::size_t i = 0; i < network.size(); ++i) {
        const Point2D truth = network.nodes[i].position;
        out << i << ',' << result.subnet_of[i] << ',' << to_string(result.tag[i]) << ',';
        if (result.relative[i]) {
            out << result.relative[i]->x << ',' << result.relative[i]->y << ',';
        } else {
            out << ",,";
        }
        if (result.global_estimate[i]) {
            const Point2D g = *result.global_estimate[i];
            out << g.x << ',' << g.y << ',' << truth.x << ',' << truth.y << ',' << distance(g, truth) << '\n';
        } else {
            out << ",," << truth.x << ',' << truth.y << ",\n";
        }
    }
}

}  // namespace wsnloc
