#include "wsnloc/metrics.hpp"

#include "wsnloc/error.hpp"
#include "wsnloc/localization.hpp"

namespace wsnloc {

std::size_t spo_count(const Network& network, const std::vector<AreaId>* labels) {
    const std::size_t n = network.size();
    if (network.scenario.obstacles.empty()) return 0;
    const double r2 = network.range * network.range;
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const Point2D p = network.nodes[i].position;
        for (std::size_t j = i + 1; j < n; ++j) {
            if (labels && (*labels)[i] != (*labels)[j]) continue;
            const Point2D q = network.nodes[j].position;
            const Point2D d = q - p;
            if (dot(d, d) > r2) continue;
            if (segment_blocked(network.scenario, p, q)) ++count;
        }
    }
    return count;
}

std::size_t in_range_pairs(const Network& network) {
    const std::size_t n = network.size();
    const double r2 = network.range * network.range;
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const Point2D d = network.nodes[j].position - network.nodes[i].position;
            if (dot(d, d) <= r2) ++count;
        }
    }
    return count;
}

double acd_term(std::size_t spo_before, std::size_t spo_after) {
    if (spo_before == 0) return 1.0;
    return 1.0 - static_cast<double>(spo_after) / static_cast<double>(spo_before);
}

double acd(std::span<const TrialMetrics> trials) {
    if (trials.empty()) throw Error("acd needs at least one trial");
    double sum = 0.0;
    for (const auto& t : trials) sum += t.acd_term;
    return sum / static_cast<double>(trials.size());
}

MleResult mle(const LocalizationResult& result, const Network& truth) {
    const std::size_t n = truth.size();
    // Area centres from true positions, used as the fallback estimate.
    std::vector<Point2D> centre;
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < n; ++i) {
        const AreaId a = result.subnet_of[i];
        if (a >= centre.size()) {
            centre.resize(a + 1, Point2D{0, 0});
            members.resize(a + 1, 0);
        }
        centre[a] = centre[a] + truth.nodes[i].position;
        ++members[a];
    }
    for (std::size_t a = 0; a < centre.size(); ++a) {
        if (members[a] > 0) centre[a] = (1.0 / static_cast<double>(members[a])) * centre[a];
    }

    MleResult out;
    std::size_t unknown = 0;
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (truth.nodes[i].is_anchor) continue;
        ++unknown;
        const Point2D p = truth.nodes[i].position;
        const auto& est = result.global_estimate[i];
        double err;
        if (est) {
            err = distance(*est, p);
            if (err > kPositionEps) ++out.inaccurate;
        } else {
            err = distance(centre[result.subnet_of[i]], p);
            ++out.unlocalized;
            ++out.inaccurate;
        }
        sum += err;
    }
    out.mle = unknown > 0 ? sum / static_cast<double>(unknown) : 0.0;
    return out;
}

}  // namespace wsnloc
