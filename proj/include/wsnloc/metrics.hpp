#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wsnloc/deployment.hpp"
#include "wsnloc/partitioning.hpp"

namespace wsnloc {

struct LocalizationResult;

// Positional tolerance separating exact placements from degraded ones.
inline constexpr double kPositionEps = 1e-6;

struct TrialMetrics {
    std::size_t spo_before = 0;
    std::size_t spo_after = 0;
    double acd_term = 1.0;
    double mle = 0.0;
    std::size_t inaccurate = 0;
    std::size_t n_pairs = 0;
    std::size_t z = 1;
    std::vector<std::string> flags;
};

// Unordered node pairs within range whose straight segment is blocked. With
// labels, only pairs sharing a label are counted.
std::size_t spo_count(const Network& network, const std::vector<AreaId>* labels = nullptr);
inline std::size_t spo_count(const Network& network, const PartitionMap& map) { return spo_count(network, &map.label); }

// Unordered node pairs within range, blocked or not.
std::size_t in_range_pairs(const Network& network);

// 1 - after/before; a trial with nothing to sever scores 1.
double acd_term(std::size_t spo_before, std::size_t spo_after);

// Mean of per-trial terms. Throws Error when `trials` is empty.
double acd(std::span<const TrialMetrics> trials);

struct MleResult {
    double mle = 0.0;
    std::size_t inaccurate = 0;
    std::size_t unlocalized = 0;
};

// Mean positional error over the unknown (non-anchor) nodes. Unlocalized
// nodes contribute their distance to the area centre and count as inaccurate.
MleResult mle(const LocalizationResult& result, const Network& truth);

}  // namespace wsnloc
