// Bag-of-little-bootstraps confidence bands for vector-valued statistics.
//
// S subsets of size b are drawn without replacement; within each subset, R
// multinomial weight vectors summing to n (the nominal full size) drive
// weighted refits.  Per subset, a centered percentile interval is formed
// from the replicate deviations; endpoints are averaged across subsets.
// Randomness is counter-based, keyed by (seed, subset, replicate), so
// execution order cannot change results.
#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace qmed {

struct BlbConfig {
    std::size_t subsets = 10;       // S
    std::size_t subset_size = 0;    // b; 0 means ceil(n^0.7)
    std::size_t replicates = 50;    // R per subset
    double alpha = 0.05;
    std::uint64_t seed = 0;
    double max_drop_fraction = 0.2; // failed-replicate budget
};

struct ConfidenceBand {
    std::vector<double> point;  // full-data estimate (unit weights)
    std::vector<double> low, high;
    std::size_t subset_size = 0;
    std::size_t replicates_dropped = 0;
    std::size_t replicates_total = 0;
    bool clamped = false; // some endpoint pulled to the point estimate
};

// The statistic receives the row indices in play and one weight per row
// (weights sum to the nominal n); it must be a deterministic function of
// (rows, weights).
using WeightedStatistic =
    std::function<std::vector<double>(const std::vector<std::uint32_t>& rows,
                                      const std::vector<double>& weights)>;

ConfidenceBand blb_confidence(std::size_t n, const WeightedStatistic& statistic,
                              const BlbConfig& config);

} // namespace qmed
