#include "qmed/blb.hpp"
#include "qmed/errors.hpp"
#include "qmed/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace qmed {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Linear-interpolation sample quantile on sorted data (the usual "type 7").
double sorted_quantile(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) return kNaN;
    if (sorted.size() == 1) return sorted[0];
    const double h = p * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(h);
    if (lo + 1 >= sorted.size()) return sorted.back();
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

std::vector<std::uint32_t> draw_subset(std::size_t n, std::size_t b, RngStream& rng) {
    // Partial Fisher-Yates over an index array.
    std::vector<std::uint32_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0u);
    for (std::size_t i = 0; i < b; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.next_below(n - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(b);
    std::sort(idx.begin(), idx.end()); // row order, for cache-friendly refits
    return idx;
}

} // namespace

ConfidenceBand blb_confidence(std::size_t n, const WeightedStatistic& statistic,
                              const BlbConfig& config) {
    if (n < 2) throw ArgumentError("blb_confidence: need n >= 2");
    if (config.subsets < 1) throw ArgumentError("blb_confidence: need S >= 1");
    if (config.replicates < 2) throw ArgumentError("blb_confidence: need R >= 2");
    if (!(config.alpha > 0.0 && config.alpha < 1.0))
        throw ArgumentError("blb_confidence: alpha must lie in (0,1)");
    std::size_t b = config.subset_size;
    if (b == 0)
        b = static_cast<std::size_t>(std::ceil(std::pow(static_cast<double>(n), 0.7)));
    b = std::min(b, n);
    if (b < 1) throw ArgumentError("blb_confidence: subset size must be positive");

    // Full-data point estimate with unit weights (total weight n, matching
    // the nominal size of every resample).
    std::vector<std::uint32_t> all_rows(n);
    std::iota(all_rows.begin(), all_rows.end(), 0u);
    const std::vector<double> unit(n, 1.0);
    const std::vector<double> point = statistic(all_rows, unit);
    const std::size_t dim = point.size();

    const std::size_t S = config.subsets, R = config.replicates;
    std::vector<double> lo_sum(dim, 0.0), hi_sum(dim, 0.0);
    std::vector<std::size_t> lo_count(dim, 0), hi_count(dim, 0);
    std::size_t dropped = 0;

    for (std::size_t s = 0; s < S; ++s) {
        RngStream subset_rng = RngStream::keyed(config.seed, 1, s);
        const auto rows = draw_subset(n, b, subset_rng);
        const std::vector<double> anchor_w(b, static_cast<double>(n) / static_cast<double>(b));
        const std::vector<double> anchor = statistic(rows, anchor_w);
        if (anchor.size() != dim)
            throw InferenceError("blb_confidence: statistic dimension changed across calls");

        // deviations[c] collects theta_c(replicate) - anchor_c
        std::vector<std::vector<double>> deviations(dim);
        for (std::size_t r = 0; r < R; ++r) {
            RngStream rep_rng = RngStream::keyed(config.seed, 2, s, r);
            const auto weights = rep_rng.multinomial_equal(n, b);
            std::vector<double> theta;
            try {
                theta = statistic(rows, weights);
            } catch (const EngineError&) {
                ++dropped;
                continue;
            }
            if (theta.size() != dim)
                throw InferenceError("blb_confidence: statistic dimension changed across calls");
            for (std::size_t c = 0; c < dim; ++c)
                if (std::isfinite(theta[c]) && std::isfinite(anchor[c]))
                    deviations[c].push_back(theta[c] - anchor[c]);
        }

        for (std::size_t c = 0; c < dim; ++c) {
            auto& dev = deviations[c];
            // Components need most replicates finite to contribute a
            // percentile; sparser information is treated as missing.
            if (dev.size() < static_cast<std::size_t>(
                                 std::ceil(0.8 * static_cast<double>(R))))
                continue;
            std::sort(dev.begin(), dev.end());
            lo_sum[c] += sorted_quantile(dev, config.alpha / 2.0);
            hi_sum[c] += sorted_quantile(dev, 1.0 - config.alpha / 2.0);
            ++lo_count[c];
            ++hi_count[c];
        }
    }

    const std::size_t total = S * R;
    if (static_cast<double>(dropped) > config.max_drop_fraction * static_cast<double>(total))
        throw InferenceError("blb_confidence: more than " +
                             std::to_string(static_cast<int>(config.max_drop_fraction * 100)) +
                             "% of replicates failed");

    ConfidenceBand band;
    band.point = point;
    band.low.assign(dim, kNaN);
    band.high.assign(dim, kNaN);
    band.subset_size = b;
    band.replicates_dropped = dropped;
    band.replicates_total = total;
    for (std::size_t c = 0; c < dim; ++c) {
        if (lo_count[c] == 0 || !std::isfinite(point[c])) continue;
        double avg_lo = lo_sum[c] / static_cast<double>(lo_count[c]);
        double avg_hi = hi_sum[c] / static_cast<double>(hi_count[c]);
        // Centered percentile deviations should bracket zero; when they do
        // not (heavily skewed replicates), pin the offending endpoint to the
        // point estimate so low <= point <= high always holds.
        if (avg_lo > 0.0) { avg_lo = 0.0; band.clamped = true; }
        if (avg_hi < 0.0) { avg_hi = 0.0; band.clamped = true; }
        band.low[c] = point[c] + avg_lo;
        band.high[c] = point[c] + avg_hi;
    }
    return band;
}

} // namespace qmed
