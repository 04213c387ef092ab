// End-to-end estimation: mediator fit, quantile binning, rate curves,
// effect curves with the three-factor decomposition, and quadrature
// averages.  The same routine serves the point estimate and every weighted
// BLB refit.
#pragma once

#include "qmed/blb.hpp"
#include "qmed/data.hpp"
#include "qmed/effects.hpp"
#include "qmed/mediator.hpp"
#include "qmed/outcome.hpp"

#include <cstdint>
#include <vector>

namespace qmed {

struct RunConfig {
    std::size_t bins = 50;
    int x_for_nie = 1;
    BinAssignMode bin_mode = BinAssignMode::residual;
    InterpMode interp = InterpMode::linear;
    bool rearrange = true;
    bool pool_inverse = false;      // density factor: average 1/s instead of s
    double sensitivity_delta = 0.0; // 0 -> Bofinger with the ranking arm's size
    double sparsity_eps = 0.0;      // 0 -> Bofinger with the ranking arm's size
    bool force_linear_model = false;
    std::vector<std::size_t> exposure_interactions;
    double rate_scale = 1.0;
    double max_undefined_frac = 0.5;
};

struct PipelineResult {
    BinGrid grid;
    std::vector<CovariateProfile> profiles;
    std::vector<EffectCurve> per_profile; // aligned with profiles
    EffectCurve marginal;
    OverallEffects overall;
    // Marginal rate curves in the order (0,0), (1,1), (x,1), (x,0).
    std::vector<RateCurve> rates;
    double n0_eff = 0.0, n1_eff = 0.0;
    bool rearranged = false;
    bool sparse_bins_warning = false;
    std::size_t ranks_clamped = 0; // cdf assignment only
};

PipelineResult run_pipeline(const MicrodataTable& table,
                            const std::vector<double>& weights,
                            const RunConfig& config);

// Fixed flattening of the marginal curve and overall effects for BLB:
// [nie | nde | ace | q | inv_s | r | product] each of length K, then
// overall nie, nde, ace.  Undefined entries are NaN.
std::vector<double> flatten_effects(const PipelineResult& result);
std::size_t flat_size(std::size_t K);

// Statistic adapter: run the pipeline on (rows, weights) against the full
// table and flatten.  Rows absent from `rows` get weight zero.
WeightedStatistic pipeline_statistic(const MicrodataTable& table,
                                     const RunConfig& config);

} // namespace qmed
