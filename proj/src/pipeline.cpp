#include "qmed/pipeline.hpp"

#include "qmed/errors.hpp"
#include "qmed/sparsity.hpp"
#include "qmed/stats.hpp"

#include <cmath>
#include <limits>
#include <utility>

namespace qmed {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

EffectCurve undefined_curve(const BinGrid& grid, int x_for_nie) {
    EffectCurve c;
    c.u = grid.midpoints;
    const std::size_t K = grid.K;
    c.nie.assign(K, kNaN);
    c.nde.assign(K, kNaN);
    c.ace.assign(K, kNaN);
    c.q.assign(K, kNaN);
    c.inv_s.assign(K, kNaN);
    c.r.assign(K, kNaN);
    c.product.assign(K, kNaN);
    c.effect_defined.assign(K, 0);
    c.decomp_defined.assign(K, 0);
    c.s_floored.assign(K, 0);
    c.r_fallback.assign(K, 0);
    c.x_for_nie = x_for_nie;
    c.x_star_for_nde = 1 - x_for_nie;
    return c;
}

// Sensitivity of the rank-ordered rate curve at each midpoint for one
// reference arm, with the bandwidth truncated to the curve's defined span.
std::vector<double> arm_sensitivity(const RateCurve& curve,
                                    const std::vector<double>& mids,
                                    double n_eff, double delta_override,
                                    InterpMode interp) {
    std::vector<double> out(mids.size(), kNaN);
    for (std::size_t k = 0; k < mids.size(); ++k) {
        const double u = mids[k];
        const double base = delta_override > 0.0 ? delta_override
                                                 : bofinger_bandwidth(n_eff, u);
        const double d = truncate_delta(curve, u, base);
        if (d > 0.0) out[k] = sensitivity_r(curve, u, d, interp);
    }
    return out;
}

} // namespace

PipelineResult run_pipeline(const MicrodataTable& table,
                            const std::vector<double>& weights,
                            const RunConfig& config) {
    const std::size_t n = table.size();
    if (n == 0) throw EstimationError("empty table");
    if (!weights.empty() && weights.size() != n)
        throw ArgumentError("weights length does not match the table");
    if (config.x_for_nie != 0 && config.x_for_nie != 1)
        throw ArgumentError("x_for_nie must be 0 or 1");
    for (std::size_t j : config.exposure_interactions)
        if (j >= table.n_covariates())
            throw ArgumentError("exposure interaction index out of range");

    double n0 = 0.0, n1 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double w = weights.empty() ? 1.0 : weights[i];
        (table.exposure(i) == 0 ? n0 : n1) += w;
    }
    if (!(n0 > 0.0) || !(n1 > 0.0))
        throw EstimationError("degenerate exposure arm: one arm carries no weight");

    PipelineResult result;
    result.grid = BinGrid::uniform(config.bins);
    result.n0_eff = n0;
    result.n1_eff = n1;
    const std::vector<double>& mids = result.grid.midpoints;

    // The model's level grid covers the bin midpoints plus the sparsity flank
    // points for both arm sizes, so every later evaluation interpolates
    // between fitted levels.
    std::vector<double> levels =
        sparsity_levels(mids, n0, n1, config.sparsity_eps);

    MediatorModel model = [&] {
        if (table.n_covariates() == 0 && !config.force_linear_model)
            return MediatorModel::sample_backend(table, weights, levels);
        DesignSpec design;
        design.n_covariates = table.n_covariates();
        design.exposure_interactions = config.exposure_interactions;
        return MediatorModel::linear_backend(table, weights, design, levels,
                                             config.rearrange);
    }();
    result.profiles = model.profiles();
    result.rearranged = model.any_rearranged();
    const std::vector<std::uint32_t> row_profile =
        profile_assignment(table, result.profiles);

    QuantileBinning binning0 =
        assign_bins(table, model, 0, result.grid, config.bin_mode, row_profile);
    QuantileBinning binning1 =
        assign_bins(table, model, 1, result.grid, config.bin_mode, row_profile);
    result.sparse_bins_warning = binning0.sparse_warning || binning1.sparse_warning;
    result.ranks_clamped = binning0.ranks_clamped + binning1.ranks_clamped;

    // Marginal rate curves in the order (x, x*) = (0,0), (1,1), (x,1), (x,0).
    result.rates.push_back(rate_curve(table, weights, binning0, 0, row_profile,
                                      -1, config.rate_scale));
    result.rates.push_back(rate_curve(table, weights, binning1, 1, row_profile,
                                      -1, config.rate_scale));
    result.rates.push_back(rate_curve(table, weights, binning1, config.x_for_nie,
                                      row_profile, -1, config.rate_scale));
    result.rates.push_back(rate_curve(table, weights, binning0, config.x_for_nie,
                                      row_profile, -1, config.rate_scale));

    const std::size_t P = result.profiles.size();
    std::vector<double> profile_weights(P, 0.0);
    for (std::size_t p = 0; p < P; ++p)
        profile_weights[p] = result.profiles[p].weight;

    result.per_profile.reserve(P);
    for (std::size_t p = 0; p < P; ++p) {
        if (!(profile_weights[p] > 0.0)) {
            result.per_profile.push_back(
                undefined_curve(result.grid, config.x_for_nie));
            continue;
        }
        // Within a single profile the marginal curves are the per-profile
        // curves; recomputing them would repeat the same aggregation.
        const RateCurve& r00 =
            P == 1 ? result.rates[0]
                   : rate_curve(table, weights, binning0, 0, row_profile,
                                static_cast<int>(p), config.rate_scale);
        const RateCurve& r11 =
            P == 1 ? result.rates[1]
                   : rate_curve(table, weights, binning1, 1, row_profile,
                                static_cast<int>(p), config.rate_scale);
        const RateCurve& rx1 =
            P == 1 ? result.rates[2]
                   : rate_curve(table, weights, binning1, config.x_for_nie,
                                row_profile, static_cast<int>(p), config.rate_scale);
        const RateCurve& rx0 =
            P == 1 ? result.rates[3]
                   : rate_curve(table, weights, binning0, config.x_for_nie,
                                row_profile, static_cast<int>(p), config.rate_scale);

        EffectCurve curve = u_specific_effects(r00, r11, rx1, rx0,
                                               config.x_for_nie, config.interp);

        std::vector<double> q(mids.size());
        for (std::size_t k = 0; k < mids.size(); ++k)
            q[k] = model.quantile_effect(mids[k], p);

        const std::vector<SparsityValue> s0 =
            sparsity_curve(model, 0, p, mids, n0, config.sparsity_eps);
        const std::vector<SparsityValue> s1 =
            sparsity_curve(model, 1, p, mids, n1, config.sparsity_eps);
        std::vector<double> inv_s(mids.size());
        std::vector<std::uint8_t> floored(mids.size(), 0);
        for (std::size_t k = 0; k < mids.size(); ++k) {
            inv_s[k] = pooled_inverse_sparsity(s0[k].s, s1[k].s, n0, n1,
                                               config.pool_inverse);
            floored[k] = s0[k].floored || s1[k].floored;
        }

        const std::vector<double> r0 = arm_sensitivity(
            rx0, mids, n0, config.sensitivity_delta, config.interp);
        const std::vector<double> r1 = arm_sensitivity(
            rx1, mids, n1, config.sensitivity_delta, config.interp);
        std::vector<double> r(mids.size());
        std::vector<std::uint8_t> fallback(mids.size(), 0);
        for (std::size_t k = 0; k < mids.size(); ++k) {
            const PooledValue pooled = pool_arms(r0[k], r1[k], n0, n1);
            r[k] = pooled.value;
            fallback[k] = pooled.fallback;
        }

        attach_decomposition(&curve, q, inv_s, r, floored, fallback);
        result.per_profile.push_back(std::move(curve));
    }

    result.marginal =
        P == 1 ? result.per_profile[0]
               : integrate_over_profiles(result.per_profile, profile_weights);
    result.overall = overall_effects(result.marginal, result.grid,
                                     config.max_undefined_frac);
    return result;
}

std::size_t flat_size(std::size_t K) { return 7 * K + 3; }

std::vector<double> flatten_effects(const PipelineResult& result) {
    const EffectCurve& c = result.marginal;
    const std::size_t K = c.u.size();
    std::vector<double> out;
    out.reserve(flat_size(K));
    for (auto f : {&EffectCurve::nie, &EffectCurve::nde, &EffectCurve::ace,
                   &EffectCurve::q, &EffectCurve::inv_s, &EffectCurve::r,
                   &EffectCurve::product})
        out.insert(out.end(), (c.*f).begin(), (c.*f).end());
    out.push_back(result.overall.nie);
    out.push_back(result.overall.nde);
    out.push_back(result.overall.ace);
    return out;
}

WeightedStatistic pipeline_statistic(const MicrodataTable& table,
                                     const RunConfig& config) {
    return [&table, config](const std::vector<std::uint32_t>& rows,
                            const std::vector<double>& row_weights) {
        std::vector<double> w(table.size(), 0.0);
        if (rows.size() != row_weights.size())
            throw ArgumentError("rows and weights differ in length");
        for (std::size_t j = 0; j < rows.size(); ++j) {
            if (rows[j] >= table.size())
                throw ArgumentError("subset row index out of range");
            w[rows[j]] += row_weights[j];
        }
        return flatten_effects(run_pipeline(table, w, config));
    };
}

} // namespace qmed
