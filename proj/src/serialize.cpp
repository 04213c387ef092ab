#include "qmed/serialize.hpp"

#include "qmed/errors.hpp"

#include "json.hpp"

#include <charconv>
#include <cmath>

namespace qmed {

using ordered_json = nlohmann::ordered_json;

namespace {

// NaN maps to JSON null by hand so undefined entries are explicit rather
// than relying on the serializer's NaN handling.
ordered_json num_or_null(double v) {
    if (std::isfinite(v)) return v;
    return nullptr;
}

ordered_json ci_pair(double lo, double hi) {
    return ordered_json::array({num_or_null(lo), num_or_null(hi)});
}

} // namespace

std::string format_number(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string effects_to_json(const PipelineResult& result,
                            const ConfidenceBand* band, double alpha) {
    const EffectCurve& c = result.marginal;
    const std::size_t K = c.u.size();

    ordered_json root;
    root["schema"] = "qmediate/effects/v1";
    root["bins"] = K;
    root["x_for_nie"] = c.x_for_nie;
    root["x_star_for_nde"] = c.x_star_for_nde;
    root["rate_scale"] = result.rates.empty() ? 1.0 : result.rates[0].rate_scale;
    if (band) root["alpha"] = alpha;

    ordered_json overall;
    overall["nie"] = num_or_null(result.overall.nie);
    overall["nde"] = num_or_null(result.overall.nde);
    overall["ace"] = num_or_null(result.overall.ace);
    if (band) {
        overall["nie_ci"] = ci_pair(band->low[7 * K + 0], band->high[7 * K + 0]);
        overall["nde_ci"] = ci_pair(band->low[7 * K + 1], band->high[7 * K + 1]);
        overall["ace_ci"] = ci_pair(band->low[7 * K + 2], band->high[7 * K + 2]);
    }
    root["overall"] = overall;

    static constexpr const char* kFields[7] = {"nie", "nde", "ace", "q",
                                               "inv_s", "r", "product"};
    const std::vector<double>* columns[7] = {&c.nie, &c.nde, &c.ace,  &c.q,
                                             &c.inv_s, &c.r, &c.product};
    ordered_json curve = ordered_json::array();
    for (std::size_t k = 0; k < K; ++k) {
        ordered_json point;
        point["u"] = c.u[k];
        for (std::size_t f = 0; f < 7; ++f) {
            point[kFields[f]] = num_or_null((*columns[f])[k]);
            if (band) {
                const std::size_t idx = f * K + k;
                point[std::string(kFields[f]) + "_ci"] =
                    ci_pair(band->low[idx], band->high[idx]);
            }
        }
        point["s_floored"] = static_cast<bool>(c.s_floored[k]);
        point["r_fallback"] = static_cast<bool>(c.r_fallback[k]);
        curve.push_back(std::move(point));
    }
    root["curve"] = std::move(curve);

    ordered_json flags;
    flags["rearranged"] = result.rearranged;
    flags["sparse_bins"] = result.sparse_bins_warning;
    flags["ranks_clamped"] = result.ranks_clamped;
    if (band) {
        flags["band_clamped"] = band->clamped;
        flags["replicates_dropped"] = band->replicates_dropped;
    }
    root["flags"] = std::move(flags);
    return root.dump(2) + "\n";
}

std::string rate_curve_csv(const RateCurve& curve) {
    std::string out = "u_mid,x,x_star,n_at_risk,events,rate\n";
    for (std::size_t k = 0; k < curve.u_mid.size(); ++k) {
        out += format_number(curve.u_mid[k]);
        out += ',';
        out += std::to_string(curve.x);
        out += ',';
        out += std::to_string(curve.x_star);
        out += ',';
        out += format_number(curve.n_at_risk[k]);
        out += ',';
        out += format_number(curve.events[k]);
        out += ',';
        if (curve.defined[k]) out += format_number(curve.rate[k] * curve.rate_scale);
        out += '\n';
    }
    return out;
}

std::string simulation_to_json(const OracleModel& model, std::size_t n,
                               double p_exposed, std::uint64_t seed,
                               const SimulationReport& report,
                               const std::vector<double>& u_grid) {
    ordered_json root;
    root["schema"] = "qmediate/simulation/v1";

    ordered_json params;
    params["alpha0"] = model.alpha0();
    params["alpha1"] = model.alpha1();
    params["alpha2"] = model.alpha2();
    params["beta0"] = model.beta0();
    params["beta1"] = model.beta1();
    params["sigma_exponent"] = model.sigma_exponent();
    params["p_exposed"] = p_exposed;
    params["n"] = n;
    params["seed"] = seed;
    root["params"] = std::move(params);

    ordered_json clamp;
    clamp["n_clamped"] = report.n_clamped;
    clamp["fraction"] = report.clamp_fraction;
    clamp["warning"] = report.clamp_warning;
    root["risk_clamp"] = std::move(clamp);

    ordered_json curve = ordered_json::array();
    for (double u : u_grid) {
        ordered_json point;
        point["u"] = u;
        point["quantile0"] = model.conditional_quantile(u, 0.0);
        point["quantile1"] = model.conditional_quantile(u, 1.0);
        point["q"] = model.quantile_effect(u);
        point["s0"] = model.sparsity(u, 0.0);
        point["s1"] = model.sparsity(u, 1.0);
        point["nie"] = model.nie(1.0, u);
        point["ace"] = model.ace_u(u);
        point["nde"] = model.nde(0.0, u);
        point["r0"] = model.sensitivity(1.0, 0.0, u);
        point["r1"] = model.sensitivity(1.0, 1.0, u);
        point["product0"] = model.product(1.0, 0.0, u);
        point["product1"] = model.product(1.0, 1.0, u);
        try {
            point["tilde_x_star"] = model.tilde_x_star(u);
        } catch (const ArgumentError&) {
            point["tilde_x_star"] = nullptr; // singular where the slope is zero
        }
        curve.push_back(std::move(point));
    }
    root["curve"] = std::move(curve);
    return root.dump(2) + "\n";
}

std::string manifest_to_json(const ManifestInfo& info) {
    ordered_json root;
    root["schema"] = "qmediate/manifest/v1";
    root["command"] = info.command;

    if (!info.input_path.empty()) {
        ordered_json input;
        input["path"] = info.input_path;
        char hash[17];
        std::snprintf(hash, sizeof(hash), "%016llx",
                      static_cast<unsigned long long>(info.data_hash));
        input["content_hash"] = hash;
        input["rows_read"] = info.ingest.rows_read;
        input["rows_kept"] = info.ingest.rows_kept;
        input["rows_dropped"] = info.ingest.rows_dropped;
        ordered_json columns;
        columns["outcome"] = info.schema.outcome;
        columns["exposure"] = info.schema.exposure;
        columns["mediator"] = info.schema.mediator;
        columns["covariates"] = info.schema.covariates;
        input["columns"] = std::move(columns);
        root["input"] = std::move(input);
    }

    ordered_json config;
    config["bins"] = info.config.bins;
    config["x_for_nie"] = info.config.x_for_nie;
    config["bin_mode"] =
        info.config.bin_mode == BinAssignMode::residual ? "residual" : "cdf";
    config["interp"] = info.config.interp == InterpMode::linear ? "linear" : "spline";
    config["rearrange"] = info.config.rearrange;
    config["pool_inverse"] = info.config.pool_inverse;
    config["sensitivity_delta"] = info.config.sensitivity_delta;
    config["sparsity_eps"] = info.config.sparsity_eps;
    config["force_linear_model"] = info.config.force_linear_model;
    config["exposure_interactions"] = info.config.exposure_interactions;
    config["rate_scale"] = info.config.rate_scale;
    config["max_undefined_frac"] = info.config.max_undefined_frac;
    root["config"] = std::move(config);

    if (info.has_blb) {
        ordered_json blb;
        blb["subsets"] = info.blb.subsets;
        blb["subset_size"] = info.blb.subset_size; // 0 means ceil(n^0.7)
        blb["replicates"] = info.blb.replicates;
        blb["alpha"] = info.blb.alpha;
        blb["seed"] = info.blb.seed;
        root["blb"] = std::move(blb);
    }

    root["outputs"] = info.outputs;

    ordered_json flags;
    flags["rearranged"] = info.rearranged;
    flags["sparse_bins"] = info.sparse_bins_warning;
    flags["ranks_clamped"] = info.ranks_clamped;
    if (info.has_blb) {
        flags["band_clamped"] = info.band_clamped;
        flags["replicates_dropped"] = info.replicates_dropped;
    }
    root["flags"] = std::move(flags);
    return root.dump(2) + "\n";
}

} // namespace qmed
