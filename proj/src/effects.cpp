#include "qmed/effects.hpp"
#include "qmed/errors.hpp"

#include <cmath>
#include <limits>

namespace qmed {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

EffectCurve u_specific_effects(const RateCurve& r00, const RateCurve& r11,
                               const RateCurve& rx1, const RateCurve& rx0,
                               int x_for_nie, InterpMode interp) {
    const auto& grid_u = r00.u_mid;
    for (const RateCurve* c : {&r11, &rx1, &rx0})
        if (c->u_mid != grid_u)
            throw ArgumentError("u_specific_effects: rate curves use different binnings");
    if (r00.x != 0 || r00.x_star != 0 || r11.x != 1 || r11.x_star != 1)
        throw ArgumentError("u_specific_effects: (0,0)/(1,1) curves mislabeled");
    if (rx1.x != x_for_nie || rx0.x != x_for_nie || rx1.x_star != 1 || rx0.x_star != 0)
        throw ArgumentError("u_specific_effects: NIE curves mislabeled");

    EffectCurve out;
    out.u = grid_u;
    out.x_for_nie = x_for_nie;
    out.x_star_for_nde = 1 - x_for_nie;
    const std::size_t K = grid_u.size();
    out.nie.assign(K, kNaN);
    out.nde.assign(K, kNaN);
    out.ace.assign(K, kNaN);
    out.q.assign(K, kNaN);
    out.inv_s.assign(K, kNaN);
    out.r.assign(K, kNaN);
    out.product.assign(K, kNaN);
    out.effect_defined.assign(K, 0);
    out.decomp_defined.assign(K, 0);
    out.s_floored.assign(K, 0);
    out.r_fallback.assign(K, 0);

    for (std::size_t k = 0; k < K; ++k) {
        const double u = grid_u[k];
        const double a = interp_rate(r11, u, interp);
        const double b = interp_rate(r00, u, interp);
        const double c = interp_rate(rx1, u, interp);
        const double d = interp_rate(rx0, u, interp);
        if (std::isfinite(a) && std::isfinite(b) && std::isfinite(c) && std::isfinite(d)) {
            out.nie[k] = c - d;
            out.ace[k] = a - b;
            out.nde[k] = out.ace[k] - out.nie[k];
            out.effect_defined[k] = 1;
        }
    }
    return out;
}

void attach_decomposition(EffectCurve* curve, const std::vector<double>& q,
                          const std::vector<double>& inv_s,
                          const std::vector<double>& r,
                          const std::vector<std::uint8_t>& s_floored,
                          const std::vector<std::uint8_t>& r_fallback) {
    const std::size_t K = curve->u.size();
    if (q.size() != K || inv_s.size() != K || r.size() != K)
        throw ArgumentError("attach_decomposition: component length mismatch");
    curve->q = q;
    curve->inv_s = inv_s;
    curve->r = r;
    if (!s_floored.empty()) curve->s_floored = s_floored;
    if (!r_fallback.empty()) curve->r_fallback = r_fallback;
    for (std::size_t k = 0; k < K; ++k) {
        if (std::isfinite(q[k]) && std::isfinite(inv_s[k]) && std::isfinite(r[k])) {
            curve->product[k] = r[k] * inv_s[k] * q[k];
            curve->decomp_defined[k] = 1;
        } else {
            curve->product[k] = kNaN;
            curve->decomp_defined[k] = 0;
        }
    }
}

double average_over_u(const std::vector<double>& values,
                      const std::vector<std::uint8_t>& defined,
                      const BinGrid& grid, double max_undefined_frac) {
    if (values.size() != grid.K || defined.size() != grid.K)
        throw ArgumentError("average_over_u: length mismatch with grid");
    double num = 0.0, den = 0.0;
    std::size_t missing = 0;
    for (std::size_t k = 0; k < grid.K; ++k) {
        const double width = grid.edges[k + 1] - grid.edges[k];
        if (defined[k] && std::isfinite(values[k])) {
            num += width * values[k];
            den += width;
        } else {
            ++missing;
        }
    }
    if (den == 0.0 ||
        static_cast<double>(missing) > max_undefined_frac * static_cast<double>(grid.K))
        throw EstimationError("average_over_u: too many undefined grid points");
    return num / den;
}

OverallEffects overall_effects(const EffectCurve& curve, const BinGrid& grid,
                               double max_undefined_frac) {
    OverallEffects out;
    out.nie = average_over_u(curve.nie, curve.effect_defined, grid, max_undefined_frac);
    out.ace = average_over_u(curve.ace, curve.effect_defined, grid, max_undefined_frac);
    out.nde = out.ace - out.nie;
    return out;
}

namespace {

// Weighted mean over the profiles where this particular field is finite, so
// one profile's undefined component does not discard another field's value.
void weighted_field(std::vector<double> EffectCurve::*field,
                    const std::vector<EffectCurve>& curves,
                    const std::vector<double>& weights, EffectCurve* out) {
    const std::size_t K = out->u.size();
    for (std::size_t k = 0; k < K; ++k) {
        double num = 0.0, den = 0.0;
        for (std::size_t p = 0; p < curves.size(); ++p) {
            const double v = (curves[p].*field)[k];
            if (!std::isfinite(v)) continue;
            num += weights[p] * v;
            den += weights[p];
        }
        (out->*field)[k] = (den > 0.0) ? num / den : kNaN;
    }
}

} // namespace

EffectCurve integrate_over_profiles(const std::vector<EffectCurve>& curves,
                                    const std::vector<double>& weights) {
    if (curves.empty() || curves.size() != weights.size())
        throw ArgumentError("integrate_over_profiles: curve/weight count mismatch");
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) throw ArgumentError("integrate_over_profiles: negative weight");
        total += w;
    }
    if (!(total > 0.0)) throw ArgumentError("integrate_over_profiles: zero total weight");
    for (const auto& c : curves)
        if (c.u != curves.front().u)
            throw ArgumentError("integrate_over_profiles: grids differ");

    EffectCurve out;
    const std::size_t K = curves.front().u.size();
    out.u = curves.front().u;
    out.x_for_nie = curves.front().x_for_nie;
    out.x_star_for_nde = curves.front().x_star_for_nde;
    out.nie.assign(K, kNaN);
    out.nde.assign(K, kNaN);
    out.ace.assign(K, kNaN);
    out.q.assign(K, kNaN);
    out.inv_s.assign(K, kNaN);
    out.r.assign(K, kNaN);
    out.product.assign(K, kNaN);
    out.effect_defined.assign(K, 0);
    out.decomp_defined.assign(K, 0);
    out.s_floored.assign(K, 0);
    out.r_fallback.assign(K, 0);

    weighted_field(&EffectCurve::nie, curves, weights, &out);
    weighted_field(&EffectCurve::ace, curves, weights, &out);
    // nie and ace share their defined set within each profile, so the merged
    // pair is finite on the same bins; recompute nde to restore additivity
    // exactly.
    for (std::size_t k = 0; k < K; ++k) {
        out.effect_defined[k] =
            std::isfinite(out.nie[k]) && std::isfinite(out.ace[k]);
        out.nde[k] = out.effect_defined[k] ? out.ace[k] - out.nie[k] : kNaN;
    }
    weighted_field(&EffectCurve::q, curves, weights, &out);
    weighted_field(&EffectCurve::inv_s, curves, weights, &out);
    weighted_field(&EffectCurve::r, curves, weights, &out);
    // the product merges over profiles where the whole decomposition exists
    weighted_field(&EffectCurve::product, curves, weights, &out);
    for (std::size_t k = 0; k < K; ++k)
        out.decomp_defined[k] = std::isfinite(out.product[k]);
    for (std::size_t p = 0; p < curves.size(); ++p)
        for (std::size_t k = 0; k < K; ++k) {
            out.s_floored[k] |= curves[p].s_floored[k];
            out.r_fallback[k] |= curves[p].r_fallback[k];
        }
    return out;
}

} // namespace qmed
