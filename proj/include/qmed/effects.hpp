// u-specific total/direct/indirect effects, the three-factor decomposition
// of the indirect effect, and quadrature averages over u.
#pragma once

#include "qmed/outcome.hpp"

#include <cstdint>
#include <vector>

namespace qmed {

struct EffectCurve {
    std::vector<double> u;       // bin midpoints
    std::vector<double> nie, nde, ace;
    std::vector<double> q, inv_s, r, product;
    std::vector<std::uint8_t> effect_defined; // nie/nde/ace finite at this u
    std::vector<std::uint8_t> decomp_defined; // q, 1/s, r all finite
    int x_for_nie = 1;
    int x_star_for_nde = 0;
    // per-u metadata flags
    std::vector<std::uint8_t> s_floored;
    std::vector<std::uint8_t> r_fallback;
};

// nie(u) = R(x,1,u) - R(x,0,u); ace(u) = R(1,1,u) - R(0,0,u);
// nde(u) = ace(u) - nie(u).  Curves must share the binning; rates at the
// midpoints are read through the interpolator so isolated empty bins borrow
// from their neighbors.  x_for_nie selects x; x* for the NDE is 1 - x.
EffectCurve u_specific_effects(const RateCurve& r00, const RateCurve& r11,
                               const RateCurve& rx1, const RateCurve& rx0,
                               int x_for_nie, InterpMode interp);

// Attach the decomposition product(u) = r(u) * inv_s(u) * q(u) to the curve;
// entries where any component is NaN stay undefined.
void attach_decomposition(EffectCurve* curve, const std::vector<double>& q,
                          const std::vector<double>& inv_s,
                          const std::vector<double>& r,
                          const std::vector<std::uint8_t>& s_floored,
                          const std::vector<std::uint8_t>& r_fallback);

// Midpoint-rule average over u weighted by bin widths, renormalized over the
// defined entries.  More than max_undefined_frac undefined -> estimation
// error.  `values` and `defined` align with the grid midpoints.
double average_over_u(const std::vector<double>& values,
                      const std::vector<std::uint8_t>& defined,
                      const BinGrid& grid, double max_undefined_frac = 0.5);

struct OverallEffects {
    double nie = 0.0, nde = 0.0, ace = 0.0;
};
// Averages of the three effect curves on their common defined set; satisfies
// ace = nie + nde exactly.
OverallEffects overall_effects(const EffectCurve& curve, const BinGrid& grid,
                               double max_undefined_frac = 0.5);

// Weighted average of per-profile curves with weights equal to the profile
// frequencies; per-u fields renormalize over the profiles where they are
// defined.  Grids must match.
EffectCurve integrate_over_profiles(const std::vector<EffectCurve>& curves,
                                    const std::vector<double>& weights);

} // namespace qmed
