// Quantile-bin classification of observations under a reference exposure
// ranking, per-bin outcome rates, interpolated rate curves, and the central
// difference sensitivity r.
#pragma once

#include "qmed/data.hpp"
#include "qmed/mediator.hpp"

#include <cstdint>
#include <vector>

namespace qmed {

struct BinGrid {
    std::size_t K = 0;
    std::vector<double> edges;     // K+1 values, 0 = edges[0] < ... < edges[K] = 1
    std::vector<double> midpoints; // (edges[k] + edges[k+1]) / 2

    static BinGrid uniform(std::size_t K);
};

enum class BinAssignMode {
    residual, // nearest predicted bin-midpoint quantile, ties toward lower bin
    cdf       // classify the rank transform into (u_{k-1}, u_k]
};

struct QuantileBinning {
    BinGrid grid;
    int x_star = 0;
    std::vector<std::uint32_t> assignment; // per-row bin index in [0, K)
    bool sparse_warning = false; // K exceeds distinct mediator values in an arm
    std::size_t ranks_clamped = 0; // cdf mode: mediators outside the curve range
};

// Assign every row to a bin using the mediator model's curves at the
// reference arm x_star.  row_profile gives each row's covariate profile
// index within the model.
QuantileBinning assign_bins(const MicrodataTable& table, const MediatorModel& model,
                            int x_star, const BinGrid& grid, BinAssignMode mode,
                            const std::vector<std::uint32_t>& row_profile);

struct RateCurve {
    int x = 0, x_star = 0;
    double rate_scale = 1.0; // display multiplier only; `rate` stays raw
    std::vector<double> u_mid;
    std::vector<double> n_at_risk; // weighted counts, exact integers for integer weights
    std::vector<double> events;    // weighted outcome totals
    std::vector<double> rate;      // events / n_at_risk; NaN when the bin is empty
    std::vector<std::uint8_t> defined;

    std::size_t n_defined() const;
};

// Aggregate rates over rows with exposure == x, restricted to rows whose
// profile index equals `profile` (pass negative to use all rows).  Weights
// may be empty (unit).  All bins empty -> degenerate-arm estimation error.
RateCurve rate_curve(const MicrodataTable& table, const std::vector<double>& weights,
                     const QuantileBinning& binning, int x,
                     const std::vector<std::uint32_t>& row_profile, int profile,
                     double rate_scale = 1.0);

enum class InterpMode { linear, spline };

// Interpolated rate R~(u) over the defined knots; NaN outside the defined
// span or when fewer than one knot is defined.
double interp_rate(const RateCurve& curve, double u, InterpMode mode);

// Central difference [R~(u+delta) - R~(u-delta)] / (2 delta).  u +/- delta
// outside the defined knot span is an argument error; callers truncate
// delta first (see truncate_delta).
double sensitivity_r(const RateCurve& curve, double u, double delta, InterpMode mode);

// Largest usable delta at u: min(delta, u - first defined knot, last defined
// knot - u).  Returns 0 when u is outside the span or pinned to an endpoint.
double truncate_delta(const RateCurve& curve, double u, double delta);

// Arm-size weighted average of the two reference-arm sensitivities.  NaN
// entries fall back to the defined arm with a flag; both NaN -> NaN.
struct PooledValue {
    double value = 0.0;
    bool fallback = false;
};
PooledValue pool_arms(double v0, double v1, double n0, double n1);

} // namespace qmed
