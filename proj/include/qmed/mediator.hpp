// Conditional quantile model of the mediator given exposure and covariates.
//
// Two interchangeable backends produce the same evaluated object:
//  - sample backend: per-arm type-1 weighted sample quantiles (no covariates);
//  - linear backend: quantile regression on [1, x, w, x*w_subset] over a grid
//    of levels, optionally rearranged to be nondecreasing in u.
//
// Rank transforms and bin assignment always use a monotone copy of each
// curve, so they are well defined even when the raw fit crosses.
#pragma once

#include "qmed/data.hpp"
#include "qmed/quantreg.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace qmed {

struct DesignSpec {
    std::size_t n_covariates = 0;
    // Covariate indices whose exposure interaction x*w_j enters the design.
    std::vector<std::size_t> exposure_interactions;

    std::size_t dimension() const { return 2 + n_covariates + exposure_interactions.size(); }
    // z = [1, x, w_0..w_{p-1}, x*w_j ...]
    void build_row(double x, const double* w, double* z) const;
};

class MediatorModel {
public:
    // Sample-quantile backend on a covariate-free table.
    static MediatorModel sample_backend(const MicrodataTable& table,
                                        const std::vector<double>& weights,
                                        std::vector<double> levels);

    // Linear quantile-regression backend; curves are evaluated per exposure
    // arm and covariate profile.
    static MediatorModel linear_backend(const MicrodataTable& table,
                                        const std::vector<double>& weights,
                                        const DesignSpec& design,
                                        std::vector<double> levels,
                                        bool rearrange);

    const std::vector<double>& levels() const { return levels_; }
    std::size_t n_profiles() const { return profiles_.size(); }
    const std::vector<CovariateProfile>& profiles() const { return profiles_; }

    // Fitted conditional quantile, linearly interpolated between levels.
    // u outside [levels.front(), levels.back()] is an argument error.
    double conditional_quantile(double u, int x, std::size_t profile) const;

    // Largest grid level whose curve value is <= m, linearly interpolated
    // between adjacent levels; values outside the curve range are clamped to
    // the boundary level and flagged.
    double rank_transform(double m, int x, std::size_t profile,
                          bool* clamped = nullptr) const;

    // q(u; w) = beta1(u) + sum_j w_j gamma_j(u) from the coefficient path
    // (for the sample backend this equals the difference of the arm curves).
    double quantile_effect(double u, std::size_t profile) const;

    // True if rearrangement changed at least one curve.
    bool any_rearranged() const { return any_rearranged_; }

    const QuantileFit& coefficient_path() const;

private:
    MediatorModel() = default;
    void finalize_curves(bool serve_rearranged);
    const std::vector<double>& eval_curve(int x, std::size_t profile) const;

    std::vector<double> levels_;
    std::vector<CovariateProfile> profiles_;
    // curve[x][profile][level]
    std::vector<std::vector<std::vector<double>>> raw_, mono_;
    std::optional<QuantileFit> path_;
    DesignSpec design_;
    bool serve_rearranged_ = true;
    bool any_rearranged_ = false;
    bool sample_backend_ = false;
};

} // namespace qmed
