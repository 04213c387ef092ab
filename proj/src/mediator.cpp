#include "qmed/mediator.hpp"
#include "qmed/errors.hpp"
#include "qmed/stats.hpp"

#include <algorithm>
#include <cmath>

namespace qmed {

void DesignSpec::build_row(double x, const double* w, double* z) const {
    z[0] = 1.0;
    z[1] = x;
    for (std::size_t j = 0; j < n_covariates; ++j) z[2 + j] = w[j];
    for (std::size_t k = 0; k < exposure_interactions.size(); ++k) {
        const std::size_t j = exposure_interactions[k];
        if (j >= n_covariates) throw ArgumentError("DesignSpec: interaction index out of range");
        z[2 + n_covariates + k] = x * w[j];
    }
}

namespace {

void validate_levels(const std::vector<double>& levels) {
    if (levels.empty()) throw ArgumentError("MediatorModel: empty level grid");
    for (std::size_t g = 0; g < levels.size(); ++g) {
        if (!(levels[g] > 0.0 && levels[g] < 1.0))
            throw ArgumentError("MediatorModel: levels must lie in (0,1)");
        if (g > 0 && !(levels[g] > levels[g - 1]))
            throw ArgumentError("MediatorModel: levels must be strictly increasing");
    }
}

} // namespace

MediatorModel MediatorModel::sample_backend(const MicrodataTable& table,
                                            const std::vector<double>& weights,
                                            std::vector<double> levels) {
    validate_levels(levels);
    if (table.n_covariates() != 0)
        throw ArgumentError("sample backend requires a covariate-free table");
    if (!weights.empty() && weights.size() != table.size())
        throw ArgumentError("MediatorModel: weight length mismatch");

    std::vector<double> m0, w0, m1, w1;
    for (std::size_t i = 0; i < table.size(); ++i) {
        const double wi = weights.empty() ? 1.0 : weights[i];
        if (wi < 0.0) throw ArgumentError("MediatorModel: negative weight");
        if (wi == 0.0) continue;
        if (table.exposure(i) == 0) {
            m0.push_back(table.mediator(i));
            w0.push_back(wi);
        } else {
            m1.push_back(table.mediator(i));
            w1.push_back(wi);
        }
    }
    if (m0.empty() || m1.empty())
        throw EstimationError("an exposure arm has no weighted rows");

    MediatorModel model;
    model.levels_ = std::move(levels);
    model.profiles_ = {CovariateProfile{{}, 0.0}};
    double total = 0.0;
    for (double v : w0) total += v;
    for (double v : w1) total += v;
    model.profiles_[0].weight = total;
    model.raw_.assign(2, std::vector<std::vector<double>>(1));
    model.raw_[0][0] = sample_quantile_curve(m0, w0, model.levels_);
    model.raw_[1][0] = sample_quantile_curve(m1, w1, model.levels_);
    model.sample_backend_ = true;
    model.design_.n_covariates = 0;
    model.finalize_curves(true);
    return model;
}

MediatorModel MediatorModel::linear_backend(const MicrodataTable& table,
                                            const std::vector<double>& weights,
                                            const DesignSpec& design,
                                            std::vector<double> levels,
                                            bool rearrange) {
    validate_levels(levels);
    if (design.n_covariates != table.n_covariates())
        throw ArgumentError("DesignSpec covariate count does not match the table");
    if (!weights.empty() && weights.size() != table.size())
        throw ArgumentError("MediatorModel: weight length mismatch");

    const std::size_t n = table.size();
    const std::size_t d = design.dimension();
    std::vector<double> Z(n * d), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        design.build_row(table.exposure(i), table.covariate_row(i), &Z[i * d]);
        y[i] = table.mediator(i);
    }

    MediatorModel model;
    model.levels_ = std::move(levels);
    model.profiles_ = distinct_profiles(table, weights);
    model.design_ = design;
    model.path_ = fit_quantile_path(Z, n, d, y, weights, model.levels_);

    model.raw_.assign(2, std::vector<std::vector<double>>(model.profiles_.size()));
    std::vector<double> z(d);
    for (int x = 0; x <= 1; ++x) {
        for (std::size_t k = 0; k < model.profiles_.size(); ++k) {
            auto& curve = model.raw_[static_cast<std::size_t>(x)][k];
            curve.resize(model.levels_.size());
            design.build_row(x, model.profiles_[k].values.data(), z.data());
            for (std::size_t g = 0; g < model.levels_.size(); ++g)
                curve[g] = model.path_->predict_at(g, z);
        }
    }
    model.finalize_curves(rearrange);
    return model;
}

void MediatorModel::finalize_curves(bool serve_rearranged) {
    serve_rearranged_ = serve_rearranged;
    mono_.assign(2, std::vector<std::vector<double>>(profiles_.size()));
    for (int x = 0; x <= 1; ++x) {
        for (std::size_t k = 0; k < profiles_.size(); ++k) {
            const auto& raw = raw_[static_cast<std::size_t>(x)][k];
            auto mono = rearrange_nondecreasing(raw);
            if (mono != raw) any_rearranged_ = true;
            mono_[static_cast<std::size_t>(x)][k] = std::move(mono);
        }
    }
}

const std::vector<double>& MediatorModel::eval_curve(int x, std::size_t profile) const {
    if (x != 0 && x != 1) throw ArgumentError("MediatorModel: exposure must be 0 or 1");
    if (profile >= profiles_.size()) throw ArgumentError("MediatorModel: profile index out of range");
    const auto& bank = serve_rearranged_ ? mono_ : raw_;
    return bank[static_cast<std::size_t>(x)][profile];
}

double MediatorModel::conditional_quantile(double u, int x, std::size_t profile) const {
    return interp_linear(levels_, eval_curve(x, profile), u);
}

double MediatorModel::rank_transform(double m, int x, std::size_t profile,
                                     bool* clamped) const {
    if (x != 0 && x != 1) throw ArgumentError("MediatorModel: exposure must be 0 or 1");
    if (profile >= profiles_.size()) throw ArgumentError("MediatorModel: profile index out of range");
    const auto& curve = mono_[static_cast<std::size_t>(x)][profile];
    if (clamped) *clamped = false;
    if (m < curve.front()) {
        if (clamped) *clamped = true;
        return levels_.front();
    }
    if (m >= curve.back()) {
        if (clamped) *clamped = true;
        return levels_.back();
    }
    // Largest g with curve[g] <= m; ties resolve to the last equal entry.
    const auto it = std::upper_bound(curve.begin(), curve.end(), m);
    const std::size_t g = static_cast<std::size_t>(it - curve.begin()) - 1;
    const double lo = curve[g], hi = curve[g + 1];
    const double t = (m - lo) / (hi - lo);
    return levels_[g] + t * (levels_[g + 1] - levels_[g]);
}

double MediatorModel::quantile_effect(double u, std::size_t profile) const {
    if (profile >= profiles_.size()) throw ArgumentError("MediatorModel: profile index out of range");
    if (sample_backend_) {
        const double q0 = interp_linear(levels_, raw_[0][0], u);
        const double q1 = interp_linear(levels_, raw_[1][0], u);
        return q1 - q0;
    }
    const auto c = path_->coef_at(u);
    double q = c[1];
    const auto& w = profiles_[profile].values;
    for (std::size_t k = 0; k < design_.exposure_interactions.size(); ++k)
        q += w[design_.exposure_interactions[k]] * c[2 + design_.n_covariates + k];
    return q;
}

const QuantileFit& MediatorModel::coefficient_path() const {
    if (!path_) throw ArgumentError("sample backend has no coefficient path");
    return *path_;
}

} // namespace qmed
