#include "qmed/outcome.hpp"
#include "qmed/errors.hpp"
#include "qmed/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace qmed {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

BinGrid BinGrid::uniform(std::size_t K) {
    if (K < 2) throw ArgumentError("BinGrid: need K >= 2");
    BinGrid g;
    g.K = K;
    g.edges.resize(K + 1);
    g.midpoints.resize(K);
    for (std::size_t k = 0; k <= K; ++k)
        g.edges[k] = static_cast<double>(k) / static_cast<double>(K);
    for (std::size_t k = 0; k < K; ++k)
        g.midpoints[k] = (static_cast<double>(k) + 0.5) / static_cast<double>(K);
    return g;
}

QuantileBinning assign_bins(const MicrodataTable& table, const MediatorModel& model,
                            int x_star, const BinGrid& grid, BinAssignMode mode,
                            const std::vector<std::uint32_t>& row_profile) {
    if (grid.K < 2) throw ArgumentError("assign_bins: need K >= 2");
    if (row_profile.size() != table.size())
        throw ArgumentError("assign_bins: row_profile length mismatch");

    QuantileBinning out;
    out.grid = grid;
    out.x_star = x_star;
    out.assignment.resize(table.size());

    // Predicted quantiles at every bin midpoint, per profile.  The curves are
    // nondecreasing in u (monotone copies back the rank machinery), so the
    // nearest-midpoint search can use bisection.
    const std::size_t P = model.n_profiles();
    std::vector<std::vector<double>> mid_curve(P, std::vector<double>(grid.K));
    std::vector<char> curve_sorted(P, 1);
    for (std::size_t p = 0; p < P; ++p) {
        for (std::size_t k = 0; k < grid.K; ++k)
            mid_curve[p][k] = model.conditional_quantile(grid.midpoints[k], x_star, p);
        curve_sorted[p] = std::is_sorted(mid_curve[p].begin(), mid_curve[p].end());
    }

    for (std::size_t i = 0; i < table.size(); ++i) {
        const std::uint32_t p = row_profile[i];
        if (p >= P) throw ArgumentError("assign_bins: profile index out of range");
        if (mode == BinAssignMode::residual) {
            const auto& c = mid_curve[p];
            const double m = table.mediator(i);
            std::size_t k;
            if (curve_sorted[p]) {
                const auto it = std::lower_bound(c.begin(), c.end(), m);
                if (it == c.begin()) {
                    k = 0;
                } else if (it == c.end()) {
                    k = grid.K - 1;
                } else {
                    const std::size_t hi = static_cast<std::size_t>(it - c.begin());
                    // ties in distance resolve toward the lower bin
                    k = (c[hi] - m < m - c[hi - 1]) ? hi : hi - 1;
                }
            } else {
                k = 0;
                double best = std::fabs(m - c[0]);
                for (std::size_t j = 1; j < grid.K; ++j) {
                    const double e = std::fabs(m - c[j]);
                    if (e < best) { best = e; k = j; }
                }
            }
            out.assignment[i] = static_cast<std::uint32_t>(k);
        } else {
            bool clamped = false;
            const double u = model.rank_transform(table.mediator(i), x_star, p, &clamped);
            if (clamped) ++out.ranks_clamped;
            // bins are (e_{k}, e_{k+1}], with the leftmost closed at 0
            std::size_t k = 0;
            while (k + 1 < grid.K && u > grid.edges[k + 1]) ++k;
            out.assignment[i] = static_cast<std::uint32_t>(k);
        }
    }

    // Sparse-support warning: fewer distinct mediator values than bins in
    // either arm means some bins cannot be populated.
    std::set<double> distinct0, distinct1;
    for (std::size_t i = 0; i < table.size(); ++i)
        (table.exposure(i) == 0 ? distinct0 : distinct1).insert(table.mediator(i));
    out.sparse_warning = distinct0.size() < grid.K || distinct1.size() < grid.K;
    return out;
}

std::size_t RateCurve::n_defined() const {
    std::size_t c = 0;
    for (auto d : defined) c += d;
    return c;
}

RateCurve rate_curve(const MicrodataTable& table, const std::vector<double>& weights,
                     const QuantileBinning& binning, int x,
                     const std::vector<std::uint32_t>& row_profile, int profile,
                     double rate_scale) {
    if (binning.assignment.size() != table.size())
        throw ArgumentError("rate_curve: binning does not match table");
    if (!weights.empty() && weights.size() != table.size())
        throw ArgumentError("rate_curve: weight length mismatch");
    if (!row_profile.empty() && row_profile.size() != table.size())
        throw ArgumentError("rate_curve: row_profile length mismatch");

    const std::size_t K = binning.grid.K;
    RateCurve curve;
    curve.x = x;
    curve.x_star = binning.x_star;
    curve.rate_scale = rate_scale;
    curve.u_mid = binning.grid.midpoints;
    curve.n_at_risk.assign(K, 0.0);
    curve.events.assign(K, 0.0);
    curve.rate.assign(K, kNaN);
    curve.defined.assign(K, 0);

    for (std::size_t i = 0; i < table.size(); ++i) {
        if (table.exposure(i) != x) continue;
        if (profile >= 0 && (row_profile.empty() ||
                             row_profile[i] != static_cast<std::uint32_t>(profile)))
            continue;
        const double wi = weights.empty() ? 1.0 : weights[i];
        if (wi < 0.0) throw ArgumentError("rate_curve: negative weight");
        if (wi == 0.0) continue;
        const std::uint32_t k = binning.assignment[i];
        curve.n_at_risk[k] += wi;
        curve.events[k] += wi * table.outcome(i);
    }
    bool any = false;
    for (std::size_t k = 0; k < K; ++k) {
        if (curve.n_at_risk[k] > 0.0) {
            curve.rate[k] = curve.events[k] / curve.n_at_risk[k];
            curve.defined[k] = 1;
            any = true;
        }
    }
    if (!any)
        throw EstimationError("degenerate exposure arm: all bins empty for x=" +
                              std::to_string(x));
    return curve;
}

namespace {

void defined_knots(const RateCurve& curve, std::vector<double>* u,
                   std::vector<double>* r) {
    for (std::size_t k = 0; k < curve.u_mid.size(); ++k) {
        if (curve.defined[k]) {
            u->push_back(curve.u_mid[k]);
            r->push_back(curve.rate[k]);
        }
    }
}

// Natural cubic spline through (x, y); evaluates inside [x.front(), x.back()].
class NaturalSpline {
public:
    NaturalSpline(std::vector<double> x, std::vector<double> y)
        : x_(std::move(x)), y_(std::move(y)) {
        const std::size_t n = x_.size();
        m_.assign(n, 0.0);
        if (n < 3) return;
        std::vector<double> a(n, 0.0), b(n, 0.0), c(n, 0.0), d(n, 0.0);
        b[0] = 1.0;
        b[n - 1] = 1.0;
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double h0 = x_[i] - x_[i - 1];
            const double h1 = x_[i + 1] - x_[i];
            a[i] = h0 / 6.0;
            b[i] = (h0 + h1) / 3.0;
            c[i] = h1 / 6.0;
            d[i] = (y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0;
        }
        // Thomas algorithm
        for (std::size_t i = 1; i < n; ++i) {
            const double w = a[i] / b[i - 1];
            b[i] -= w * c[i - 1];
            d[i] -= w * d[i - 1];
        }
        m_[n - 1] = d[n - 1] / b[n - 1];
        for (std::size_t i = n - 1; i-- > 0;)
            m_[i] = (d[i] - c[i] * m_[i + 1]) / b[i];
    }

    double operator()(double q) const {
        const std::size_t n = x_.size();
        if (n == 1) return y_[0];
        auto it = std::upper_bound(x_.begin(), x_.end(), q);
        std::size_t hi = (it == x_.end()) ? n - 1 : static_cast<std::size_t>(it - x_.begin());
        if (hi == 0) hi = 1;
        const std::size_t lo = hi - 1;
        const double h = x_[hi] - x_[lo];
        const double A = (x_[hi] - q) / h;
        const double B = (q - x_[lo]) / h;
        return A * y_[lo] + B * y_[hi] +
               ((A * A * A - A) * m_[lo] + (B * B * B - B) * m_[hi]) * h * h / 6.0;
    }

private:
    std::vector<double> x_, y_, m_;
};

} // namespace

double interp_rate(const RateCurve& curve, double u, InterpMode mode) {
    std::vector<double> uk, rk;
    defined_knots(curve, &uk, &rk);
    if (uk.empty()) return kNaN;
    if (u < uk.front() || u > uk.back()) return kNaN;
    if (mode == InterpMode::spline && uk.size() >= 3)
        return NaturalSpline(uk, rk)(u);
    return interp_linear(uk, rk, u);
}

double sensitivity_r(const RateCurve& curve, double u, double delta, InterpMode mode) {
    if (!(delta > 0.0)) throw ArgumentError("sensitivity_r: need delta > 0");
    std::vector<double> uk, rk;
    defined_knots(curve, &uk, &rk);
    if (uk.size() < 2)
        throw ArgumentError("sensitivity_r: fewer than two defined knots");
    if (u - delta < uk.front() || u + delta > uk.back())
        throw ArgumentError("sensitivity_r: u +/- delta outside the rate curve span");
    double hi, lo;
    if (mode == InterpMode::spline && uk.size() >= 3) {
        NaturalSpline sp(uk, rk);
        hi = sp(u + delta);
        lo = sp(u - delta);
    } else {
        hi = interp_linear(uk, rk, u + delta);
        lo = interp_linear(uk, rk, u - delta);
    }
    return (hi - lo) / (2.0 * delta);
}

double truncate_delta(const RateCurve& curve, double u, double delta) {
    std::vector<double> uk, rk;
    defined_knots(curve, &uk, &rk);
    if (uk.size() < 2) return 0.0;
    if (u < uk.front() || u > uk.back()) return 0.0;
    return std::min({delta, u - uk.front(), uk.back() - u});
}

PooledValue pool_arms(double v0, double v1, double n0, double n1) {
    if (!(n0 >= 0.0 && n1 >= 0.0 && n0 + n1 > 0.0))
        throw ArgumentError("pool_arms: bad arm sizes");
    PooledValue out;
    const bool ok0 = std::isfinite(v0), ok1 = std::isfinite(v1);
    if (ok0 && ok1) {
        out.value = (n0 * v0 + n1 * v1) / (n0 + n1);
    } else if (ok0) {
        out.value = v0;
        out.fallback = true;
    } else if (ok1) {
        out.value = v1;
        out.fallback = true;
    } else {
        out.value = kNaN;
        out.fallback = true;
    }
    return out;
}

} // namespace qmed
