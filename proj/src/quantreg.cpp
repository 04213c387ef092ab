#include "qmed/quantreg.hpp"
#include "qmed/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace qmed {

double check_loss(double r, double u) {
    return r * (u - (r < 0.0 ? 1.0 : 0.0));
}

double check_loss_objective(const std::vector<double>& Z, std::size_t n, std::size_t d,
                            const std::vector<double>& y, const std::vector<double>& w,
                            const std::vector<double>& beta, double u) {
    if (beta.size() != d) throw ArgumentError("check_loss_objective: beta has wrong length");
    double sum = 0.0, comp = 0.0; // Kahan accumulation
    for (std::size_t i = 0; i < n; ++i) {
        double pred = 0.0;
        for (std::size_t j = 0; j < d; ++j) pred += Z[i * d + j] * beta[j];
        const double wi = w.empty() ? 1.0 : w[i];
        const double term = wi * check_loss(y[i] - pred, u);
        const double t = sum + term;
        comp += (std::fabs(sum) >= std::fabs(term)) ? (sum - t) + term : (term - t) + sum;
        sum = t;
    }
    return sum + comp;
}

namespace {

struct Problem {
    const std::vector<double>& Z;
    std::size_t n, d;
    const std::vector<double>& y;
    const std::vector<double>& w;
    double u;
    std::vector<std::size_t> active; // rows with positive weight
    double total_weight = 0.0;

    double weight(std::size_t i) const { return w.empty() ? 1.0 : w[i]; }
    double zval(std::size_t i, std::size_t j) const { return Z[i * d + j]; }
};

struct Vertex {
    std::vector<std::size_t> basis;       // d row indices
    Eigen::MatrixXd inv_basis;            // Z_h^{-1}
    std::vector<double> beta;
    std::vector<double> resid;            // per active-list position
    std::vector<double> edge;             // a_i = z_i . eta_j for current direction
};

// Rebuild beta, Z_h^{-1} and residuals from the basis rows.  Returns false if
// the basis matrix is numerically singular.
bool refresh_vertex(const Problem& p, Vertex* v) {
    const std::size_t d = p.d;
    Eigen::MatrixXd Zh(d, d);
    Eigen::VectorXd yh(d);
    for (std::size_t k = 0; k < d; ++k) {
        for (std::size_t j = 0; j < d; ++j) Zh(k, j) = p.zval(v->basis[k], j);
        yh(k) = p.y[v->basis[k]];
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(Zh);
    lu.setThreshold(1e-12);
    if (!lu.isInvertible()) return false;
    v->inv_basis = lu.inverse();
    Eigen::VectorXd b = lu.solve(yh);
    v->beta.assign(b.data(), b.data() + d);
    v->resid.resize(p.active.size());
    for (std::size_t a = 0; a < p.active.size(); ++a) {
        const std::size_t i = p.active[a];
        double pred = 0.0, scale = std::fabs(p.y[i]);
        for (std::size_t j = 0; j < d; ++j) {
            const double term = p.zval(i, j) * v->beta[j];
            pred += term;
            scale += std::fabs(term);
        }
        double r = p.y[i] - pred;
        // Rows duplicating a basis row must count as interpolated: an O(eps)
        // leftover here masks their kink, fakes a descent direction, and the
        // walk then cycles between copies of the same geometric vertex.
        if (std::fabs(r) <= 1e-12 * scale) r = 0.0;
        v->resid[a] = r;
    }
    for (std::size_t k = 0; k < d; ++k) {
        auto it = std::find(p.active.begin(), p.active.end(), v->basis[k]);
        v->resid[static_cast<std::size_t>(it - p.active.begin())] = 0.0;
    }
    return true;
}

// Fill v->edge with z_i . eta for eta = column j of Z_h^{-1}.
void edge_direction(const Problem& p, Vertex* v, std::size_t j) {
    v->edge.resize(p.active.size());
    for (std::size_t a = 0; a < p.active.size(); ++a) {
        const std::size_t i = p.active[a];
        double dot = 0.0;
        for (std::size_t k = 0; k < p.d; ++k)
            dot += p.zval(i, k) * v->inv_basis(k, j);
        v->edge[a] = dot;
    }
}

// One-sided directional derivatives of the objective along +eta and -eta.
// Zero-residual rows contribute their one-sided kink terms, which makes the
// test exact at degenerate vertices.
void directional_derivatives(const Problem& p, const Vertex& v,
                             double* d_plus, double* d_minus) {
    double grad = 0.0, zero_pos = 0.0, zero_neg = 0.0;
    for (std::size_t a = 0; a < p.active.size(); ++a) {
        const double wi = p.weight(p.active[a]);
        const double ai = v.edge[a];
        const double r = v.resid[a];
        if (r > 0.0)
            grad += wi * p.u * ai;
        else if (r < 0.0)
            grad += wi * (p.u - 1.0) * ai;
        else if (ai > 0.0)
            zero_pos += wi * ai;
        else if (ai < 0.0)
            zero_neg -= wi * ai;
    }
    *d_plus = -grad + zero_pos * (1.0 - p.u) + zero_neg * p.u;
    *d_minus = grad + zero_neg * (1.0 - p.u) + zero_pos * p.u;
}

// Long-step line search along direction sign*eta (edge already evaluated).
// Walks breakpoints t_i = r_i / c_i in increasing order, adding w_i |c_i| to
// the slope at each, and returns the active-list position whose breakpoint
// turns the slope nonnegative.  first_breakpoint stops at the nearest
// breakpoint instead (used when sliding along a flat face).
std::ptrdiff_t line_search(const Problem& p, const Vertex& v, double sign,
                           double slope, bool first_breakpoint) {
    std::vector<std::pair<double, std::size_t>> steps; // (t, active position)
    for (std::size_t a = 0; a < p.active.size(); ++a) {
        const double c = sign * v.edge[a];
        const double r = v.resid[a];
        if (r == 0.0 || c == 0.0) continue;
        const double t = r / c;
        if (t > 0.0) steps.emplace_back(t, a);
    }
    if (steps.empty()) return -1;
    std::sort(steps.begin(), steps.end());
    if (first_breakpoint) return static_cast<std::ptrdiff_t>(steps.front().second);
    for (auto& [t, a] : steps) {
        slope += p.weight(p.active[a]) * std::fabs(sign * v.edge[a]);
        if (slope >= 0.0) return static_cast<std::ptrdiff_t>(a);
    }
    return -1;
}

// At a degenerate vertex (more than d interpolated rows) the d basis edges do
// not span every incident edge, so a stalled direction test is inconclusive.
// Swap one basis row for another interpolated row to view the same point from
// an untried basis; `seen` records value-keys of bases already tested so the
// exploration terminates.  Returns false once no new basis exists.
bool try_degenerate_swap(const Problem& p, Vertex* v,
                         std::vector<std::vector<double>>* seen) {
    std::vector<std::size_t> zr; // interpolated rows, by active position
    for (std::size_t a = 0; a < p.active.size(); ++a)
        if (v->resid[a] == 0.0) zr.push_back(p.active[a]);
    if (zr.size() <= p.d) return false;
    // key a basis by its sorted (z, y) rows: bases differing only through
    // duplicate rows test identical edges and collapse to one entry
    const auto value_key = [&](const std::vector<std::size_t>& basis) {
        std::vector<std::vector<double>> rows;
        for (std::size_t i : basis) {
            std::vector<double> row(p.d + 1);
            for (std::size_t j = 0; j < p.d; ++j) row[j] = p.zval(i, j);
            row[p.d] = p.y[i];
            rows.push_back(std::move(row));
        }
        std::sort(rows.begin(), rows.end());
        std::vector<double> key;
        for (auto& row : rows) key.insert(key.end(), row.begin(), row.end());
        return key;
    };
    if (seen->empty()) seen->push_back(value_key(v->basis));
    if (seen->size() > 200) return false; // combinatorial guard
    for (std::size_t j = 0; j < p.d; ++j) {
        for (std::size_t i : zr) {
            if (std::find(v->basis.begin(), v->basis.end(), i) != v->basis.end())
                continue;
            Vertex trial = *v;
            trial.basis[j] = i;
            auto key = value_key(trial.basis);
            if (std::find(seen->begin(), seen->end(), key) != seen->end()) continue;
            seen->push_back(std::move(key));
            if (!refresh_vertex(p, &trial)) continue;
            *v = std::move(trial);
            return true;
        }
    }
    return false;
}

std::vector<std::size_t> initial_basis(const Problem& p) {
    Eigen::MatrixXd Zt(p.d, p.active.size());
    for (std::size_t a = 0; a < p.active.size(); ++a)
        for (std::size_t j = 0; j < p.d; ++j)
            Zt(j, a) = p.zval(p.active[a], j);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Zt);
    qr.setThreshold(1e-10);
    if (static_cast<std::size_t>(qr.rank()) < p.d)
        throw EstimationError("design matrix is rank deficient on rows with positive weight");
    std::vector<std::size_t> basis(p.d);
    const auto& perm = qr.colsPermutation().indices();
    for (std::size_t k = 0; k < p.d; ++k)
        basis[k] = p.active[static_cast<std::size_t>(perm(static_cast<Eigen::Index>(k)))];
    return basis;
}

double objective_of(const Problem& p, const std::vector<double>& beta) {
    return check_loss_objective(p.Z, p.n, p.d, p.y, p.w, beta, p.u);
}

} // namespace

CheckLossFit fit_check_loss(const std::vector<double>& Z, std::size_t n, std::size_t d,
                            const std::vector<double>& y,
                            const std::vector<double>& w, double u,
                            const std::vector<std::size_t>* warm_basis) {
    if (d == 0) throw ArgumentError("fit_check_loss: zero-dimensional design");
    if (Z.size() != n * d) throw ArgumentError("fit_check_loss: design size mismatch");
    if (y.size() != n) throw ArgumentError("fit_check_loss: response size mismatch");
    if (!w.empty() && w.size() != n) throw ArgumentError("fit_check_loss: weight size mismatch");
    if (!(u > 0.0 && u < 1.0)) throw ArgumentError("fit_check_loss: u must lie in (0,1)");

    Problem p{Z, n, d, y, w, u, {}, 0.0};
    for (std::size_t i = 0; i < n; ++i) {
        const double wi = p.weight(i);
        if (wi < 0.0) throw ArgumentError("fit_check_loss: negative weight");
        if (wi > 0.0) {
            p.active.push_back(i);
            p.total_weight += wi;
        }
    }
    if (p.active.size() < d)
        throw EstimationError("fewer weighted rows than design dimension");

    Vertex v;
    bool warmed = false;
    if (warm_basis && warm_basis->size() == d) {
        v.basis = *warm_basis;
        bool usable = true;
        for (std::size_t i : v.basis)
            usable = usable && i < n && p.weight(i) > 0.0;
        if (usable) {
            auto sorted = v.basis;
            std::sort(sorted.begin(), sorted.end());
            usable = std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end();
        }
        warmed = usable && refresh_vertex(p, &v);
    }
    if (!warmed) {
        v.basis = initial_basis(p);
        if (!refresh_vertex(p, &v))
            throw EstimationError("design matrix is rank deficient on rows with positive weight");
    }

    const double tol = 1e-11 * std::max(1.0, p.total_weight);
    const int max_pivots = 200 + 40 * static_cast<int>(n);
    int pivots = 0;
    std::vector<std::vector<double>> stall_seen;

    while (true) {
        double best = -tol;
        std::size_t best_j = 0;
        double best_sign = 1.0;
        std::vector<double> best_edge;
        for (std::size_t j = 0; j < d; ++j) {
            edge_direction(p, &v, j);
            double dp, dm;
            directional_derivatives(p, v, &dp, &dm);
            if (dp < best) { best = dp; best_j = j; best_sign = 1.0; best_edge = v.edge; }
            if (dm < best) { best = dm; best_j = j; best_sign = -1.0; best_edge = v.edge; }
        }
        if (best >= -tol) {
            // this basis sees no descent, but a degenerate vertex has edges
            // only visible from its other bases
            if (try_degenerate_swap(p, &v, &stall_seen)) continue;
            break;
        }
        stall_seen.clear();
        if (++pivots > max_pivots)
            throw EstimationError("vertex walk failed to converge");
        v.edge = best_edge;
        const std::ptrdiff_t enter = line_search(p, v, best_sign, best, false);
        if (enter < 0)
            throw EstimationError("objective is unbounded along a descent edge");
        v.basis[best_j] = p.active[static_cast<std::size_t>(enter)];
        if (!refresh_vertex(p, &v))
            throw EstimationError("singular basis after pivot");
    }

    // Polish: among tied optima, walk flat edges that reduce the weighted sum
    // of fitted values, stepping to the nearest vertex each time.  This pins
    // the left-continuous sample-quantile convention.
    std::vector<double> colsum(d, 0.0);
    for (std::size_t a = 0; a < p.active.size(); ++a)
        for (std::size_t j = 0; j < d; ++j)
            colsum[j] += p.weight(p.active[a]) * p.zval(p.active[a], j);
    double obj = objective_of(p, v.beta);
    for (int polish = 0; polish < 200; ++polish) {
        double best2 = -tol;
        std::size_t best_j = 0;
        double best_sign = 1.0;
        std::vector<double> best_edge;
        bool found = false;
        for (std::size_t j = 0; j < d; ++j) {
            edge_direction(p, &v, j);
            double dp, dm;
            directional_derivatives(p, v, &dp, &dm);
            double sec = 0.0;
            for (std::size_t k = 0; k < d; ++k) sec += colsum[k] * v.inv_basis(k, j);
            if (dp <= tol && sec < best2) {
                best2 = sec; best_j = j; best_sign = 1.0; best_edge = v.edge; found = true;
            }
            if (dm <= tol && -sec < best2) {
                best2 = -sec; best_j = j; best_sign = -1.0; best_edge = v.edge; found = true;
            }
        }
        if (!found) break;
        v.edge = best_edge;
        const std::ptrdiff_t enter = line_search(p, v, best_sign, 0.0, true);
        if (enter < 0) break;
        Vertex trial = v;
        trial.basis[best_j] = p.active[static_cast<std::size_t>(enter)];
        if (!refresh_vertex(p, &trial)) break;
        const double trial_obj = objective_of(p, trial.beta);
        if (trial_obj > obj + 1e-9 * (1.0 + std::fabs(obj))) break;
        v = std::move(trial);
        obj = trial_obj;
        ++pivots;
    }

    CheckLossFit fit;
    fit.beta = v.beta;
    fit.objective = obj;
    fit.basis = v.basis;
    fit.pivots = pivots;
    return fit;
}

QuantileFit::QuantileFit(std::vector<double> u_grid, std::vector<std::vector<double>> coef)
    : u_(std::move(u_grid)), coef_(std::move(coef)) {
    if (u_.empty() || u_.size() != coef_.size())
        throw ArgumentError("QuantileFit: grid/coefficient size mismatch");
    for (std::size_t g = 0; g + 1 < u_.size(); ++g)
        if (!(u_[g] < u_[g + 1]))
            throw ArgumentError("QuantileFit: levels must be strictly increasing");
    for (const auto& c : coef_)
        if (c.size() != coef_.front().size())
            throw ArgumentError("QuantileFit: ragged coefficients");
}

std::vector<double> QuantileFit::coef_at(double u) const {
    if (u < u_.front() || u > u_.back())
        throw ArgumentError("QuantileFit: level outside fitted range");
    auto it = std::upper_bound(u_.begin(), u_.end(), u);
    std::size_t hi = (it == u_.end()) ? u_.size() - 1 : static_cast<std::size_t>(it - u_.begin());
    if (hi == 0) return coef_.front();
    const std::size_t lo = hi - 1;
    const double t = (u - u_[lo]) / (u_[hi] - u_[lo]);
    std::vector<double> out(dimension());
    for (std::size_t j = 0; j < out.size(); ++j)
        out[j] = coef_[lo][j] + t * (coef_[hi][j] - coef_[lo][j]);
    return out;
}

double QuantileFit::predict(double u, const std::vector<double>& z) const {
    const auto c = coef_at(u);
    if (z.size() != c.size()) throw ArgumentError("QuantileFit: regressor length mismatch");
    double out = 0.0;
    for (std::size_t j = 0; j < c.size(); ++j) out += c[j] * z[j];
    return out;
}

double QuantileFit::predict_at(std::size_t g, const std::vector<double>& z) const {
    const auto& c = coef_[g];
    if (z.size() != c.size()) throw ArgumentError("QuantileFit: regressor length mismatch");
    double out = 0.0;
    for (std::size_t j = 0; j < c.size(); ++j) out += c[j] * z[j];
    return out;
}

QuantileFit fit_quantile_path(const std::vector<double>& Z, std::size_t n, std::size_t d,
                              const std::vector<double>& y,
                              const std::vector<double>& w,
                              const std::vector<double>& u_grid) {
    if (u_grid.empty()) throw ArgumentError("fit_quantile_path: empty grid");
    std::vector<std::vector<double>> coef;
    coef.reserve(u_grid.size());
    std::vector<std::size_t> warm;
    for (double u : u_grid) {
        const auto fit = fit_check_loss(Z, n, d, y, w, u, warm.empty() ? nullptr : &warm);
        warm = fit.basis;
        coef.push_back(fit.beta);
    }
    return QuantileFit(std::vector<double>(u_grid), std::move(coef));
}

std::vector<double> sample_quantile_curve(const std::vector<double>& m,
                                          const std::vector<double>& w,
                                          const std::vector<double>& u_grid) {
    if (m.empty()) throw ArgumentError("sample quantile path: empty arm");
    if (!w.empty() && w.size() != m.size())
        throw ArgumentError("sample quantile path: weight size mismatch");
    std::vector<std::size_t> order(m.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return m[a] < m[b]; });
    double total = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) {
        const double wi = w.empty() ? 1.0 : w[i];
        if (!(wi > 0.0)) throw ArgumentError("sample quantile path: weights must be positive");
        total += wi;
    }
    std::vector<double> out(u_grid.size());
    std::size_t pos = 0;
    double cum = (w.empty() ? 1.0 : w[order[0]]);
    for (std::size_t g = 0; g < u_grid.size(); ++g) {
        const double u = u_grid[g];
        if (!(u > 0.0 && u < 1.0))
            throw ArgumentError("sample quantile path: levels must lie in (0,1)");
        if (g > 0 && u < u_grid[g - 1])
            throw ArgumentError("sample quantile path: levels must be nondecreasing");
        const double target = u * total;
        while (cum < target && pos + 1 < order.size()) {
            ++pos;
            cum += (w.empty() ? 1.0 : w[order[pos]]);
        }
        out[g] = m[order[pos]];
    }
    return out;
}

QuantileFit fit_sample_quantile_path(const std::vector<double>& m0,
                                     const std::vector<double>& w0,
                                     const std::vector<double>& m1,
                                     const std::vector<double>& w1,
                                     const std::vector<double>& u_grid) {
    const auto q0 = sample_quantile_curve(m0, w0, u_grid);
    const auto q1 = sample_quantile_curve(m1, w1, u_grid);
    std::vector<std::vector<double>> coef(u_grid.size());
    for (std::size_t g = 0; g < u_grid.size(); ++g)
        coef[g] = {q0[g], q1[g] - q0[g]};
    return QuantileFit(std::vector<double>(u_grid), std::move(coef));
}

QuantileFit fit_sample_quantiles(const MicrodataTable& table,
                                 const std::vector<double>& weights,
                                 const std::vector<double>& u_grid) {
    if (!weights.empty() && weights.size() != table.size())
        throw ArgumentError("fit_sample_quantiles: weight length mismatch");
    std::vector<double> m0, w0, m1, w1;
    for (std::size_t i = 0; i < table.size(); ++i) {
        const double wi = weights.empty() ? 1.0 : weights[i];
        if (wi < 0.0) throw ArgumentError("fit_sample_quantiles: negative weight");
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
        throw EstimationError("degenerate exposure arm: no weighted rows on one side");
    return fit_sample_quantile_path(m0, w0, m1, w1, u_grid);
}

std::vector<double> rearrange_nondecreasing(std::vector<double> curve) {
    std::sort(curve.begin(), curve.end());
    return curve;
}

} // namespace qmed
