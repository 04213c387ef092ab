// Weighted linear quantile regression under the check loss
//   rho_u(r) = r * (u - 1{r < 0}).
//
// The solver walks basic solutions (vertices defined by d interpolated rows)
// taking long steps: along a descent edge it passes every breakpoint whose
// slope update keeps the directional derivative negative, so each pivot
// strictly decreases the objective and termination is guaranteed without an
// anti-cycling rule.  One-sided derivatives handle degenerate vertices.
//
// Among tied minimizers (flat faces of the objective) the fit is polished to
// the vertex minimizing the weighted sum of fitted values.  For a saturated
// binary design this lands exactly on the left-continuous (type-1) sample
// quantile of each arm, matching fit_sample_quantiles bit for bit.
#pragma once

#include "qmed/data.hpp"

#include <cstddef>
#include <vector>

namespace qmed {

double check_loss(double r, double u);

// Total weighted check loss of the residual vector y - Z beta.
double check_loss_objective(const std::vector<double>& Z, std::size_t n, std::size_t d,
                            const std::vector<double>& y, const std::vector<double>& w,
                            const std::vector<double>& beta, double u);

struct CheckLossFit {
    std::vector<double> beta;
    double objective = 0.0;
    std::vector<std::size_t> basis; // row indices of the defining vertex
    int pivots = 0;
};

// Z is row-major n x d.  w may be empty (unit weights); zero weights exclude
// rows, negative weights are an argument error.  warm_basis, when usable,
// seeds the vertex walk (used when sweeping a u grid).
CheckLossFit fit_check_loss(const std::vector<double>& Z, std::size_t n, std::size_t d,
                            const std::vector<double>& y,
                            const std::vector<double>& w, double u,
                            const std::vector<std::size_t>* warm_basis = nullptr);

// Coefficient path over an increasing grid of quantile levels.
class QuantileFit {
public:
    QuantileFit(std::vector<double> u_grid, std::vector<std::vector<double>> coef);

    const std::vector<double>& levels() const { return u_; }
    std::size_t dimension() const { return coef_.empty() ? 0 : coef_.front().size(); }

    // Coefficients at grid index g.
    const std::vector<double>& coef(std::size_t g) const { return coef_[g]; }

    // Linear interpolation of each coefficient in u; u outside the grid range
    // is an argument error.
    std::vector<double> coef_at(double u) const;

    // Fitted value z'beta(u), interpolated in u.
    double predict(double u, const std::vector<double>& z) const;
    double predict_at(std::size_t g, const std::vector<double>& z) const;

private:
    std::vector<double> u_;
    std::vector<std::vector<double>> coef_;
};

QuantileFit fit_quantile_path(const std::vector<double>& Z, std::size_t n, std::size_t d,
                              const std::vector<double>& y,
                              const std::vector<double>& w,
                              const std::vector<double>& u_grid);

// Type-1 weighted sample quantiles of one sample at every grid level,
// evaluated with a single cumulative-weight sweep.  Agrees with
// weighted_quantile() exactly.  w may be empty (unit weights).
std::vector<double> sample_quantile_curve(const std::vector<double>& m,
                                          const std::vector<double>& w,
                                          const std::vector<double>& u_grid);

// Intercept + binary-arm fit evaluated by direct type-1 weighted sample
// quantiles of each arm: coef = {q0(u), q1(u) - q0(u)}.  Produces the same
// QuantileFit shape as the general path for downstream code.
QuantileFit fit_sample_quantile_path(const std::vector<double>& m0,
                                     const std::vector<double>& w0,
                                     const std::vector<double>& m1,
                                     const std::vector<double>& w1,
                                     const std::vector<double>& u_grid);

// Table-level convenience for the same thing: splits the mediator by exposure
// arm (weights optional) and runs fit_sample_quantile_path.  An empty arm is
// a degenerate-arm estimation error.
QuantileFit fit_sample_quantiles(const MicrodataTable& table,
                                 const std::vector<double>& weights,
                                 const std::vector<double>& u_grid);

// Sort a fitted curve so it is nondecreasing in u (rearrangement).  The
// multiset of values, and hence the grid mean, is unchanged.
std::vector<double> rearrange_nondecreasing(std::vector<double> curve);

} // namespace qmed
