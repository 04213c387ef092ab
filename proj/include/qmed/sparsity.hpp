// Sparsity (inverse density) estimation along the quantile curve:
//   s_hat(u) = [Q_hat(u + eps) - Q_hat(u - eps)] / (2 eps)
// with the Bofinger bandwidth truncated to keep u +/- eps inside (0,1).
#pragma once

#include "qmed/mediator.hpp"

#include <vector>

namespace qmed {

struct SparsityValue {
    double s = 0.0;
    double eps = 0.0;
    bool floored = false; // nonpositive estimate replaced by grid minimum
};

// Evaluate s_hat over u_grid for one reference arm and profile.  n_eff is the
// (weighted) sample size of that arm, used by the bandwidth rule; a positive
// eps_override replaces the Bofinger value (still truncated near 0 and 1).
// Nonpositive estimates are replaced by the smallest positive estimate on the
// grid and flagged; if no grid point is positive, estimation fails.
std::vector<SparsityValue> sparsity_curve(const MediatorModel& model, int x_star,
                                          std::size_t profile,
                                          const std::vector<double>& u_grid,
                                          double n_eff, double eps_override = 0.0);

// Pool the two arms' sparsity values with weights proportional to arm sizes.
// pool_inverse = false (default): invert the weighted mean of s;
// pool_inverse = true: weighted mean of 1/s.  Returns the pooled *inverse*.
double pooled_inverse_sparsity(double s0, double s1, double w0, double w1,
                               bool pool_inverse);

// Level grid required to evaluate sparsity_curve: every u in u_grid plus the
// flank points u +/- eps for both arms' effective sizes (deduplicated,
// sorted).  eps_override as in sparsity_curve.
std::vector<double> sparsity_levels(const std::vector<double>& u_grid,
                                    double n_eff0, double n_eff1,
                                    double eps_override = 0.0);

} // namespace qmed
