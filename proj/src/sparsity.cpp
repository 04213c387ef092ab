#include "qmed/sparsity.hpp"
#include "qmed/errors.hpp"
#include "qmed/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qmed {

namespace {

double effective_eps(double n_eff, double u, double eps_override) {
    if (eps_override > 0.0)
        return std::min({eps_override, u / 2.0, (1.0 - u) / 2.0});
    return truncated_bandwidth(n_eff, u);
}

} // namespace

std::vector<SparsityValue> sparsity_curve(const MediatorModel& model, int x_star,
                                          std::size_t profile,
                                          const std::vector<double>& u_grid,
                                          double n_eff, double eps_override) {
    std::vector<SparsityValue> out(u_grid.size());
    for (std::size_t g = 0; g < u_grid.size(); ++g) {
        const double u = u_grid[g];
        const double eps = effective_eps(n_eff, u, eps_override);
        const double hi = model.conditional_quantile(u + eps, x_star, profile);
        const double lo = model.conditional_quantile(u - eps, x_star, profile);
        out[g].eps = eps;
        out[g].s = (hi - lo) / (2.0 * eps);
    }
    double floor = std::numeric_limits<double>::infinity();
    for (const auto& v : out)
        if (v.s > 0.0) floor = std::min(floor, v.s);
    if (!std::isfinite(floor))
        throw EstimationError("sparsity estimate is nonpositive at every grid point");
    for (auto& v : out) {
        if (!(v.s > 0.0)) {
            v.s = floor;
            v.floored = true;
        }
    }
    return out;
}

double pooled_inverse_sparsity(double s0, double s1, double w0, double w1,
                               bool pool_inverse) {
    if (!(s0 > 0.0 && s1 > 0.0))
        throw ArgumentError("pooled_inverse_sparsity: sparsity values must be positive");
    if (!(w0 >= 0.0 && w1 >= 0.0 && w0 + w1 > 0.0))
        throw ArgumentError("pooled_inverse_sparsity: bad arm weights");
    const double total = w0 + w1;
    if (pool_inverse)
        return (w0 / s0 + w1 / s1) / total;
    return total / (w0 * s0 + w1 * s1);
}

std::vector<double> sparsity_levels(const std::vector<double>& u_grid,
                                    double n_eff0, double n_eff1,
                                    double eps_override) {
    std::vector<double> levels;
    levels.reserve(u_grid.size() * 5);
    for (double u : u_grid) {
        levels.push_back(u);
        for (double n_eff : {n_eff0, n_eff1}) {
            const double eps = effective_eps(n_eff, u, eps_override);
            levels.push_back(u - eps);
            levels.push_back(u + eps);
        }
    }
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    return levels;
}

} // namespace qmed
