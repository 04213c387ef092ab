#include "qmed/oracle.hpp"
#include "qmed/errors.hpp"
#include "qmed/rng.hpp"
#include "qmed/stats.hpp"

#include <cmath>
#include <string>

namespace qmed {

OracleModel::OracleModel(double alpha0, double alpha1, double alpha2, double alpha3,
                         double beta0, double beta1, double beta2,
                         double sigma_exponent)
    : a0_(alpha0), a1_(alpha1), a2_(alpha2), b0_(beta0), b1_(beta1), e_(sigma_exponent) {
    if (alpha3 != 0.0 || beta2 != 0.0)
        throw ArgumentError("OracleModel: covariate coefficients must be zero "
                            "(the simulator draws no covariates)");
    if (!std::isfinite(a0_) || !std::isfinite(a1_) || !std::isfinite(a2_) ||
        !std::isfinite(b0_) || !std::isfinite(b1_) || !std::isfinite(e_))
        throw ArgumentError("OracleModel: parameters must be finite");
}

double OracleModel::sd(double x) const {
    return std::pow(1.0 + x, e_ / 2.0);
}

double OracleModel::conditional_quantile(double u, double x) const {
    return b0_ + b1_ * x + sd(x) * normal_quantile(u);
}

double OracleModel::beta0_u(double u) const {
    return b0_ + normal_quantile(u);
}

double OracleModel::beta1_u(double u) const {
    return b1_ + (sd(1.0) - 1.0) * normal_quantile(u);
}

double OracleModel::sparsity(double u, double x_star) const {
    return sd(x_star) / normal_pdf(normal_quantile(u));
}

double OracleModel::rate(double x, double x_star, double u) const {
    return std::exp(a0_ + a1_ * x + a2_ * conditional_quantile(u, x_star));
}

double OracleModel::sensitivity(double x, double x_star, double u) const {
    return a2_ * sparsity(u, x_star) * rate(x, x_star, u);
}

double OracleModel::nie(double x, double u) const {
    return rate(x, 1.0, u) - rate(x, 0.0, u);
}

double OracleModel::ace_u(double u) const {
    return rate(1.0, 1.0, u) - rate(0.0, 0.0, u);
}

double OracleModel::nde(double x_star, double u) const {
    return ace_u(u) - nie(1.0 - x_star, u);
}

double OracleModel::product(double x, double x_star, double u) const {
    // The sd(x*) and phi factors cancel between r and 1/s, leaving
    // alpha2 * beta1(u) * R(x, x*, u).
    return sensitivity(x, x_star, u) * (1.0 / sparsity(u, x_star)) * beta1_u(u);
}

double OracleModel::null_model_product(double x, double x_star, double u) const {
    const double v = normal_quantile(u);
    const double sigma = sd(x_star);
    return sensitivity(x, x_star, u) * (b1_ / (2.5066282746310002 * sigma)) *
           std::exp(-0.5 * v * v);
}

double OracleModel::crossing_from_slope(double t) {
    if (t == 0.0)
        throw ArgumentError("crossing point is singular where alpha2 * beta1(u) = 0");
    // Below |t| = 1e-2 the series is exact to double precision (the next term
    // is t^5/181440 <= 6e-16) while the log form loses ~2^-52/|t| absolute
    // precision to cancellation inside expm1(t) - t.
    if (std::fabs(t) < 1e-2)
        return 0.5 + t / 24.0 - t * t * t / 2880.0;
    return std::log1p((std::expm1(t) - t) / t) / t;
}

double OracleModel::tilde_x_star(double u) const {
    const double t = a2_ * beta1_u(u);
    if (t == 0.0)
        throw ArgumentError(
            "tilde_x_star is singular at u where alpha2 * beta1(u) = 0 "
            "(u = Phi(-beta1) under the default spread rule); u = " + std::to_string(u));
    return crossing_from_slope(t);
}

MicrodataTable OracleModel::simulate(std::size_t n, double p_exposed,
                                     std::uint64_t seed,
                                     SimulationReport* report) const {
    if (n < 1) throw ArgumentError("simulate: need n >= 1");
    if (!(p_exposed > 0.0 && p_exposed < 1.0))
        throw ArgumentError("simulate: p_exposed must lie in (0,1)");

    RngStream rng = RngStream::keyed(seed, 0x73696d756c617465ull);
    std::vector<double> y(n), m(n);
    std::vector<std::uint8_t> x(n);
    std::size_t clamped = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const int xi = rng.next_bernoulli(p_exposed) ? 1 : 0;
        const double mi = b0_ + b1_ * xi + sd(xi) * rng.next_normal();
        double risk = std::exp(a0_ + a1_ * xi + a2_ * mi);
        if (risk > 1.0) {
            risk = 1.0;
            ++clamped;
        }
        x[i] = static_cast<std::uint8_t>(xi);
        m[i] = mi;
        y[i] = rng.next_bernoulli(risk) ? 1.0 : 0.0;
    }
    if (report) {
        report->n = n;
        report->n_clamped = clamped;
        report->clamp_fraction = static_cast<double>(clamped) / static_cast<double>(n);
        report->clamp_warning = report->clamp_fraction > 0.05;
    }
    return MicrodataTable(std::move(y), std::move(x), std::move(m), {}, {});
}

} // namespace qmed
