// Analytic reference model: normal mediator with exposure-dependent spread
// and exponential event risk.  Everything the pipeline estimates has a
// closed form here, including the intermediate exposure level at which the
// three-factor product reproduces the discrete indirect effect exactly.
//
//   M | X=x  ~  Normal(beta0 + beta1 x,  (1+x)^sigma_exponent)
//   P(Y=1 | x, m) = clamp(exp(alpha0 + alpha1 x + alpha2 m))   (clamp only
//                                                               when simulating)
#pragma once

#include "qmed/data.hpp"

#include <cstdint>

namespace qmed {

struct SimulationReport {
    std::size_t n = 0;
    std::size_t n_clamped = 0;     // draws whose risk exceeded 1
    double clamp_fraction = 0.0;
    bool clamp_warning = false;    // fraction above 5%
};

class OracleModel {
public:
    // alpha3 (a covariate term in the risk model) and beta2 (a covariate term
    // in the mediator mean) exist in the parameter vector for completeness
    // but must be zero: the simulator draws no covariates.
    OracleModel(double alpha0, double alpha1, double alpha2, double alpha3,
                double beta0, double beta1, double beta2,
                double sigma_exponent = 2.0);

    static OracleModel basic(double alpha0, double alpha1, double alpha2,
                             double beta1, double sigma_exponent = 2.0) {
        return OracleModel(alpha0, alpha1, alpha2, 0.0, 0.0, beta1, 0.0, sigma_exponent);
    }

    double alpha0() const { return a0_; }
    double alpha1() const { return a1_; }
    double alpha2() const { return a2_; }
    double beta0() const { return b0_; }
    double beta1() const { return b1_; }
    double sigma_exponent() const { return e_; }

    // Standard deviation of M given X=x: (1+x)^{e/2}.
    double sd(double x) const;

    // True whenever alpha0 = beta0 = 0, the textbook case of the closed
    // forms; they remain valid in general, carrying the extra terms through.
    bool is_canonical() const { return a0_ == 0.0 && b0_ == 0.0; }

    // F^{-1}(u | x) = beta0 + beta1 x + sd(x) Phi^{-1}(u)
    double conditional_quantile(double u, double x) const;

    // Level-specific intercept/slope: beta0(u) = beta0 + Phi^{-1}(u),
    // beta1(u) = beta1 + (sd(1) - 1) Phi^{-1}(u).
    double beta0_u(double u) const;
    double beta1_u(double u) const;
    double quantile_effect(double u) const { return beta1_u(u); }

    // Sparsity s(u, x*) = sd(x*) / phi(Phi^{-1}(u)).
    double sparsity(double u, double x_star) const;

    // Unclamped rate R(x, x*, u) = exp(alpha0 + alpha1 x + alpha2 F^{-1}(u|x*)).
    double rate(double x, double x_star, double u) const;

    // Sensitivity r(x, x*, u) = alpha2 * s(u, x*) * R(x, x*, u).
    double sensitivity(double x, double x_star, double u) const;

    double nie(double x, double u) const;        // R(x,1,u) - R(x,0,u)
    double ace_u(double u) const;                // R(1,1,u) - R(0,0,u)
    double nde(double x_star, double u) const;   // ace - nie at x = 1-x*

    // Chain-rule product r * s^{-1} * q at a chosen reference x*.
    double product(double x, double x_star, double u) const;

    // Homoscedastic-normal simplification of the product:
    // r * (beta1 / (sqrt(2 pi) sigma)) * exp(-Phi^{-1}(u)^2 / 2).
    double null_model_product(double x, double x_star, double u) const;

    // The intermediate exposure level solving product = nie:
    //   x~* = log((e^t - 1)/t) / t with t = alpha2 * beta1(u);
    // singular where t = 0 (u = Phi(-beta1) in the default spread rule).
    double tilde_x_star(double u) const;

    // The same crossing point as a function of t alone; series branch
    // 1/2 + t/24 - t^3/2880 for |t| < 1e-2, where it is exact to double
    // precision and the log form would lose precision to cancellation.
    static double crossing_from_slope(double t);

    // Draw n rows: x ~ Bernoulli(p_exposed), m ~ Normal(mean(x), sd(x)^2),
    // y ~ Bernoulli(min(risk, 1)).  Deterministic given seed.
    MicrodataTable simulate(std::size_t n, double p_exposed, std::uint64_t seed,
                            SimulationReport* report = nullptr) const;

private:
    double a0_, a1_, a2_, b0_, b1_, e_;
};

} // namespace qmed
