#include "qmed/stats.hpp"
#include "qmed/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qmed {

namespace {
constexpr double kInvSqrt2Pi = 0.3989422804014326779;
constexpr double kInvSqrt2 = 0.7071067811865475244;
} // namespace

double normal_pdf(double x) {
    return kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

double normal_cdf(double x) {
    return 0.5 * std::erfc(-x * kInvSqrt2);
}

// Rational approximations from Wichura's PPND16 algorithm; relative error
// below 1e-15 over the full open interval.
double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw ArgumentError("normal_quantile: p must lie in (0,1)");
    const double q = p - 0.5;
    if (std::fabs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        const double num =
            q * (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                       6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
                     1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
                   1.3314166789178437745e2) * r + 3.3871328727963666080e0);
        const double den =
            (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                  3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
                5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
              4.2313330701600911252e1) * r + 1.0);
        return num / den;
    }
    double r = (q < 0.0) ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double val;
    if (r <= 5.0) {
        r -= 1.6;
        const double num =
            (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                  2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
                3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
              4.63033784615654529590e0) * r + 1.42343711074968357734e0);
        const double den =
            (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                  1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
              2.05319162663775882187e0) * r + 1.0);
        val = num / den;
    } else {
        r -= 5.0;
        const double num =
            (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                  1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
              5.46378491116411436990e0) * r + 6.65790464350110377720e0);
        const double den =
            (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                  1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
              5.99832206555887937690e-1) * r + 1.0);
        val = num / den;
    }
    return (q < 0.0) ? -val : val;
}

double bofinger_bandwidth(double n, double u) {
    if (!(u > 0.0 && u < 1.0))
        throw ArgumentError("bofinger_bandwidth: u must lie in (0,1)");
    if (!(n >= 2.0))
        throw ArgumentError("bofinger_bandwidth: need n >= 2");
    const double v = normal_quantile(u);
    const double phi = normal_pdf(v);
    const double num = 4.5 * phi * phi * phi * phi;
    const double den = (2.0 * v * v + 1.0) * (2.0 * v * v + 1.0);
    return std::pow(n, -0.2) * std::pow(num / den, 0.2);
}

double truncated_bandwidth(double n, double u) {
    double eps = bofinger_bandwidth(n, u);
    eps = std::min(eps, u / 2.0);
    eps = std::min(eps, (1.0 - u) / 2.0);
    return eps;
}

double weighted_quantile(const std::vector<double>& values,
                         const std::vector<double>& weights, double u) {
    if (values.empty())
        throw ArgumentError("weighted_quantile: empty sample");
    const bool unit = weights.empty();
    if (!unit && values.size() != weights.size())
        throw ArgumentError("weighted_quantile: values/weights length mismatch");
    if (!(u > 0.0 && u < 1.0))
        throw ArgumentError("weighted_quantile: u must lie in (0,1)");
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    double total = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double w = unit ? 1.0 : weights[i];
        if (!(w > 0.0))
            throw ArgumentError("weighted_quantile: weights must be positive");
        total += w;
    }
    const double target = u * total;
    double cum = 0.0;
    for (std::size_t k : order) {
        cum += unit ? 1.0 : weights[k];
        if (cum >= target) return values[k];
    }
    return values[order.back()];
}

double interp_linear(const std::vector<double>& x, const std::vector<double>& y,
                     double xq) {
    if (x.size() < 1 || x.size() != y.size())
        throw ArgumentError("interp_linear: bad knot arrays");
    if (xq < x.front() || xq > x.back())
        throw ArgumentError("interp_linear: query outside knot range");
    if (x.size() == 1) return y.front();
    auto it = std::upper_bound(x.begin(), x.end(), xq);
    if (it == x.begin()) return y.front();
    if (it == x.end()) return y.back();
    const std::size_t hi = static_cast<std::size_t>(it - x.begin());
    const std::size_t lo = hi - 1;
    const double t = (xq - x[lo]) / (x[hi] - x[lo]);
    return y[lo] + t * (y[hi] - y[lo]);
}

std::uint64_t fnv1a64(const void* data, std::size_t len, std::uint64_t seed) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

} // namespace qmed
