// Scalar statistical utilities: standard normal density/CDF/quantile and
// the Bofinger bandwidth rule used for sparsity and sensitivity steps.
#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace qmed {

double normal_pdf(double x);
double normal_cdf(double x);

// Inverse standard normal CDF, accurate to full double precision
// (Wichura-style rational approximations).  p outside (0,1) -> ArgumentError.
double normal_quantile(double p);

// Bandwidth eps_n = n^{-1/5} * [4.5 * phi(Phi^{-1}(u))^4 / (2 Phi^{-1}(u)^2 + 1)^2]^{1/5}.
// n may be non-integral (effective sample sizes from weighted data).
// Requires n >= 2 and u in (0,1).
double bofinger_bandwidth(double n, double u);

// Bofinger bandwidth truncated so that [u - eps, u + eps] stays inside (0,1):
// eps <- min(eps, u/2, (1-u)/2).
double truncated_bandwidth(double n, double u);

// Type-1 (left-continuous inverse CDF) weighted quantile: smallest value v
// in the sample with cumulative weight >= u * total_weight.  `values` need
// not be sorted.  Weights must be positive; empty weights mean unit weights;
// an empty sample -> ArgumentError.
double weighted_quantile(const std::vector<double>& values,
                         const std::vector<double>& weights, double u);

// Linear interpolation of y over strictly increasing knots x; x outside
// the knot range -> ArgumentError.
double interp_linear(const std::vector<double>& x, const std::vector<double>& y,
                     double xq);

// FNV-1a 64-bit hash over a byte range; used to fingerprint input data.
std::uint64_t fnv1a64(const void* data, std::size_t len, std::uint64_t seed = 14695981039346656037ull);

} // namespace qmed
