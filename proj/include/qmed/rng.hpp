// Deterministic random number streams.  Every stream is derived from a user
// seed plus integer keys, so any replicate can be regenerated in isolation
// regardless of evaluation order.  The generator is the splitmix64 finalizer
// iterated over a 64-bit counter; normals come from a Box-Muller pair, so the
// exact draw sequence is fixed by this implementation (not by the platform's
// <random> distributions, which are not portable across standard libraries).
#pragma once

#include <cstdint>
#include <vector>

namespace qmed {

class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : state_(mix(seed)) {}

    // Derive an independent stream keyed by (seed, k1, k2, k3).
    static RngStream keyed(std::uint64_t seed, std::uint64_t k1,
                           std::uint64_t k2 = 0, std::uint64_t k3 = 0);

    std::uint64_t next_u64();

    // Uniform on [0,1) with 53 random bits.
    double next_double();

    // Uniform on the open interval (0,1).
    double next_open();

    // Uniform integer in [0, n) by Lemire's multiply-shift rejection method.
    std::uint64_t next_below(std::uint64_t n);

    bool next_bernoulli(double p) { return next_double() < p; }

    // Standard normal draw (Box-Muller; second member of each pair is cached).
    double next_normal();

    // Multinomial(n; 1/b,...,1/b) counts by direct category draws.  Returned
    // as doubles because downstream code treats counts as weights; each entry
    // is an exact integer value.
    std::vector<double> multinomial_equal(std::uint64_t n, std::size_t b);

private:
    static std::uint64_t mix(std::uint64_t z);
    std::uint64_t state_;
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;
};

} // namespace qmed
