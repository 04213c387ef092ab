#include "qmed/rng.hpp"
#include "qmed/errors.hpp"

#include <cmath>

namespace qmed {

std::uint64_t RngStream::mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

RngStream RngStream::keyed(std::uint64_t seed, std::uint64_t k1,
                           std::uint64_t k2, std::uint64_t k3) {
    std::uint64_t s = mix(seed);
    s = mix(s ^ mix(k1 + 0x8000000000000001ull));
    s = mix(s ^ mix(k2 + 0x8000000000000002ull));
    s = mix(s ^ mix(k3 + 0x8000000000000003ull));
    RngStream r(0);
    r.state_ = s;
    return r;
}

std::uint64_t RngStream::next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

double RngStream::next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::next_open() {
    return (static_cast<double>(next_u64() >> 12) + 0.5) * 0x1.0p-52;
}

std::uint64_t RngStream::next_below(std::uint64_t n) {
    if (n == 0) throw ArgumentError("next_below: n must be positive");
    // Lemire's method: accept unless the low product word falls in the
    // biased remainder zone.
    while (true) {
        const std::uint64_t x = next_u64();
        const unsigned __int128 m = static_cast<unsigned __int128>(x) * n;
        const std::uint64_t lo = static_cast<std::uint64_t>(m);
        if (lo >= n) return static_cast<std::uint64_t>(m >> 64);
        const std::uint64_t threshold = (0 - n) % n;
        if (lo >= threshold) return static_cast<std::uint64_t>(m >> 64);
    }
}

double RngStream::next_normal() {
    if (has_cached_normal_) {
        has_cached_normal_ = false;
        return cached_normal_;
    }
    const double u1 = next_open();
    const double u2 = next_open();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 6.283185307179586477 * u2;
    cached_normal_ = radius * std::sin(angle);
    has_cached_normal_ = true;
    return radius * std::cos(angle);
}

std::vector<double> RngStream::multinomial_equal(std::uint64_t n, std::size_t b) {
    if (b == 0) throw ArgumentError("multinomial_equal: b must be positive");
    std::vector<double> counts(b, 0.0);
    for (std::uint64_t i = 0; i < n; ++i)
        counts[static_cast<std::size_t>(next_below(b))] += 1.0;
    return counts;
}

} // namespace qmed
