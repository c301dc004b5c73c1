#pragma once

// Counting functions of polynomials on Z/p^jZ and their normalized L^s and weak-type statistics,
// plus the mean-zero split used for arithmetic averages.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "bilin/numbers.hpp"
#include "bilin/polyops.hpp"
#include "bilin/signals.hpp"

namespace bilin {

inline constexpr std::uint64_t kCountingCap = std::uint64_t{1} << 24;

/// h(y) = #{x in Z/p^jZ : P(x) = y}.
struct CountingProfile {
    std::uint64_t p = 2;
    unsigned j = 1;
    std::vector<std::uint64_t> h;

    std::uint64_t modulus() const { return h.size(); }
    std::uint64_t max_count() const { return h.empty() ? 0 : *std::max_element(h.begin(), h.end()); }
};

inline CountingProfile counting_fn(const IntPolynomial& P, std::uint64_t p, unsigned j) {
    if (!is_prime(p)) throw std::invalid_argument("counting_fn: p must be prime");
    if (j == 0) throw std::invalid_argument("counting_fn: j must be at least 1");
    std::uint64_t Q = 1;
    for (unsigned i = 0; i < j; ++i) {
        if (Q > kCountingCap / p) throw std::out_of_range("counting_fn: p^j exceeds 2^24");
        Q *= p;
    }
    CountingProfile prof{p, j, std::vector<std::uint64_t>(Q, 0)};
    for (std::uint64_t x = 0; x < Q; ++x) ++prof.h[P.eval_mod(static_cast<std::int64_t>(x), Q)];
    return prof;
}

/// (p^{-j} sum_y h(y)^s)^{1/s}.
inline double ls_norm_normalized(const CountingProfile& prof, double s) {
    if (!(s > 0)) throw std::invalid_argument("ls_norm_normalized: s must be positive");
    double acc = 0.0;
    for (std::uint64_t v : prof.h) {
        if (v) acc += std::pow(static_cast<double>(v), s);
    }
    return std::pow(acc / static_cast<double>(prof.modulus()), 1.0 / s);
}

/// #{y : h(y) >= lambda}.
inline std::uint64_t weak_level_count(const CountingProfile& prof, double lambda) {
    if (!(lambda > 0)) throw std::invalid_argument("weak_level_count: lambda must be positive");
    return static_cast<std::uint64_t>(
        std::count_if(prof.h.begin(), prof.h.end(), [lambda](std::uint64_t v) { return static_cast<double>(v) >= lambda; }));
}

/// Smallest C with #{h >= lambda} <= C lambda^{-d/(d-1)} p^j over the given levels.
inline double weak_fit_constant(const CountingProfile& prof, unsigned degree, std::span<const double> lambdas) {
    if (degree < 2) throw std::invalid_argument("weak_fit_constant: degree must be at least 2");
    const double e = static_cast<double>(degree) / (degree - 1);
    double c = 0.0;
    for (double lam : lambdas) {
        c = std::max(c, static_cast<double>(weak_level_count(prof, lam)) * std::pow(lam, e) /
                            static_cast<double>(prof.modulus()));
    }
    return c;
}

/// f = mean + f0 with E f0 = 0.
inline std::pair<Complex, CyclicFn> mean_zero_split(const CyclicFn& f) {
    Complex mean = 0.0;
    for (const auto& v : f.values) mean += v;
    mean /= static_cast<double>(f.modulus());
    std::vector<Complex> f0(f.values);
    for (auto& v : f0) v -= mean;
    return {mean, CyclicFn(std::move(f0))};
}

}  // namespace bilin
