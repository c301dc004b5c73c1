#pragma once

// Ionescu-Wainger heights, the denominator sets P_{<=l}, their lcm Q_{<=l} in factored form,
// enumerated major-arc frequencies, Fourier projections Pi_{<=l,<=k} / Pi_{l,<=k} on Z/MZ and
// paraproduct pieces.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "bilin/numbers.hpp"
#include "bilin/signals.hpp"
#include "bilin/spectral.hpp"

namespace bilin {

struct IWConfig {
    double rho = 0.25;
    unsigned c0_threshold = 10;
    std::uint64_t q_cap = 1'000'000;

    IWConfig() = default;
    IWConfig(double rho_, unsigned c0 = 10, std::uint64_t cap = 1'000'000) : rho(rho_), c0_threshold(c0), q_cap(cap) {
        validate();
    }

    void validate() const {
        if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("IWConfig: rho must lie in (0, 1)");
        if (q_cap == 0 || q_cap > kFactorizeCap) throw std::invalid_argument("IWConfig: q_cap out of range");
    }

    /// floor(2 / rho) + 1.
    unsigned D() const { return static_cast<unsigned>(std::floor(2.0 / rho)) + 1; }

    /// floor(2^{rho l / 2}) + 1, saturating for huge l.
    std::uint64_t N0(unsigned l) const {
        const double e = rho * l / 2.0;
        if (e >= 62.0) return std::uint64_t{1} << 62;
        double v = std::exp2(e);
        const double r = std::round(v);
        if (std::abs(v - r) <= 1e-9 * std::max(1.0, v)) v = r;
        return static_cast<std::uint64_t>(std::floor(v)) + 1;
    }

    friend bool operator==(const IWConfig&, const IWConfig&) = default;
};

struct AliasingError : std::runtime_error {
    ArithmeticFrequency first, second;
    AliasingError(const ArithmeticFrequency& a, const ArithmeticFrequency& b, double width)
        : std::runtime_error("major arcs overlap: " + a.to_string() + " and " + b.to_string() +
                             " are not separated by more than " + std::to_string(2.0 * width)),
          first(a),
          second(b) {}
};

namespace detail {

inline bool below_pow2(std::uint64_t p, unsigned l) { return l >= 63 || p <= (std::uint64_t{1} << l); }

/// Membership of q (given by its factorization) in P_{<=l}.
inline bool in_P_leq_factored(std::uint64_t q, const FactoredInt& f, unsigned l, const IWConfig& cfg) {
    if (l <= cfg.c0_threshold) return below_pow2(q, l);
    const std::uint64_t n0 = cfg.N0(l);
    const unsigned D = cfg.D();
    unsigned large = 0;
    for (auto [p, e] : f.factors()) {
        if (!below_pow2(p, l)) return false;
        if (p > n0) {
            ++large;
            if (e > D) return false;
        } else if (e > static_cast<std::uint64_t>(D) * legendre_valuation(n0, p)) {
            return false;
        }
    }
    return large <= D;
}

inline constexpr unsigned kHeightSearchLimit = 4096;

inline unsigned height_factored(std::uint64_t q, const FactoredInt& f, const IWConfig& cfg) {
    for (unsigned l = 0; l < kHeightSearchLimit; ++l) {
        if (in_P_leq_factored(q, f, l, cfg)) return l;
    }
    throw std::runtime_error("height: no level found below search limit");
}

/// Smallest-prime-factor table up to n, shared across callers.
inline std::shared_ptr<const std::vector<std::uint32_t>> spf_table(std::uint64_t n) {
    static std::shared_mutex mtx;
    static std::map<std::uint64_t, std::shared_ptr<const std::vector<std::uint32_t>>> cache;
    {
        std::shared_lock lock(mtx);
        if (auto it = cache.find(n); it != cache.end()) return it->second;
    }
    auto spf = std::make_shared<std::vector<std::uint32_t>>(n + 1, 0);
    for (std::uint64_t i = 2; i <= n; ++i) {
        if ((*spf)[i] != 0) continue;
        for (std::uint64_t m = i; m <= n; m += i) {
            if ((*spf)[m] == 0) (*spf)[m] = static_cast<std::uint32_t>(i);
        }
    }
    std::unique_lock lock(mtx);
    return cache.emplace(n, std::move(spf)).first->second;
}

inline FactoredInt factor_with(const std::vector<std::uint32_t>& spf, std::uint64_t q) {
    FactoredInt::Map m;
    while (q > 1) {
        const std::uint32_t p = spf[q];
        ++m[p];
        q /= p;
    }
    return FactoredInt(std::move(m));
}

}  // namespace detail

inline bool in_P_leq(std::uint64_t q, unsigned l, const IWConfig& cfg) {
    cfg.validate();
    if (q == 0) throw std::invalid_argument("in_P_leq: q must be positive");
    if (q > cfg.q_cap) throw std::out_of_range("in_P_leq: q above q_cap");
    return detail::in_P_leq_factored(q, factorize(q), l, cfg);
}

/// Least l with denominator in P_{<=l}; Height = 2^l.
inline unsigned height(const ArithmeticFrequency& alpha, const IWConfig& cfg) {
    cfg.validate();
    const auto q = static_cast<std::uint64_t>(alpha.denominator());
    if (q > cfg.q_cap) throw std::out_of_range("height: denominator above q_cap");
    return detail::height_factored(q, alpha.denominator_factors(), cfg);
}

inline unsigned naive_height_exponent(const ArithmeticFrequency& alpha) {
    return ceil_log2(static_cast<std::uint64_t>(alpha.denominator()));
}

inline constexpr unsigned kMaxSieveLevel = 30;

/// Q_{<=l} = lcm of P_{<=l}, in factored form.
inline FactoredInt q_leq(unsigned l, const IWConfig& cfg) {
    cfg.validate();
    if (l > kMaxSieveLevel) throw std::out_of_range("q_leq: level above sieve limit");
    const std::uint64_t top = std::uint64_t{1} << l;
    FactoredInt::Map m;
    if (l <= cfg.c0_threshold) {
        for (std::uint64_t p : primes_up_to(top)) {
            unsigned e = 0;
            for (std::uint64_t pk = p; pk <= top; pk *= p) ++e;
            m[p] = e;
        }
        return FactoredInt(std::move(m));
    }
    const std::uint64_t n0 = cfg.N0(l);
    const unsigned D = cfg.D();
    // l > c0_threshold >= 0 gives N_0 <= 2^l, so every prime of Q_0 is listed here.
    for (std::uint64_t p : primes_up_to(top)) {
        m[p] = p <= n0 ? static_cast<unsigned>(D * legendre_valuation(n0, p)) : D;
    }
    return FactoredInt(std::move(m));
}

inline constexpr std::size_t kMaxEnumeratedFrequencies = std::size_t{1} << 22;

/// All reduced a/q with q <= q_cap and height <= 2^l, sorted by torus value.
/// Results are memoized per (l, cfg); safe under concurrent callers.
inline std::shared_ptr<const std::vector<ArithmeticFrequency>> enumerate_freqs(unsigned l, const IWConfig& cfg) {
    cfg.validate();
    using Key = std::tuple<unsigned, double, unsigned, std::uint64_t>;
    static std::shared_mutex mtx;
    static std::map<Key, std::shared_ptr<const std::vector<ArithmeticFrequency>>> cache;
    const Key key{l, cfg.rho, cfg.c0_threshold, cfg.q_cap};
    {
        std::shared_lock lock(mtx);
        if (auto it = cache.find(key); it != cache.end()) return it->second;
    }

    std::vector<std::uint64_t> dens;
    std::uint64_t count = 0;
    auto take = [&](std::uint64_t q, const FactoredInt& f) {
        dens.push_back(q);
        std::uint64_t phi = q;
        for (auto [p, e] : f.factors()) phi = phi / p * (p - 1);
        count += phi;
        if (count > kMaxEnumeratedFrequencies) throw std::length_error("enumerate_freqs: too many frequencies below q_cap");
    };
    if (l <= cfg.c0_threshold) {
        const std::uint64_t top = l >= 63 ? cfg.q_cap : std::min<std::uint64_t>(cfg.q_cap, std::uint64_t{1} << l);
        const auto spf = detail::spf_table(top);
        for (std::uint64_t q = 1; q <= top; ++q) take(q, detail::factor_with(*spf, q));
    } else {
        const auto spf = detail::spf_table(cfg.q_cap);
        for (std::uint64_t q = 1; q <= cfg.q_cap; ++q) {
            const FactoredInt f = detail::factor_with(*spf, q);
            if (detail::height_factored(q, f, cfg) <= l) take(q, f);
        }
    }

    auto out = std::make_shared<std::vector<ArithmeticFrequency>>();
    out->reserve(static_cast<std::size_t>(count));
    for (std::uint64_t q : dens) {
        for (std::uint64_t a = 0; a < q; ++a) {
            if (std::gcd(a, q) == 1) out->push_back(reduce_fraction(static_cast<std::int64_t>(a), static_cast<std::int64_t>(q)));
        }
    }
    std::sort(out->begin(), out->end());
    out->erase(std::unique(out->begin(), out->end()), out->end());

    std::unique_lock lock(mtx);
    return cache.emplace(key, std::move(out)).first->second;
}

enum class ArcMode { up_to, exact };

struct MajorArcSet {
    unsigned level = 0;
    int width_exponent = 0;
    ArcMode mode = ArcMode::up_to;
    std::vector<ArithmeticFrequency> frequencies;
    bool non_aliasing = false;
};

/// Throws AliasingError unless adjacent frequencies are more than 2 * 2^k apart.
inline void check_non_aliasing(const std::vector<ArithmeticFrequency>& sorted, int k) {
    if (sorted.size() < 2) return;
    const double width = std::ldexp(1.0, k);
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const auto& a = sorted[i];
        const auto& b = sorted[(i + 1) % sorted.size()];
        // Exact gap (b - a) mod 1 as a rational.
        const Int128 num = static_cast<Int128>(b.numerator()) * a.denominator() - static_cast<Int128>(a.numerator()) * b.denominator();
        const Int128 den = static_cast<Int128>(a.denominator()) * b.denominator();
        Int128 gap = num % den;
        if (gap <= 0) gap += den;
        if (!(static_cast<long double>(gap) / static_cast<long double>(den) > 2.0L * width)) throw AliasingError(a, b, width);
    }
}

/// Frequencies of height <= 2^l (up_to) or exactly 2^l (exact), certified non-aliasing at width 2^k.
inline MajorArcSet major_arc_set(unsigned l, int k, const IWConfig& cfg, ArcMode mode) {
    const auto all = enumerate_freqs(l, cfg);
    check_non_aliasing(*all, k);
    MajorArcSet set{l, k, mode, {}, true};
    if (mode == ArcMode::up_to || l == 0) {
        set.frequencies = *all;
    } else {
        const auto lower = enumerate_freqs(l - 1, cfg);
        std::set_difference(all->begin(), all->end(), lower->begin(), lower->end(), std::back_inserter(set.frequencies));
    }
    return set;
}

namespace detail {

/// Adds sign * sum_alpha eta(<j/M - alpha> / 2^k) into sym.
inline void accumulate_arc_symbol(std::vector<double>& sym, const std::vector<ArithmeticFrequency>& freqs, int k,
                                  double sign) {
    const auto M = static_cast<std::int64_t>(sym.size());
    const double radius = std::ldexp(static_cast<double>(M), k);
    for (const auto& alpha : freqs) {
        const std::int64_t a = alpha.numerator(), q = alpha.denominator();
        const Int128 den = static_cast<Int128>(M) * q;
        auto add = [&](std::int64_t j) {
            Int128 num = (static_cast<Int128>(j) * q - static_cast<Int128>(a) * M) % den;
            if (num < 0) num += den;
            if (2 * num >= den) num -= den;
            const double xi = static_cast<double>(static_cast<long double>(num) / static_cast<long double>(den));
            sym[static_cast<std::size_t>(((j % M) + M) % M)] += sign * eta_leq(k, xi);
        };
        if (2.0 * radius >= static_cast<double>(M) - 1.0) {
            for (std::int64_t j = 0; j < M; ++j) add(j);
        } else {
            const double c = static_cast<double>(a) * static_cast<double>(M) / static_cast<double>(q);
            for (auto j = static_cast<std::int64_t>(std::ceil(c - radius)); j <= static_cast<std::int64_t>(std::floor(c + radius)); ++j) add(j);
        }
    }
}

}  // namespace detail

/// Symbol of Pi_{<=l,<=k} (up_to) or Pi_{l,<=k} (exact) on the DFT grid of Z/MZ.
inline std::vector<double> projection_symbol(std::size_t M, unsigned l, int k, const IWConfig& cfg, ArcMode mode) {
    if (M == 0) throw std::invalid_argument("projection_symbol: modulus must be positive");
    const auto all = enumerate_freqs(l, cfg);
    check_non_aliasing(*all, k);
    std::vector<double> sym(M, 0.0);
    detail::accumulate_arc_symbol(sym, *all, k, 1.0);
    if (mode == ArcMode::exact && l > 0) detail::accumulate_arc_symbol(sym, *enumerate_freqs(l - 1, cfg), k, -1.0);
    return sym;
}

inline CyclicFn apply_symbol(const CyclicFn& f, const std::vector<double>& sym) {
    if (sym.size() != f.modulus()) throw std::invalid_argument("apply_symbol: size mismatch");
    DualCyclicFn F = dft_cyclic(f);
    for (std::size_t j = 0; j < sym.size(); ++j) F.values[j] *= sym[j];
    return idft_cyclic(F);
}

inline CyclicFn projection_pi(const CyclicFn& f, unsigned l, int k, const IWConfig& cfg, ArcMode mode) {
    return apply_symbol(f, projection_symbol(f.modulus(), l, k, cfg, mode));
}

/// Symbol of the paraproduct piece at scale N (F_N for degree_factor 1, G_N for degree_factor d).
inline std::vector<double> paraproduct_symbol(std::size_t M, std::int64_t N, unsigned l, int s, int u,
                                              int degree_factor, const IWConfig& cfg) {
    if (s < -u) throw std::invalid_argument("paraproduct_piece: s must be >= -u");
    const int L = log_scale(N);
    if (s == -u) return projection_symbol(M, l, degree_factor * (-L - u), cfg, ArcMode::exact);
    std::vector<double> hi = projection_symbol(M, l, degree_factor * (-L + s), cfg, ArcMode::exact);
    const std::vector<double> lo = projection_symbol(M, l, degree_factor * (-L + s - 1), cfg, ArcMode::exact);
    for (std::size_t j = 0; j < M; ++j) hi[j] -= lo[j];
    return hi;
}

inline CyclicFn paraproduct_piece(const CyclicFn& f, std::int64_t N, unsigned l, int s, int u, int degree_factor,
                                  const IWConfig& cfg) {
    return apply_symbol(f, paraproduct_symbol(f.modulus(), N, l, s, u, degree_factor, cfg));
}

}  // namespace bilin
