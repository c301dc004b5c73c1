#pragma once

// Reduced rational frequencies in Q/Z, factored integers, torus distance.

#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace bilin {

inline constexpr std::uint64_t kFactorizeCap = std::uint64_t{1} << 50;

/// Multiset of prime powers; represents integers too large for machine words.
class FactoredInt {
public:
    using Map = std::map<std::uint64_t, unsigned>;

    FactoredInt() = default;
    explicit FactoredInt(Map factors) : factors_(std::move(factors)) {
        for (auto it = factors_.begin(); it != factors_.end();) {
            it = it->second == 0 ? factors_.erase(it) : std::next(it);
        }
    }

    const Map& factors() const noexcept { return factors_; }
    bool is_one() const noexcept { return factors_.empty(); }

    unsigned exponent(std::uint64_t p) const {
        auto it = factors_.find(p);
        return it == factors_.end() ? 0u : it->second;
    }

    FactoredInt operator*(const FactoredInt& other) const {
        Map out = factors_;
        for (auto [p, e] : other.factors_) out[p] += e;
        return FactoredInt(std::move(out));
    }

    FactoredInt lcm(const FactoredInt& other) const {
        Map out = factors_;
        for (auto [p, e] : other.factors_) {
            auto& slot = out[p];
            slot = std::max(slot, e);
        }
        return FactoredInt(std::move(out));
    }

    /// True when this divides `other`.
    bool divides(const FactoredInt& other) const {
        for (auto [p, e] : factors_) {
            if (other.exponent(p) < e) return false;
        }
        return true;
    }

    /// The integer value, or nullopt when it does not fit in 64 bits.
    std::optional<std::uint64_t> value() const {
        unsigned __int128 v = 1;
        for (auto [p, e] : factors_) {
            for (unsigned i = 0; i < e; ++i) {
                v *= p;
                if (v > UINT64_MAX) return std::nullopt;
            }
        }
        return static_cast<std::uint64_t>(v);
    }

    /// log2 of the value; usable for magnitudes far beyond 64 bits.
    double log2_value() const {
        double s = 0.0;
        for (auto [p, e] : factors_) s += e * std::log2(static_cast<double>(p));
        return s;
    }

    std::string to_string() const {
        std::string s = "{";
        bool first = true;
        for (auto [p, e] : factors_) {
            if (!first) s += ", ";
            first = false;
            s += std::to_string(p) + ":" + std::to_string(e);
        }
        return s + "}";
    }

    friend bool operator==(const FactoredInt&, const FactoredInt&) = default;

private:
    Map factors_;
};

/// Trial division up to sqrt(n).
inline FactoredInt factorize(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("factorize: n must be positive");
    if (n > kFactorizeCap) throw std::out_of_range("factorize: n above 2^50 cap");
    FactoredInt::Map f;
    for (std::uint64_t p = 2; p * p <= n; p += (p == 2 ? 1 : 2)) {
        while (n % p == 0) {
            ++f[p];
            n /= p;
        }
    }
    if (n > 1) ++f[n];
    return FactoredInt(std::move(f));
}

inline bool is_prime(std::uint64_t n) {
    if (n < 2) return false;
    if (n < 4) return true;
    if (n % 2 == 0) return false;
    for (std::uint64_t p = 3; p * p <= n; p += 2) {
        if (n % p == 0) return false;
    }
    return true;
}

/// Sieve of Eratosthenes; primes in [2, n].
inline std::vector<std::uint64_t> primes_up_to(std::uint64_t n) {
    std::vector<std::uint64_t> out;
    if (n < 2) return out;
    std::vector<bool> composite(n + 1, false);
    for (std::uint64_t p = 2; p <= n; ++p) {
        if (composite[p]) continue;
        out.push_back(p);
        for (std::uint64_t m = p * p; m <= n; m += p) composite[m] = true;
    }
    return out;
}

/// Legendre: exponent of prime p in n!.
inline std::uint64_t legendre_valuation(std::uint64_t n, std::uint64_t p) {
    std::uint64_t v = 0;
    for (std::uint64_t pk = p; pk <= n; pk *= p) {
        v += n / pk;
        if (pk > n / p) break;
    }
    return v;
}

/// Least e with 2^e >= q.
inline unsigned ceil_log2(std::uint64_t q) {
    unsigned e = 0;
    while ((std::uint64_t{1} << e) < q) ++e;
    return e;
}

/// Reduced a/q mod 1. Copies share a lazily computed factorization of q.
class ArithmeticFrequency {
public:
    ArithmeticFrequency() : ArithmeticFrequency(0, 1) {}

    std::int64_t numerator() const noexcept { return num_; }
    std::int64_t denominator() const noexcept { return den_; }
    double value() const noexcept { return static_cast<double>(num_) / static_cast<double>(den_); }

    const FactoredInt& denominator_factors() const {
        std::call_once(cache_->once, [this] { cache_->factors = factorize(static_cast<std::uint64_t>(den_)); });
        return cache_->factors;
    }

    friend bool operator==(const ArithmeticFrequency& a, const ArithmeticFrequency& b) noexcept {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }

    /// Orders by torus value in [0,1).
    friend bool operator<(const ArithmeticFrequency& a, const ArithmeticFrequency& b) noexcept {
        return static_cast<__int128>(a.num_) * b.den_ < static_cast<__int128>(b.num_) * a.den_;
    }

    std::string to_string() const { return std::to_string(num_) + "/" + std::to_string(den_); }

    friend ArithmeticFrequency reduce_fraction(std::int64_t a, std::int64_t q);

private:
    struct Cache {
        std::once_flag once;
        FactoredInt factors;
    };

    ArithmeticFrequency(std::int64_t a, std::int64_t q)
        : num_(a), den_(q), cache_(std::make_shared<Cache>()) {}

    std::int64_t num_;
    std::int64_t den_;
    std::shared_ptr<Cache> cache_;
};

inline ArithmeticFrequency reduce_fraction(std::int64_t a, std::int64_t q) {
    if (q <= 0) throw std::invalid_argument("reduce_fraction: denominator must be positive");
    std::int64_t r = a % q;
    if (r < 0) r += q;
    if (r == 0) return ArithmeticFrequency(0, 1);
    std::int64_t g = std::gcd(r, q);
    return ArithmeticFrequency(r / g, q / g);
}

/// A point of R/Z stored by its representative in [0,1).
struct TorusPoint {
    double value = 0.0;

    TorusPoint() = default;
    explicit TorusPoint(double x) : value(x - std::floor(x)) {
        if (value >= 1.0) value = 0.0;
    }
};

/// Signed representative of x mod 1 in [-1/2, 1/2).
inline double signed_rep(double x) {
    double r = x - std::floor(x);
    return r >= 0.5 ? r - 1.0 : r;
}

inline double torus_distance(TorusPoint x, TorusPoint y) {
    return std::abs(signed_rep(x.value - y.value));
}

}  // namespace bilin
