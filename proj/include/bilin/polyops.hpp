#pragma once

#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace bilin {

using Int128 = __int128;

struct OverflowError : std::overflow_error {
    using std::overflow_error::overflow_error;
};

/// Polynomial in Z[n] with coefficients a_0..a_d, low to high.
class IntPolynomial {
public:
    IntPolynomial() = default;
    explicit IntPolynomial(std::vector<std::int64_t> coeffs) : c_(std::move(coeffs)) { trim(); }

    static IntPolynomial monomial(unsigned degree, std::int64_t coeff = 1) {
        std::vector<std::int64_t> c(degree + 1, 0);
        c[degree] = coeff;
        return IntPolynomial(std::move(c));
    }

    /// "0,0,1" is n^2.
    static IntPolynomial parse(const std::string& text) {
        std::vector<std::int64_t> c;
        std::stringstream ss(text);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            std::size_t pos = 0;
            long long v = 0;
            try {
                v = std::stoll(tok, &pos);
            } catch (const std::exception&) {
                throw std::invalid_argument("IntPolynomial::parse: bad coefficient '" + tok + "'");
            }
            while (pos < tok.size() && tok[pos] == ' ') ++pos;
            if (pos != tok.size()) throw std::invalid_argument("IntPolynomial::parse: bad coefficient '" + tok + "'");
            c.push_back(v);
        }
        if (c.empty()) throw std::invalid_argument("IntPolynomial::parse: empty coefficient list");
        return IntPolynomial(std::move(c));
    }

    const std::vector<std::int64_t>& coefficients() const noexcept { return c_; }
    bool is_zero() const noexcept { return c_.empty(); }
    /// Degree; the zero polynomial reports 0.
    unsigned degree() const noexcept { return c_.empty() ? 0u : static_cast<unsigned>(c_.size() - 1); }
    std::int64_t leading() const noexcept { return c_.empty() ? 0 : c_.back(); }

    /// Exact Horner evaluation; throws OverflowError instead of wrapping.
    Int128 eval(Int128 n) const {
        Int128 acc = 0;
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) {
            if (__builtin_mul_overflow(acc, n, &acc) || __builtin_add_overflow(acc, static_cast<Int128>(*it), &acc)) {
                throw OverflowError("IntPolynomial::eval: 128-bit overflow");
            }
        }
        return acc;
    }

    /// eval narrowed to 64 bits, throwing if it does not fit.
    std::int64_t eval64(std::int64_t n) const {
        Int128 v = eval(n);
        if (v > INT64_MAX || v < INT64_MIN) throw OverflowError("IntPolynomial::eval64: value exceeds 64 bits");
        return static_cast<std::int64_t>(v);
    }

    /// Evaluation at a real argument.
    double eval_real(double x) const {
        long double acc = 0;
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * x + static_cast<long double>(*it);
        return static_cast<double>(acc);
    }

    /// eval(n) mod q in [0, q) by modular Horner.
    std::uint64_t eval_mod(std::int64_t n, std::uint64_t q) const {
        if (q == 0) throw std::invalid_argument("IntPolynomial::eval_mod: modulus must be positive");
        auto reduce = [q](std::int64_t v) {
            std::int64_t r = static_cast<std::int64_t>(static_cast<Int128>(v) % static_cast<Int128>(q));
            return static_cast<std::uint64_t>(r < 0 ? r + static_cast<std::int64_t>(q) : r);
        };
        const unsigned __int128 nm = reduce(n);
        unsigned __int128 acc = 0;
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = (acc * nm + reduce(*it)) % q;
        return static_cast<std::uint64_t>(acc);
    }

    IntPolynomial derivative() const {
        std::vector<std::int64_t> d;
        for (std::size_t k = 1; k < c_.size(); ++k) {
            std::int64_t v;
            if (__builtin_mul_overflow(static_cast<std::int64_t>(k), c_[k], &v)) {
                throw OverflowError("IntPolynomial::derivative: coefficient overflow");
            }
            d.push_back(v);
        }
        return IntPolynomial(std::move(d));
    }

    friend IntPolynomial operator+(const IntPolynomial& a, const IntPolynomial& b) {
        std::vector<std::int64_t> c(std::max(a.c_.size(), b.c_.size()), 0);
        for (std::size_t i = 0; i < c.size(); ++i) {
            std::int64_t x = i < a.c_.size() ? a.c_[i] : 0;
            std::int64_t y = i < b.c_.size() ? b.c_[i] : 0;
            if (__builtin_add_overflow(x, y, &c[i])) throw OverflowError("IntPolynomial::operator+: overflow");
        }
        return IntPolynomial(std::move(c));
    }

    friend bool operator==(const IntPolynomial&, const IntPolynomial&) = default;

    std::string to_string() const {
        if (c_.empty()) return "0";
        std::string s;
        for (std::size_t i = 0; i < c_.size(); ++i) {
            if (i) s += ",";
            s += std::to_string(c_[i]);
        }
        return s;
    }

private:
    void trim() {
        while (!c_.empty() && c_.back() == 0) c_.pop_back();
    }

    std::vector<std::int64_t> c_;
};

}  // namespace bilin
