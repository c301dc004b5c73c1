#pragma once

// Functions on Z, Z/QZ and the finite adelic grid R_h x Z/QZ, with Fourier transforms in the
// normalization F f(xi) = int f(x) e(x xi) dmu(x).

#include <fftw3.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <complex>
#include <cstdint>
#include <istream>
#include <mutex>
#include <numbers>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bilin/numbers.hpp"
#include "bilin/polyops.hpp"

namespace bilin {

using Complex = std::complex<double>;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// e(x) = exp(2 pi i x), reduced mod 1 before exponentiating.
inline Complex expi(double x) {
    double r = signed_rep(x);
    return {std::cos(kTwoPi * r), std::sin(kTwoPi * r)};
}

/// e(r/q) for an exact residue.
inline Complex expi_rational(std::int64_t r, std::int64_t q) {
    std::int64_t m = r % q;
    if (m < 0) m += q;
    if (2 * m >= q) m -= q;
    double ang = kTwoPi * static_cast<double>(m) / static_cast<double>(q);
    return {std::cos(ang), std::sin(ang)};
}

/// Fractional part of a*xi in [0,1), exact for |xi| >= 2^-73 (xi is a dyadic rational).
inline double phase_frac(Int128 a, double xi) {
    if (a == 0 || xi == 0.0 || !std::isfinite(xi)) return 0.0;
    int exp2 = 0;
    const double m = std::frexp(xi, &exp2);
    const auto mant = static_cast<std::int64_t>(std::ldexp(m, 53));
    const int k = 53 - exp2;
    if (k <= 0) return 0.0;
    if (k <= 126) {
        using U = unsigned __int128;
        const U prod = static_cast<U>(a) * static_cast<U>(static_cast<Int128>(mant));
        const U mask = (U{1} << k) - 1;
        const long double f = std::ldexp(static_cast<long double>(prod & mask), -k);
        return f >= 1.0L ? 0.0 : static_cast<double>(f);
    }
    long double v = static_cast<long double>(a) * static_cast<long double>(xi);
    v -= std::floor(v);
    return v >= 1.0L ? 0.0 : static_cast<double>(v);
}

/// Finitely supported function on Z: values on [offset, offset + size).
struct Sequence {
    std::int64_t offset = 0;
    std::vector<Complex> values;

    Sequence() = default;
    Sequence(std::int64_t off, std::vector<Complex> v) : offset(off), values(std::move(v)) {}

    static Sequence delta(std::int64_t at, Complex value = 1.0) { return Sequence(at, {value}); }

    std::int64_t begin_index() const noexcept { return offset; }
    std::int64_t end_index() const noexcept { return offset + static_cast<std::int64_t>(values.size()); }

    Complex at(std::int64_t x) const noexcept {
        if (x < offset || x >= end_index()) return 0.0;
        return values[static_cast<std::size_t>(x - offset)];
    }
};

/// Function on Z/QZ with normalized counting measure.
struct CyclicFn {
    std::vector<Complex> values;

    CyclicFn() = default;
    explicit CyclicFn(std::vector<Complex> v) : values(std::move(v)) {
        if (values.empty()) throw std::invalid_argument("CyclicFn: modulus must be positive");
    }
    static CyclicFn constant(std::size_t Q, Complex c) { return CyclicFn(std::vector<Complex>(Q, c)); }

    std::size_t modulus() const noexcept { return values.size(); }
    Complex operator[](std::int64_t x) const noexcept {
        const auto Q = static_cast<std::int64_t>(values.size());
        std::int64_t r = x % Q;
        return values[static_cast<std::size_t>(r < 0 ? r + Q : r)];
    }
};

/// Function on the dual group (1/Q)Z/Z with counting measure; index j is frequency j/Q.
struct DualCyclicFn {
    std::vector<Complex> values;
    std::size_t modulus() const noexcept { return values.size(); }
};

/// Function on hZ cap [-L, L] x Z/QZ; cell (i, r) sits at x = -L + i h.
struct GridFn {
    double h = 1.0 / 64;
    double L = 8.0;
    std::size_t Q = 1;
    std::size_t points = 0;
    std::vector<Complex> values;  // row-major: values[i * Q + r]

    GridFn() = default;
    GridFn(double step, double halfwidth, std::size_t modulus) : h(step), L(halfwidth), Q(modulus) {
        if (!(h > 0) || !(L > 0) || Q == 0) throw std::invalid_argument("GridFn: step, halfwidth and modulus must be positive");
        const double inv = 1.0 / h;
        if (std::abs(inv - std::round(inv)) > 1e-9) throw std::invalid_argument("GridFn: step must divide 1");
        const double cells = 2.0 * L / h;
        if (std::abs(cells - std::round(cells)) > 1e-9 || std::abs(L - std::round(L)) > 1e-9) {
            throw std::invalid_argument("GridFn: halfwidth must be an integer multiple of the step");
        }
        points = static_cast<std::size_t>(std::llround(cells)) + 1;
        values.assign(points * Q, 0.0);
    }

    double x_at(std::size_t i) const noexcept { return -L + static_cast<double>(i) * h; }
    std::size_t steps_per_unit() const noexcept { return static_cast<std::size_t>(std::llround(1.0 / h)); }
    Complex& operator()(std::size_t i, std::size_t r) { return values[i * Q + r]; }
    Complex operator()(std::size_t i, std::size_t r) const { return values[i * Q + r]; }
};

namespace detail {

template <class Range>
double lp_sum(const Range& vals, double p, double weight) {
    if (!(p > 0)) throw std::invalid_argument("lp_norm: exponent must be positive");
    if (std::isinf(p)) {
        double m = 0.0;
        for (const Complex& v : vals) m = std::max(m, std::abs(v));
        return m;
    }
    double s = 0.0;
    if (p == 2.0) {
        for (const Complex& v : vals) s += std::norm(v);
        return std::sqrt(s * weight);
    }
    for (const Complex& v : vals) s += std::pow(std::abs(v), p);
    return std::pow(s * weight, 1.0 / p);
}

}  // namespace detail

inline double lp_norm(const Sequence& f, double p) { return detail::lp_sum(f.values, p, 1.0); }
inline double lp_norm(const CyclicFn& f, double p) {
    return detail::lp_sum(f.values, p, 1.0 / static_cast<double>(f.modulus()));
}
inline double lp_norm(const DualCyclicFn& f, double p) { return detail::lp_sum(f.values, p, 1.0); }
inline double lp_norm(const GridFn& f, double p) {
    return detail::lp_sum(f.values, p, f.h / static_cast<double>(f.Q));
}

/// Sum of f(x) g(x) without conjugation.
inline Complex inner(const Sequence& f, const Sequence& g) {
    const std::int64_t lo = std::max(f.begin_index(), g.begin_index());
    const std::int64_t hi = std::min(f.end_index(), g.end_index());
    Complex s = 0.0;
    for (std::int64_t x = lo; x < hi; ++x) s += f.at(x) * g.at(x);
    return s;
}

inline Complex inner(const CyclicFn& f, const CyclicFn& g) {
    if (f.modulus() != g.modulus()) throw std::invalid_argument("inner: modulus mismatch");
    Complex s = 0.0;
    for (std::size_t x = 0; x < f.modulus(); ++x) s += f.values[x] * g.values[x];
    return s / static_cast<double>(f.modulus());
}

inline bool is_power_of_two(std::uint64_t n) { return n != 0 && (n & (n - 1)) == 0; }

namespace detail {

inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

/// Unnormalized sum_x in[x] exp(sign * 2 pi i x j / n) via FFTW.
inline std::vector<Complex> fftw_transform(const std::vector<Complex>& in, int sign) {
    const int n = static_cast<int>(in.size());
    std::vector<Complex> src = in;
    std::vector<Complex> out(in.size());
    auto* ip = reinterpret_cast<fftw_complex*>(src.data());
    auto* op = reinterpret_cast<fftw_complex*>(out.data());
    fftw_plan plan;
    {
        std::lock_guard lock(fftw_planner_mutex());
        plan = fftw_plan_dft_1d(n, ip, op, sign > 0 ? FFTW_BACKWARD : FFTW_FORWARD, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(plan);
    }
    return out;
}

/// Unnormalized sum_x in[x] e(sign * x j / n) by direct summation with exact phase indices.
inline std::vector<Complex> direct_transform(const std::vector<Complex>& in, int sign) {
    const std::size_t n = in.size();
    std::vector<Complex> table(n);
    for (std::size_t r = 0; r < n; ++r) {
        table[r] = expi_rational(sign * static_cast<std::int64_t>(r), static_cast<std::int64_t>(n));
    }
    std::vector<Complex> out(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        Complex s = 0.0;
        std::size_t idx = 0;
        for (std::size_t x = 0; x < n; ++x) {
            s += in[x] * table[idx];
            idx += j;
            if (idx >= n) idx -= n;
        }
        out[j] = s;
    }
    return out;
}

inline std::vector<Complex> cyclic_transform(const std::vector<Complex>& in, int sign) {
    return is_power_of_two(in.size()) ? fftw_transform(in, sign) : direct_transform(in, sign);
}

}  // namespace detail

/// F(j/Q) = E_x f(x) e(x j / Q).
inline DualCyclicFn dft_cyclic(const CyclicFn& f) {
    DualCyclicFn out{detail::cyclic_transform(f.values, +1)};
    const double inv = 1.0 / static_cast<double>(f.modulus());
    for (auto& v : out.values) v *= inv;
    return out;
}

/// f(x) = sum_j F(j/Q) e(-x j / Q).
inline CyclicFn idft_cyclic(const DualCyclicFn& F) {
    if (F.values.empty()) throw std::invalid_argument("idft_cyclic: empty input");
    return CyclicFn(detail::cyclic_transform(F.values, -1));
}

/// Sum_x f(x) e(x xi) over the support.
inline Complex fourier_at(const Sequence& f, TorusPoint xi) {
    Complex s = 0.0;
    for (std::size_t i = 0; i < f.values.size(); ++i) {
        const std::int64_t x = f.offset + static_cast<std::int64_t>(i);
        s += f.values[i] * expi(phase_frac(x, xi.value));
    }
    return s;
}

/// Smooth even cutoff: 1 on [-1/2, 1/2], 0 outside (-1, 1).
inline double bump_eta(double x) {
    const double a = std::abs(x);
    if (a <= 0.5) return 1.0;
    if (a >= 1.0) return 0.0;
    const double t = 2.0 * (1.0 - a);
    auto s = [](double u) { return u <= 0.0 ? 0.0 : std::exp(-1.0 / u); };
    const double st = s(t);
    return st / (st + s(1.0 - t));
}

/// eta(xi / 2^k).
inline double eta_leq(int k, double xi) { return bump_eta(std::ldexp(xi, -k)); }

namespace detail {

inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw std::invalid_argument("csv: bad number '" + s + "'");
    return v;
}

inline void write_rows(std::ostream& os, std::int64_t first_index, std::span<const Complex> vals) {
    os << "index,re,im\n";
    for (std::size_t i = 0; i < vals.size(); ++i) {
        os << first_index + static_cast<std::int64_t>(i) << ',' << format_double(vals[i].real()) << ','
           << format_double(vals[i].imag()) << '\n';
    }
}

inline std::vector<std::pair<std::int64_t, Complex>> read_rows(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != "index,re,im") throw std::invalid_argument("csv: expected header index,re,im");
    std::vector<std::pair<std::int64_t, Complex>> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string a, b, c;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, c)) {
            throw std::invalid_argument("csv: malformed row '" + line + "'");
        }
        rows.emplace_back(std::stoll(a), Complex(parse_double(b), parse_double(c)));
    }
    return rows;
}

}  // namespace detail

inline void write_csv(std::ostream& os, const Sequence& f) { detail::write_rows(os, f.offset, f.values); }
inline void write_csv(std::ostream& os, const CyclicFn& f) { detail::write_rows(os, 0, f.values); }

/// Rows must be consecutive indices.
inline Sequence read_sequence_csv(std::istream& is) {
    auto rows = detail::read_rows(is);
    Sequence s;
    if (rows.empty()) return s;
    s.offset = rows.front().first;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].first != s.offset + static_cast<std::int64_t>(i)) throw std::invalid_argument("csv: indices not consecutive");
        s.values.push_back(rows[i].second);
    }
    return s;
}

inline CyclicFn read_cyclic_csv(std::istream& is) {
    Sequence s = read_sequence_csv(is);
    if (s.offset != 0) throw std::invalid_argument("csv: cyclic function must start at index 0");
    return CyclicFn(std::move(s.values));
}

}  // namespace bilin
