#pragma once

// Bilinear polynomial averages on Z and Z/QZ, their two transposes, the twisted major-arc model
// multiplier on Z/MZ, and the sampling map from the finite adelic grid R_h x Z/QZ to Z.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "bilin/iw.hpp"
#include "bilin/numbers.hpp"
#include "bilin/polyops.hpp"
#include "bilin/signals.hpp"
#include "bilin/spectral.hpp"

namespace bilin {

struct AverageSpec {
    IntPolynomial P1 = IntPolynomial({0, 1});
    IntPolynomial P2 = IntPolynomial({0, 0, 1});
    std::int64_t N = 1;
    bool upper_half = false;

    void validate() const {
        if (N < 1) throw std::invalid_argument("AverageSpec: N must be positive");
    }
};

namespace detail {

/// (1/N) sum_i f(x - a_i) g(x - b_i), computed directly over the exact output window.
inline Sequence shifted_product_average(std::span<const std::int64_t> a, std::span<const std::int64_t> b,
                                        const Sequence& f, const Sequence& g, std::int64_t N) {
    if (f.values.empty() || g.values.empty() || a.empty()) return {};
    std::int64_t lo = std::numeric_limits<std::int64_t>::max();
    std::int64_t hi = std::numeric_limits<std::int64_t>::min();
    for (std::size_t i = 0; i < a.size(); ++i) {
        const std::int64_t s = std::max(f.begin_index() + a[i], g.begin_index() + b[i]);
        const std::int64_t e = std::min(f.end_index() + a[i], g.end_index() + b[i]);
        if (s < e) {
            lo = std::min(lo, s);
            hi = std::max(hi, e);
        }
    }
    if (lo >= hi) return {};
    Sequence out(lo, std::vector<Complex>(static_cast<std::size_t>(hi - lo), 0.0));
    for (std::size_t i = 0; i < a.size(); ++i) {
        const std::int64_t s = std::max(f.begin_index() + a[i], g.begin_index() + b[i]);
        const std::int64_t e = std::min(f.end_index() + a[i], g.end_index() + b[i]);
        const Complex* fp = f.values.data() + (s - a[i] - f.offset);
        const Complex* gp = g.values.data() + (s - b[i] - g.offset);
        Complex* op = out.values.data() + (s - lo);
        for (std::int64_t x = s; x < e; ++x) *op++ += *fp++ * *gp++;
    }
    const double w = 1.0 / static_cast<double>(N);
    for (auto& v : out.values) v *= w;
    return out;
}

}  // namespace detail

/// A_N(f,g)(x) = E_{n in [N]} f(x - P1(n)) g(x - P2(n)); upper half keeps n > N/2 with weight 1/N.
inline Sequence avg_bilinear_Z(const AverageSpec& spec, const Sequence& f, const Sequence& g) {
    spec.validate();
    std::vector<std::int64_t> a, b;
    for (std::int64_t n = first_term(spec.N, spec.upper_half); n <= spec.N; ++n) {
        a.push_back(spec.P1.eval64(n));
        b.push_back(spec.P2.eval64(n));
    }
    return detail::shifted_product_average(a, b, f, g, spec.N);
}

/// First transpose: E_{n in [N]} h(x + n) g(x + n - P(n)).
inline Sequence dual_star(const IntPolynomial& P, std::int64_t N, const Sequence& h, const Sequence& g, bool upper_half) {
    if (N < 1) throw std::invalid_argument("dual_star: N must be positive");
    std::vector<std::int64_t> a, b;
    for (std::int64_t n = first_term(N, upper_half); n <= N; ++n) {
        const std::int64_t p = P.eval64(n);
        a.push_back(-n);
        b.push_back(p - n);
    }
    return detail::shifted_product_average(a, b, h, g, N);
}

/// Second transpose: E_{n in [N]} f(x + P(n) - n) h(x + P(n)).
inline Sequence dual_star_star(const IntPolynomial& P, std::int64_t N, const Sequence& f, const Sequence& h,
                               bool upper_half) {
    if (N < 1) throw std::invalid_argument("dual_star_star: N must be positive");
    std::vector<std::int64_t> a, b;
    for (std::int64_t n = first_term(N, upper_half); n <= N; ++n) {
        const std::int64_t p = P.eval64(n);
        a.push_back(n - p);
        b.push_back(-p);
    }
    return detail::shifted_product_average(a, b, f, h, N);
}

/// E_{y in Z/QZ} f(x - P1(y)) g(x - P2(y)).
inline CyclicFn avg_cyclic(const IntPolynomial& P1, const IntPolynomial& P2, const CyclicFn& f, const CyclicFn& g) {
    if (f.modulus() != g.modulus()) throw std::invalid_argument("avg_cyclic: modulus mismatch");
    const std::size_t Q = f.modulus();
    std::vector<Complex> out(Q, 0.0);
    for (std::size_t y = 0; y < Q; ++y) {
        const std::size_t s1 = P1.eval_mod(static_cast<std::int64_t>(y), Q);
        const std::size_t s2 = P2.eval_mod(static_cast<std::int64_t>(y), Q);
        for (std::size_t x = 0; x < Q; ++x) {
            out[x] += f.values[(x + Q - s1) % Q] * g.values[(x + Q - s2) % Q];
        }
    }
    for (auto& v : out) v /= static_cast<double>(Q);
    return CyclicFn(std::move(out));
}

/// The averaging operator of `spec` acting on Z/MZ (shifts reduced mod M).
inline CyclicFn avg_bilinear_cyclic(const AverageSpec& spec, const CyclicFn& f, const CyclicFn& g) {
    spec.validate();
    if (f.modulus() != g.modulus()) throw std::invalid_argument("avg_bilinear_cyclic: modulus mismatch");
    const std::size_t M = f.modulus();
    std::vector<Complex> out(M, 0.0);
    for (std::int64_t n = first_term(spec.N, spec.upper_half); n <= spec.N; ++n) {
        const std::size_t s1 = spec.P1.eval_mod(n, M), s2 = spec.P2.eval_mod(n, M);
        for (std::size_t x = 0; x < M; ++x) out[x] += f.values[(x + M - s1) % M] * g.values[(x + M - s2) % M];
    }
    for (auto& v : out) v /= static_cast<double>(spec.N);
    return CyclicFn(std::move(out));
}

namespace detail {

/// For each DFT index j of Z/MZ, the frequency alpha in `freqs` with |<j/M - alpha>| <= 2^k
/// (index into freqs, or -1) and the offset xi = <j/M - alpha>.
struct ArcAssignment {
    std::vector<int> owner;
    std::vector<double> offset;
};

inline ArcAssignment assign_arcs(std::size_t M, const std::vector<ArithmeticFrequency>& freqs, int k) {
    ArcAssignment asg{std::vector<int>(M, -1), std::vector<double>(M, 0.0)};
    const auto m = static_cast<std::int64_t>(M);
    const long double width = std::ldexp(1.0L, k);
    for (std::size_t idx = 0; idx < freqs.size(); ++idx) {
        const std::int64_t a = freqs[idx].numerator(), q = freqs[idx].denominator();
        const Int128 den = static_cast<Int128>(m) * q;
        for (std::int64_t j = 0; j < m; ++j) {
            Int128 num = (static_cast<Int128>(j) * q - static_cast<Int128>(a) * m) % den;
            if (num < 0) num += den;
            if (2 * num >= den) num -= den;
            const long double xi = static_cast<long double>(num) / static_cast<long double>(den);
            if (std::abs(xi) > width) continue;
            if (asg.owner[j] >= 0) throw AliasingError(freqs[asg.owner[j]], freqs[idx], static_cast<double>(width));
            asg.owner[j] = static_cast<int>(idx);
            asg.offset[j] = static_cast<double>(xi);
        }
    }
    return asg;
}

}  // namespace detail

/// Twisted bilinear multiplier on Z/MZ:
///   sum_{alpha_i of height exactly 2^{l_i}} arith(alpha1, alpha2)
///     * sum_{xi_i} m(xi1, xi2) f^(alpha1 + xi1) g^(alpha2 + xi2) e(-x(alpha1 + alpha2 + xi1 + xi2)),
/// with xi_i ranging over DFT offsets |xi_i| <= 2^{k_i}.
template <class Symbol, class Arith>
CyclicFn model_bilinear(const CyclicFn& f, const CyclicFn& g, unsigned l1, unsigned l2, int k1, int k2, Symbol&& m,
                        Arith&& arith, const IWConfig& cfg) {
    if (f.modulus() != g.modulus()) throw std::invalid_argument("model_bilinear: modulus mismatch");
    const std::size_t M = f.modulus();
    if (!is_power_of_two(M) || M > 4096) throw std::invalid_argument("model_bilinear: M must be a power of two <= 2^12");
    const MajorArcSet s1 = major_arc_set(l1, k1, cfg, ArcMode::exact);
    const MajorArcSet s2 = major_arc_set(l2, k2, cfg, ArcMode::exact);
    const auto a1 = detail::assign_arcs(M, s1.frequencies, k1);
    const auto a2 = detail::assign_arcs(M, s2.frequencies, k2);
    const DualCyclicFn F = dft_cyclic(f), G = dft_cyclic(g);

    std::vector<std::size_t> j1s, j2s;
    for (std::size_t j = 0; j < M; ++j) {
        if (a1.owner[j] >= 0 && F.values[j] != 0.0) j1s.push_back(j);
        if (a2.owner[j] >= 0 && G.values[j] != 0.0) j2s.push_back(j);
    }
    std::map<std::pair<int, int>, Complex> arith_cache;
    DualCyclicFn H{std::vector<Complex>(M, 0.0)};
    for (std::size_t j1 : j1s) {
        for (std::size_t j2 : j2s) {
            const auto key = std::make_pair(a1.owner[j1], a2.owner[j2]);
            auto it = arith_cache.find(key);
            if (it == arith_cache.end()) {
                it = arith_cache.emplace(key, arith(s1.frequencies[key.first], s2.frequencies[key.second])).first;
            }
            const Complex w = it->second * m(a1.offset[j1], a2.offset[j2]);
            H.values[(j1 + j2) % M] += w * F.values[j1] * G.values[j2];
        }
    }
    return idft_cyclic(H);
}

/// S_Q F(x) = F(x, x mod Q) at the integers of the grid window.
inline Sequence sample_grid(const GridFn& F) {
    const double steps = 1.0 / F.h;
    if (std::abs(steps - std::round(steps)) > 1e-9 || std::abs(F.L - std::round(F.L)) > 1e-9) {
        throw std::invalid_argument("sample_grid: grid does not contain the integers of its window");
    }
    const auto per = static_cast<std::int64_t>(std::llround(steps));
    const auto L = static_cast<std::int64_t>(std::llround(F.L));
    const auto Q = static_cast<std::int64_t>(F.Q);
    Sequence out(-L, std::vector<Complex>(static_cast<std::size_t>(2 * L + 1)));
    for (std::int64_t x = -L; x <= L; ++x) {
        const auto i = static_cast<std::size_t>((x + L) * per);
        const auto r = static_cast<std::size_t>(((x % Q) + Q) % Q);
        out.values[static_cast<std::size_t>(x + L)] = F(i, r);
    }
    return out;
}

struct BandTerm {
    double theta = 0.0;      ///< real frequency in [-c0/Q, c0/Q]
    std::int64_t residue = 0;  ///< residue frequency b/Q
    Complex amplitude = 1.0;
};

struct GridParams {
    double h = 1.0 / 64;
    double L = 0.0;  ///< 0 selects 8Q
};

/// F(x, r) = w(x) sum_t amp_t e(x theta_t + r b_t / Q) with a Gaussian envelope
/// w(x) = exp(-pi x^2 / sigma^2), sigma = L / sqrt(2).
inline GridFn make_bandlimited(std::size_t Q, double c0, std::span<const BandTerm> terms, GridParams params = {}) {
    if (Q == 0) throw std::invalid_argument("make_bandlimited: Q must be positive");
    if (!(c0 > 0.0 && c0 < 0.5)) throw std::invalid_argument("make_bandlimited: c0 must lie in (0, 1/2)");
    const double band = c0 / static_cast<double>(Q);
    for (const auto& t : terms) {
        if (std::abs(t.theta) > band) throw std::invalid_argument("make_bandlimited: frequency outside [-c0/Q, c0/Q]");
    }
    const double L = params.L > 0 ? params.L : 8.0 * static_cast<double>(Q);
    GridFn F(params.h, L, Q);
    const double sigma2 = L * L / 2.0;

    std::map<std::size_t, std::vector<const BandTerm*>> by_residue;
    for (const auto& t : terms) {
        const auto q = static_cast<std::int64_t>(Q);
        by_residue[static_cast<std::size_t>(((t.residue % q) + q) % q)].push_back(&t);
    }
    std::vector<std::vector<Complex>> chars;
    std::vector<std::size_t> residues;
    for (const auto& [b, _] : by_residue) {
        residues.push_back(b);
        std::vector<Complex> row(Q);
        for (std::size_t r = 0; r < Q; ++r) {
            row[r] = expi_rational(static_cast<std::int64_t>(r * b), static_cast<std::int64_t>(Q));
        }
        chars.push_back(std::move(row));
    }
    for (std::size_t i = 0; i < F.points; ++i) {
        const double x = F.x_at(i);
        const double w = std::exp(-std::numbers::pi * x * x / sigma2);
        for (std::size_t c = 0; c < residues.size(); ++c) {
            Complex cb = 0.0;
            for (const BandTerm* t : by_residue[residues[c]]) cb += t->amplitude * expi(x * t->theta);
            cb *= w;
            for (std::size_t r = 0; r < Q; ++r) F(i, r) += cb * chars[c][r];
        }
    }
    return F;
}

/// ||S_Q F||_{l^p(Z)} / ||F||_{L^p(R x Z/QZ)}.
inline double sampling_ratio(const GridFn& F, double p) { return lp_norm(sample_grid(F), p) / lp_norm(F, p); }

}  // namespace bilin
