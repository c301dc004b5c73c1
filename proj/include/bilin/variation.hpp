#pragma once

// r-variation seminorms computed exactly by dynamic programming, lacunarity checks, and the dyadic
// rectangle cover behind the two-parameter Rademacher-Menshov inequality.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "bilin/signals.hpp"

namespace bilin {

struct VariationResult {
    double seminorm = 0.0;
    double full_norm = 0.0;               ///< sup_t ||a_t|| + seminorm
    std::vector<std::size_t> witness;     ///< indices of an optimal subsequence
};

namespace detail {

inline bool is_infinite_exponent(double r) { return std::isinf(r) && r > 0; }

/// Values within a few ulps count as ties, so the shorter witness wins deterministically.
inline bool strictly_better(double cand, std::size_t cand_len, double best, std::size_t best_len) {
    const double tol = 1e-14 * std::max({1.0, std::abs(cand), std::abs(best)});
    if (cand > best + tol) return true;
    if (cand < best - tol) return false;
    return cand_len < best_len;
}

}  // namespace detail

/// V^r of (a_t) under the distance `dist(a, b) = ||a - b||`, and sup norm `norm`.
template <class T, class Dist, class Norm>
VariationResult vr_seminorm(std::span<const T> seq, double r, Dist dist, Norm norm) {
    if (seq.empty()) throw std::invalid_argument("vr_seminorm: empty sequence");
    if (!(r >= 1.0)) throw std::invalid_argument("vr_seminorm: r must be at least 1");
    const std::size_t n = seq.size();
    VariationResult res;
    double sup = 0.0;
    for (const auto& a : seq) sup = std::max(sup, static_cast<double>(norm(a)));

    if (detail::is_infinite_exponent(r)) {
        std::size_t bi = 0, bj = 0;
        double best = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                const double v = dist(seq[j], seq[i]);
                if (v > best) best = v, bi = i, bj = j;
            }
        }
        res.seminorm = best;
        res.witness = best > 0 ? std::vector<std::size_t>{bi, bj} : std::vector<std::size_t>{0};
    } else if (std::abs(r - 1.0) <= 1e-12) {
        // The triangle inequality makes the full index set optimal.
        double total = 0.0;
        for (std::size_t i = 0; i + 1 < n; ++i) total += dist(seq[i + 1], seq[i]);
        res.seminorm = total;
        res.witness.resize(n);
        for (std::size_t i = 0; i < n; ++i) res.witness[i] = i;
    } else {
        // best[i]: largest sum of r-th powers along a subsequence ending at i.
        std::vector<double> best(n, 0.0);
        std::vector<std::size_t> len(n, 1), prev(n, n);
        for (std::size_t i = 1; i < n; ++i) {
            for (std::size_t j = 0; j < i; ++j) {
                const double cand = best[j] + std::pow(static_cast<double>(dist(seq[i], seq[j])), r);
                if (detail::strictly_better(cand, len[j] + 1, best[i], len[i])) {
                    best[i] = cand;
                    len[i] = len[j] + 1;
                    prev[i] = j;
                }
            }
        }
        std::size_t end = 0;
        for (std::size_t i = 1; i < n; ++i) {
            if (detail::strictly_better(best[i], len[i], best[end], len[end])) end = i;
        }
        for (std::size_t i = end; i != n; i = prev[i]) res.witness.push_back(i);
        std::reverse(res.witness.begin(), res.witness.end());
        res.seminorm = std::pow(best[end], 1.0 / r);
    }
    res.full_norm = sup + res.seminorm;
    return res;
}

inline VariationResult vr_seminorm(std::span<const Complex> seq, double r) {
    return vr_seminorm(
        seq, r, [](Complex a, Complex b) { return std::abs(a - b); }, [](Complex a) { return std::abs(a); });
}

inline VariationResult vr_seminorm(std::span<const double> seq, double r) {
    return vr_seminorm(
        seq, r, [](double a, double b) { return std::abs(a - b); }, [](double a) { return std::abs(a); });
}

/// bold-V^r = sup_t ||a_t|| + V^r.
inline double bold_vr(std::span<const Complex> seq, double r) { return vr_seminorm(seq, r).full_norm; }
inline double bold_vr(std::span<const double> seq, double r) { return vr_seminorm(seq, r).full_norm; }

/// True iff every consecutive ratio exceeds lambda.
inline bool is_lacunary(std::span<const double> scales, double lambda) {
    if (!std::is_sorted(scales.begin(), scales.end())) throw std::invalid_argument("is_lacunary: scales must be sorted");
    for (std::size_t i = 0; i + 1 < scales.size(); ++i) {
        if (!(scales[i + 1] > lambda * scales[i])) return false;
    }
    return true;
}

/// Cells {M1(j1-1)+1, ..., M1 j1} x {M2(j2-1)+1, ..., M2 j2}.
struct DyadicRectangle {
    std::uint64_t M1 = 1, M2 = 1;
    std::uint64_t j1 = 1, j2 = 1;

    std::uint64_t area() const { return M1 * M2; }
    bool operator==(const DyadicRectangle&) const = default;
};

namespace detail {

struct DyadicInterval {
    std::uint64_t M, j;
};

/// Maximal dyadic intervals (M(j-1), Mj] partitioning (a, b]; at most two per scale.
inline std::vector<DyadicInterval> maximal_dyadic(std::uint64_t a, std::uint64_t b) {
    std::vector<DyadicInterval> out;
    std::uint64_t x = a;
    while (x < b) {
        std::uint64_t M = 1;
        while ((x % (2 * M)) == 0 && x + 2 * M <= b) M *= 2;
        out.push_back({M, x / M + 1});
        x += M;
    }
    return out;
}

}  // namespace detail

/// Dyadic rectangles partitioning [k_cur]^2 \ [k_prev]^2.
inline std::vector<DyadicRectangle> lshape_dyadic_cover(std::uint64_t k_prev, std::uint64_t k_cur, std::uint64_t K) {
    if (!(k_prev < k_cur && k_cur <= K)) throw std::invalid_argument("lshape_dyadic_cover: need 0 <= k_prev < k_cur <= K");
    std::vector<DyadicRectangle> out;
    const auto outer = detail::maximal_dyadic(0, k_cur);
    const auto inner = detail::maximal_dyadic(0, k_prev);
    const auto strip = detail::maximal_dyadic(k_prev, k_cur);
    // (k_prev, k_cur] x [k_cur]  and  [k_prev] x (k_prev, k_cur].
    for (const auto& x : strip)
        for (const auto& y : outer) out.push_back({x.M, y.M, x.j, y.j});
    for (const auto& x : inner)
        for (const auto& y : strip) out.push_back({x.M, y.M, x.j, y.j});
    return out;
}

/// sum over dyadic M1, M2 <= K of the l^r norm over (j1, j2) of the double difference of a at (M1 j1, M2 j2).
/// `a[k1-1][k2-1]` holds a_{k1,k2} for 1 <= k1, k2 <= K; a vanishes on the zero row and column.
inline double rm_rhs(const std::vector<std::vector<Complex>>& a, double r) {
    if (!(r > 1.0)) throw std::invalid_argument("rm_rhs: r must exceed 1");
    const std::size_t K = a.size();
    for (const auto& row : a) {
        if (row.size() != K) throw std::invalid_argument("rm_rhs: matrix must be square");
    }
    auto at = [&](std::uint64_t k1, std::uint64_t k2) -> Complex {
        return (k1 == 0 || k2 == 0) ? Complex{0.0} : a[k1 - 1][k2 - 1];
    };
    const bool inf = detail::is_infinite_exponent(r);
    double total = 0.0;
    for (std::uint64_t M1 = 1; M1 <= K; M1 *= 2) {
        for (std::uint64_t M2 = 1; M2 <= K; M2 *= 2) {
            double acc = 0.0;
            for (std::uint64_t j1 = 1; M1 * j1 <= K; ++j1) {
                for (std::uint64_t j2 = 1; M2 * j2 <= K; ++j2) {
                    const Complex d = at(M1 * j1, M2 * j2) - at(M1 * (j1 - 1), M2 * j2) - at(M1 * j1, M2 * (j2 - 1)) +
                                      at(M1 * (j1 - 1), M2 * (j2 - 1));
                    acc = inf ? std::max(acc, std::abs(d)) : acc + std::pow(std::abs(d), r);
                }
            }
            total += inf ? acc : std::pow(acc, 1.0 / r);
        }
    }
    return total;
}

}  // namespace bilin
