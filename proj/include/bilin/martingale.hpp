#pragma once

// Dyadic martingale projections on [0,1), polynomial averages along a multi-frequency torus
// rotation, and a seeded search for large quadratic variation of martingale projection sequences.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "bilin/numbers.hpp"
#include "bilin/polyops.hpp"
#include "bilin/rng.hpp"
#include "bilin/signals.hpp"

namespace bilin {

/// Cell values of a function on [0,1) constant on dyadic cells of length 2^{-K}.
struct DyadicMartingale {
    unsigned K = 0;
    std::vector<Complex> values;

    DyadicMartingale() : values(1, 0.0) {}
    DyadicMartingale(unsigned depth, std::vector<Complex> v) : K(depth), values(std::move(v)) {
        if (depth > 30) throw std::invalid_argument("DyadicMartingale: depth must be at most 30");
        if (values.size() != (std::size_t{1} << depth)) throw std::invalid_argument("DyadicMartingale: need 2^K cell values");
    }
};

/// Average over each dyadic cell of length 2^{-k}; same depth as f.
inline DyadicMartingale martingale_projection(const DyadicMartingale& f, unsigned k) {
    if (k > f.K) throw std::invalid_argument("martingale_projection: k exceeds depth");
    const std::size_t block = std::size_t{1} << (f.K - k);
    std::vector<Complex> out(f.values.size());
    for (std::size_t start = 0; start < out.size(); start += block) {
        Complex s = 0.0;
        for (std::size_t i = 0; i < block; ++i) s += f.values[start + i];
        s /= static_cast<double>(block);
        std::fill(out.begin() + static_cast<std::ptrdiff_t>(start), out.begin() + static_cast<std::ptrdiff_t>(start + block), s);
    }
    return DyadicMartingale(f.K, std::move(out));
}

struct ResourceLimitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Values at the grid points (i_1/R, ..., i_K/R); coordinate 0 varies fastest.
struct TorusGrid {
    unsigned K = 1;
    std::size_t R = 128;
    std::vector<Complex> values;

    TorusGrid(unsigned dims, std::size_t resolution) : K(dims), R(resolution) {
        if (dims == 0 || dims > 4) throw std::invalid_argument("TorusGrid: dimension must be in [1, 4]");
        if (resolution < 64) throw std::invalid_argument("TorusGrid: resolution must be at least 64");
        std::size_t n = 1;
        for (unsigned i = 0; i < dims; ++i) n *= resolution;
        values.assign(n, 0.0);
    }

    std::size_t size() const { return values.size(); }

    std::vector<std::size_t> coords(std::size_t idx) const {
        std::vector<std::size_t> c(K);
        for (unsigned i = 0; i < K; ++i, idx /= R) c[i] = idx % R;
        return c;
    }
};

inline constexpr std::uint64_t kTorusWorkCap = std::uint64_t{1} << 31;

/// E_{n in [N]} f(x_1 + a_1 P(n)/N_1^{d+1}, ..., x_K + a_K P(n)/N_K^{d+1}) with a_i = log p_i,
/// the shifted point rounded to the nearest grid cell.
inline TorusGrid torus_average(const TorusGrid& f, std::span<const std::int64_t> scales, const IntPolynomial& P,
                               std::int64_t N) {
    if (scales.size() != f.K) throw std::invalid_argument("torus_average: need one scale per coordinate");
    if (N < 1) throw std::invalid_argument("torus_average: N must be positive");
    for (std::size_t i = 0; i < scales.size(); ++i) {
        if (scales[i] < 1) throw std::invalid_argument("torus_average: scales must be positive");
    }
    if (static_cast<long double>(f.size()) * static_cast<long double>(N) > static_cast<long double>(kTorusWorkCap)) {
        throw ResourceLimitError("torus_average: R^K * N exceeds the work cap of 2^31");
    }
    const int d = P.degree();
    if (d < 1) throw std::invalid_argument("torus_average: P must be non-constant");
    const auto primes = primes_up_to(16);
    std::vector<long double> rate(f.K);
    for (unsigned i = 0; i < f.K; ++i) {
        rate[i] = std::log(static_cast<long double>(primes[i])) / std::pow(static_cast<long double>(scales[i]), d + 1);
    }
    const auto R = static_cast<std::int64_t>(f.R);
    TorusGrid out(f.K, f.R);
    std::vector<std::size_t> shift(f.K);
    std::vector<std::size_t> stride(f.K, 1);
    for (unsigned i = 1; i < f.K; ++i) stride[i] = stride[i - 1] * f.R;
    for (std::int64_t n = 1; n <= N; ++n) {
        const long double pn = static_cast<long double>(P.eval(n));
        for (unsigned i = 0; i < f.K; ++i) {
            long double t = pn * rate[i];
            t -= std::floor(t);
            shift[i] = static_cast<std::size_t>(((std::llround(t * static_cast<long double>(R)) % R) + R) % R);
        }
        for (std::size_t idx = 0; idx < f.size(); ++idx) {
            std::size_t src = 0, rest = idx;
            for (unsigned i = 0; i < f.K; ++i, rest /= f.R) src += ((rest % f.R + shift[i]) % f.R) * stride[i];
            out.values[idx] += f.values[src];
        }
    }
    for (auto& v : out.values) v /= static_cast<double>(N);
    return out;
}

/// Grid mean over the first m coordinates, the others held fixed.
inline TorusGrid partial_mean(const TorusGrid& f, unsigned m) {
    if (m > f.K) throw std::invalid_argument("partial_mean: m exceeds dimension");
    std::size_t block = 1;
    for (unsigned i = 0; i < m; ++i) block *= f.R;
    TorusGrid out(f.K, f.R);
    for (std::size_t start = 0; start < f.size(); start += block) {
        Complex s = 0.0;
        for (std::size_t i = 0; i < block; ++i) s += f.values[start + i];
        s /= static_cast<double>(block);
        for (std::size_t i = 0; i < block; ++i) out.values[start + i] = s;
    }
    return out;
}

struct V2Score {
    double l2_average = 0.0;   ///< (int_0^1 bold-V^2(x)^2 dx)^{1/2}
    double pointwise_max = 0.0;
};

/// bold-V^2 of (E_k f(x))_{k=0..K} at every x, from one pass over the dyadic tree:
/// the variation DP along a root-to-leaf path only depends on ancestors, so it is shared.
inline V2Score v2_projection_score(const DyadicMartingale& f) {
    const unsigned K = f.K;
    std::vector<std::vector<double>> val(K + 1), best(K + 1), path(K + 1), sup(K + 1);
    val[K].resize(f.values.size());
    for (std::size_t i = 0; i < f.values.size(); ++i) val[K][i] = f.values[i].real();
    for (unsigned k = K; k-- > 0;) {
        val[k].resize(std::size_t{1} << k);
        for (std::size_t i = 0; i < val[k].size(); ++i) val[k][i] = 0.5 * (val[k + 1][2 * i] + val[k + 1][2 * i + 1]);
    }
    for (unsigned k = 0; k <= K; ++k) {
        const std::size_t n = val[k].size();
        best[k].assign(n, 0.0);
        path[k].assign(n, 0.0);
        sup[k].assign(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double b = 0.0;
            for (unsigned j = 0; j < k; ++j) {
                const double diff = val[k][i] - val[j][i >> (k - j)];
                b = std::max(b, best[j][i >> (k - j)] + diff * diff);
            }
            best[k][i] = b;
            path[k][i] = k ? std::max(path[k - 1][i >> 1], b) : b;
            sup[k][i] = std::max(k ? sup[k - 1][i >> 1] : 0.0, std::abs(val[k][i]));
        }
    }
    V2Score s;
    double acc = 0.0;
    for (std::size_t i = 0; i < val[K].size(); ++i) {
        const double v = sup[K][i] + std::sqrt(path[K][i]);
        acc += v * v;
        s.pointwise_max = std::max(s.pointwise_max, v);
    }
    s.l2_average = std::sqrt(acc / static_cast<double>(val[K].size()));
    return s;
}

struct V2GrowthRow {
    unsigned K = 0;
    double best_value = 0.0;      ///< L^2 average of bold-V^2 for the best f found
    double pointwise_max = 0.0;   ///< sup over x of bold-V^2 for that f
    std::int64_t argmax_trial = -1;  ///< -1 when the lifted optimum of a smaller depth won
};

namespace detail {

inline std::vector<Complex> random_pattern(unsigned K, SplitMix64& rng) {
    const std::size_t n = std::size_t{1} << K;
    std::vector<Complex> v(n);
    switch (rng.below(3)) {
        case 0:
            for (auto& x : v) x = rng.sign();
            break;
        case 1: {
            const unsigned c = 1 + static_cast<unsigned>(rng.below(std::min(K, 8u)));
            std::vector<int> coarse(std::size_t{1} << c);
            for (auto& x : coarse) x = rng.sign();
            for (std::size_t i = 0; i < n; ++i) v[i] = coarse[i >> (K - c)];
            break;
        }
        default: {
            // Sign of a random combination of Rademacher functions.
            std::vector<double> w(K);
            for (auto& x : w) x = rng.normal();
            for (std::size_t i = 0; i < n; ++i) {
                double s = 0.0;
                for (unsigned k = 0; k < K; ++k) s += ((i >> (K - 1 - k)) & 1) ? -w[k] : w[k];
                v[i] = s >= 0 ? 1.0 : -1.0;
            }
        }
    }
    return v;
}

/// First-improvement local search flipping whole dyadic subtrees at depths 1..depth_cap.
inline DyadicMartingale greedy_flips(DyadicMartingale f, double& score, unsigned depth_cap, unsigned passes) {
    const unsigned top = std::min(f.K, depth_cap);
    for (unsigned pass = 0; pass < passes; ++pass) {
        bool improved = false;
        for (unsigned c = 1; c <= top; ++c) {
            const std::size_t block = std::size_t{1} << (f.K - c);
            for (std::size_t node = 0; node < (std::size_t{1} << c); ++node) {
                auto flip = [&] {
                    for (std::size_t i = node * block; i < (node + 1) * block; ++i) f.values[i] = -f.values[i];
                };
                flip();
                const double s = v2_projection_score(f).l2_average;
                if (s > score) {
                    score = s;
                    improved = true;
                } else {
                    flip();
                }
            }
        }
        if (!improved) break;
    }
    return f;
}

}  // namespace detail

/// For each depth, random and greedy search over f in {+-1}^{2^K} for large bold-V^2 of
/// (E_k f)_{k=0..K}; the optimum of the previous depth, lifted, seeds the next.
inline std::vector<V2GrowthRow> v2_growth_search(std::span<const unsigned> depths, std::size_t trials, std::uint64_t seed,
                                                 unsigned threads = 1) {
    for (unsigned K : depths) {
        if (K > 16) throw std::invalid_argument("v2_growth_search: depths must be at most 16");
    }
    std::vector<V2GrowthRow> rows;
    DyadicMartingale carried(0, {1.0});
    for (unsigned K : depths) {
        std::vector<double> scores(trials);
        std::vector<DyadicMartingale> cands(trials);
        parallel_for(trials, threads, [&](std::size_t t) {
            auto rng = SplitMix64::stream(seed, (std::uint64_t{K} << 32) | t);
            cands[t] = DyadicMartingale(K, detail::random_pattern(K, rng));
            scores[t] = v2_projection_score(cands[t]).l2_average;
        });
        std::int64_t arg = -1;
        double best = -1.0;
        DyadicMartingale f;
        if (carried.K <= K) {
            std::vector<Complex> lifted(std::size_t{1} << K);
            for (std::size_t i = 0; i < lifted.size(); ++i) lifted[i] = carried.values[i >> (K - carried.K)];
            f = DyadicMartingale(K, std::move(lifted));
            best = v2_projection_score(f).l2_average;
        }
        for (std::size_t t = 0; t < trials; ++t) {
            if (scores[t] > best) best = scores[t], arg = static_cast<std::int64_t>(t), f = cands[t];
        }
        f = detail::greedy_flips(std::move(f), best, 6, 2);
        const V2Score s = v2_projection_score(f);
        rows.push_back({K, s.l2_average, s.pointwise_max, arg});
        carried = f;
    }
    return rows;
}

}  // namespace bilin
