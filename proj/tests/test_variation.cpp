#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "bilin/rng.hpp"
#include "bilin/variation.hpp"

using namespace bilin;

namespace {

/// Exhaustive sup over all subsets of size >= 2, in index order.
double brute_vr(const std::vector<Complex>& a, double r) {
    const std::size_t n = a.size();
    double best = 0.0;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        double s = 0.0;
        int last = -1;
        for (std::size_t i = 0; i < n; ++i) {
            if (!(mask >> i & 1)) continue;
            if (last >= 0) s += std::pow(std::abs(a[i] - a[static_cast<std::size_t>(last)]), r);
            last = static_cast<int>(i);
        }
        best = std::max(best, s);
    }
    return std::pow(best, 1.0 / r);
}

std::vector<Complex> random_vec(std::size_t n, SplitMix64& rng) {
    std::vector<Complex> v(n);
    for (auto& x : v) x = Complex(rng.normal(), rng.normal());
    return v;
}

double lr_norm(const std::vector<Complex>& a, double r) {
    double s = 0.0;
    for (auto v : a) s += std::pow(std::abs(v), r);
    return std::pow(s, 1.0 / r);
}

}  // namespace

TEST(Variation, Examples) {
    const std::vector<double> c(7, 2.5);
    for (double r : {1.0, 2.0, 3.5, double(INFINITY)}) EXPECT_EQ(vr_seminorm(c, r).seminorm, 0.0);
    const std::vector<double> mono{-1.0, 0.5, 0.75, 4.0};
    EXPECT_NEAR(vr_seminorm(mono, 1.0).seminorm, 5.0, 1e-15);
    const std::vector<double> zig{0, 1, 0, 1};
    const auto res = vr_seminorm(zig, 2.0);
    EXPECT_NEAR(res.seminorm, std::sqrt(3.0), 1e-15);
    EXPECT_EQ(res.witness, (std::vector<std::size_t>{0, 1, 2, 3}));
    EXPECT_THROW(vr_seminorm(zig, 0.9), std::invalid_argument);
    EXPECT_THROW(vr_seminorm(std::span<const double>{}, 2.0), std::invalid_argument);
}

TEST(Variation, InfiniteExponentIsMaxOscillation) {
    const std::vector<double> a{3, -1, 2, 0.5, 4};
    const auto res = vr_seminorm(a, INFINITY);
    EXPECT_EQ(res.seminorm, 5.0);
    EXPECT_EQ(res.witness, (std::vector<std::size_t>{1, 4}));
}

TEST(Variation, TiesPreferShorterWitness) {
    // At r = 2 the single jump 0 -> 2 beats 0 -> 1 -> 2; a flat sequence ties everywhere.
    const std::vector<double> a{0, 1, 2};
    EXPECT_EQ(vr_seminorm(a, 2.0).witness, (std::vector<std::size_t>{0, 2}));
    const std::vector<double> flat{1, 1, 1};
    EXPECT_EQ(vr_seminorm(flat, 3.0).witness.size(), 1u);
}

TEST(Variation, DynamicProgramMatchesBruteForce) {
    auto rng = SplitMix64::stream(60, 0);
    for (int t = 0; t < 200; ++t) {
        const std::size_t n = 1 + rng.below(10);
        const auto a = random_vec(n, rng);
        const double r = 1.0 + 3.0 * rng.uniform();
        const auto res = vr_seminorm(a, r);
        EXPECT_NEAR(res.seminorm, brute_vr(a, r), 1e-12 * std::max(1.0, res.seminorm));
        double s = 0.0;
        for (std::size_t i = 1; i < res.witness.size(); ++i) {
            ASSERT_LT(res.witness[i - 1], res.witness[i]);
            s += std::pow(std::abs(a[res.witness[i]] - a[res.witness[i - 1]]), r);
        }
        EXPECT_NEAR(std::pow(s, 1.0 / r), res.seminorm, 1e-12 * std::max(1.0, res.seminorm));
        EXPECT_LE(res.seminorm, res.full_norm);
    }
}

TEST(Variation, MonotoneInExponent) {
    auto rng = SplitMix64::stream(61, 0);
    for (int t = 0; t < 100; ++t) {
        const auto a = random_vec(1 + rng.below(40), rng);
        double prev = INFINITY;
        for (double r : {1.0, 1.5, 2.0, 3.0, 6.0, double(INFINITY)}) {
            const double v = vr_seminorm(a, r).seminorm;
            EXPECT_LE(v, prev * (1 + 1e-12));
            prev = v;
        }
    }
}

TEST(Variation, OrderedPartitionSubadditivity) {
    auto rng = SplitMix64::stream(62, 0);
    for (int t = 0; t < 200; ++t) {
        const auto a = random_vec(2 + rng.below(40), rng);
        const std::size_t cut = 1 + rng.below(a.size() - 1);
        const double r = 1.0 + 4.0 * rng.uniform();
        const std::span<const Complex> s(a);
        EXPECT_LE(bold_vr(s, r), 2.0 * (bold_vr(s.first(cut), r) + bold_vr(s.subspan(cut), r)) * (1 + 1e-12));
    }
}

TEST(Variation, LrDomination) {
    // [1, -1]: sup 1 plus jump 2 gives 3 against ||a||_2 = sqrt 2, so 2 is not enough.
    const std::vector<double> pm{1.0, -1.0};
    EXPECT_GT(bold_vr(pm, 2.0), 2.0 * std::sqrt(2.0));
    // Sup <= ||a||_r and each difference is at most |a_s| + |a_t|, so 3 always suffices.
    auto rng = SplitMix64::stream(63, 0);
    for (int t = 0; t < 200; ++t) {
        const auto a = random_vec(1 + rng.below(30), rng);
        const double r = 1.0 + 4.0 * rng.uniform();
        EXPECT_LE(bold_vr(a, r), 3.0 * lr_norm(a, r) * (1 + 1e-12));
    }
}

TEST(Variation, BoldNormExamplesAndAlgebra) {
    const std::vector<Complex> c(5, Complex(3, 4));
    EXPECT_NEAR(bold_vr(c, 2.0), 5.0, 1e-15);
    EXPECT_NEAR(bold_vr(std::vector<Complex>{Complex(0, -2)}, 2.0), 2.0, 1e-15);
    // Product rule on each increment gives the algebra property with constant 1.
    auto rng = SplitMix64::stream(64, 0);
    double worst = 0.0;
    for (int t = 0; t < 200; ++t) {
        const std::size_t n = 1 + rng.below(30);
        const auto a = random_vec(n, rng), b = random_vec(n, rng);
        std::vector<Complex> ab(n);
        for (std::size_t i = 0; i < n; ++i) ab[i] = a[i] * b[i];
        const double r = 1.0 + 3.0 * rng.uniform();
        worst = std::max(worst, bold_vr(ab, r) / (bold_vr(a, r) * bold_vr(b, r)));
    }
    EXPECT_LE(worst, 1.0 + 1e-12);
}

TEST(Lacunary, Examples) {
    EXPECT_TRUE(is_lacunary(std::vector<double>{1, 2, 4, 8}, 1.5));
    EXPECT_FALSE(is_lacunary(std::vector<double>{1, 2, 3}, 1.5));
    EXPECT_TRUE(is_lacunary(std::vector<double>{7}, 100.0));
    EXPECT_THROW(is_lacunary(std::vector<double>{2, 1}, 1.5), std::invalid_argument);
}

TEST(LShape, Examples) {
    const auto one = lshape_dyadic_cover(0, 1, 1);
    ASSERT_EQ(one.size(), 1u);
    EXPECT_EQ(one[0], (DyadicRectangle{1, 1, 1, 1}));
    const auto sq = lshape_dyadic_cover(0, 4, 4);
    std::uint64_t area = 0;
    for (const auto& r : sq) area += r.area();
    EXPECT_EQ(area, 16u);
    EXPECT_THROW(lshape_dyadic_cover(3, 3, 4), std::invalid_argument);
    EXPECT_THROW(lshape_dyadic_cover(1, 5, 4), std::invalid_argument);
}

TEST(LShape, ExhaustivePartitionUpTo64) {
    const std::uint64_t K = 64;
    for (std::uint64_t kc = 1; kc <= K; ++kc) {
        for (std::uint64_t kp = 0; kp < kc; ++kp) {
            std::vector<int> cells(K * K, 0);
            std::map<std::pair<std::uint64_t, std::uint64_t>, int> per_scale;
            for (const auto& r : lshape_dyadic_cover(kp, kc, K)) {
                ASSERT_EQ(r.M1 & (r.M1 - 1), 0u);
                ASSERT_EQ(r.M2 & (r.M2 - 1), 0u);
                ASSERT_LE(r.M1 * r.j1, K);
                ASSERT_LE(r.M2 * r.j2, K);
                ++per_scale[{r.M1, r.M2}];
                for (std::uint64_t x = r.M1 * (r.j1 - 1) + 1; x <= r.M1 * r.j1; ++x) {
                    for (std::uint64_t y = r.M2 * (r.j2 - 1) + 1; y <= r.M2 * r.j2; ++y) ++cells[(x - 1) * K + (y - 1)];
                }
            }
            for (std::uint64_t x = 1; x <= K; ++x) {
                for (std::uint64_t y = 1; y <= K; ++y) {
                    const bool in = std::max(x, y) <= kc && std::max(x, y) > kp;
                    ASSERT_EQ(cells[(x - 1) * K + (y - 1)], in ? 1 : 0) << kp << " " << kc << " " << x << " " << y;
                }
            }
            for (const auto& [scale, count] : per_scale) ASSERT_LE(count, 8) << kp << " " << kc;
        }
    }
}

TEST(RmRhs, Examples) {
    EXPECT_EQ(rm_rhs(std::vector<std::vector<Complex>>(5, std::vector<Complex>(5, 0.0)), 2.0), 0.0);
    EXPECT_NEAR(rm_rhs({{Complex(3, -4)}}, 2.0), 5.0, 1e-15);
    EXPECT_THROW(rm_rhs({{1.0}}, 1.0), std::invalid_argument);
    EXPECT_THROW(rm_rhs({{1.0, 2.0}}, 2.0), std::invalid_argument);
}

TEST(RmRhs, DiagonalVariationFit) {
    // The diagonal starts from the vanishing corner a_{0,0}.
    auto rng = SplitMix64::stream(65, 0);
    const std::size_t K = 16;
    std::vector<double> ratios;
    for (int t = 0; t < 200; ++t) {
        std::vector<std::vector<Complex>> a(K);
        for (auto& row : a) row = random_vec(K, rng);
        std::vector<Complex> diag(K + 1, 0.0);
        for (std::size_t k = 1; k <= K; ++k) diag[k] = a[k - 1][k - 1];
        ratios.push_back(bold_vr(diag, 2.0) / rm_rhs(a, 2.0));
    }
    const double first = *std::max_element(ratios.begin(), ratios.begin() + 100);
    const double second = *std::max_element(ratios.begin() + 100, ratios.end());
    EXPECT_LT(std::max(first, second), 4.0 * std::min(first, second));
    EXPECT_LT(std::max(first, second), 10.0);
}
