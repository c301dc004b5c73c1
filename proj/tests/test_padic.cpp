#include <gtest/gtest.h>

#include <cmath>

#include "bilin/averages.hpp"
#include "bilin/padic.hpp"
#include "bilin/rng.hpp"

using namespace bilin;

namespace {

const IntPolynomial kLin = IntPolynomial::parse("0,1");
const IntPolynomial kSq = IntPolynomial::parse("0,0,1");

CyclicFn random_unit(std::size_t Q, SplitMix64& rng, bool mean_zero) {
    std::vector<Complex> v(Q);
    for (auto& x : v) x = Complex(rng.normal(), rng.normal());
    CyclicFn f(std::move(v));
    if (mean_zero) f = mean_zero_split(f).second;
    const double n = lp_norm(f, 2.0);
    for (auto& x : f.values) x /= n;
    return f;
}

}  // namespace

TEST(Counting, Examples) {
    for (auto [p, j] : std::vector<std::pair<std::uint64_t, unsigned>>{{2, 5}, {3, 3}, {7, 2}}) {
        const auto prof = counting_fn(kLin, p, j);
        for (auto v : prof.h) EXPECT_EQ(v, 1u);
    }
    const auto sq = counting_fn(kSq, 3, 2);
    std::vector<std::uint64_t> brute(9, 0);
    for (int x = 0; x < 9; ++x) ++brute[(x * x) % 9];
    EXPECT_EQ(sq.h, brute);
    EXPECT_EQ(sq.h, (std::vector<std::uint64_t>{3, 2, 0, 0, 2, 0, 0, 2, 0}));
    const auto c = counting_fn(IntPolynomial::parse("4"), 5, 2);
    EXPECT_EQ(c.h[4], 25u);
    EXPECT_EQ(c.max_count(), 25u);
}

TEST(Counting, Preconditions) {
    EXPECT_THROW(counting_fn(kSq, 4, 2), std::invalid_argument);
    EXPECT_THROW(counting_fn(kSq, 3, 0), std::invalid_argument);
    EXPECT_THROW(counting_fn(kSq, 2, 25), std::out_of_range);
    EXPECT_NO_THROW(counting_fn(kLin, 2, 24));
}

TEST(Counting, MassAndNormProperties) {
    for (const auto& P : {kSq, IntPolynomial::parse("1,0,0,1"), IntPolynomial::parse("0,3,0,0,1")}) {
        for (std::uint64_t p : {2, 3, 5, 7}) {
            for (unsigned j = 1; j <= 5; ++j) {
                const auto prof = counting_fn(P, p, j);
                std::uint64_t mass = 0;
                for (auto v : prof.h) mass += v;
                EXPECT_EQ(mass, prof.modulus());
                EXPECT_NEAR(ls_norm_normalized(prof, 1.0), 1.0, 1e-14);
                double prev = 0.0;
                for (double s : {0.25, 0.5, 1.0, 1.5, 1.8, 2.5, 4.0}) {
                    const double v = ls_norm_normalized(prof, s);
                    EXPECT_GE(v, prev * (1 - 1e-14));
                    prev = v;
                }
            }
        }
    }
    EXPECT_THROW(ls_norm_normalized(counting_fn(kSq, 3, 1), 0.0), std::invalid_argument);
}

TEST(Counting, LsNormOfSquaresStaysBounded) {
    const double at3 = ls_norm_normalized(counting_fn(kSq, 3, 3), 1.8);
    for (unsigned j = 1; j <= 9; ++j) EXPECT_LE(ls_norm_normalized(counting_fn(kSq, 3, j), 1.8), 2.0 * at3) << j;
}

TEST(WeakLevel, Examples) {
    const auto sq = counting_fn(kSq, 3, 2);
    EXPECT_EQ(weak_level_count(sq, 1.0), 4u);
    EXPECT_EQ(weak_level_count(sq, 0.5), 4u);
    EXPECT_EQ(weak_level_count(sq, 3.0), 1u);
    EXPECT_EQ(weak_level_count(sq, 3.5), 0u);
    EXPECT_THROW(weak_level_count(sq, 0.0), std::invalid_argument);
}

TEST(WeakLevel, FittedConstantStableAcrossLevels) {
    const std::vector<double> lambdas{2, 4, 8, 16};
    for (std::uint64_t p : {3, 5}) {
        double lo = INFINITY, hi = 0.0;
        for (unsigned j = 1; j <= 8; ++j) {
            const double c = weak_fit_constant(counting_fn(kSq, p, j), 2, lambdas);
            lo = std::min(lo, c);
            hi = std::max(hi, c);
        }
        EXPECT_GT(lo, 0.0);
        EXPECT_LE(hi, 4.0 * lo) << p;
    }
}

TEST(MeanZero, Examples) {
    const auto [m, f0] = mean_zero_split(CyclicFn::constant(6, Complex(2, -1)));
    EXPECT_NEAR(std::abs(m - Complex(2, -1)), 0.0, 1e-15);
    EXPECT_LT(lp_norm(f0, INFINITY), 1e-15);

    std::vector<Complex> chi(10);
    for (int x = 0; x < 10; ++x) chi[x] = expi_rational(3 * x, 10);
    const auto [m2, g0] = mean_zero_split(CyclicFn(chi));
    EXPECT_LT(std::abs(m2), 1e-15);
    for (int x = 0; x < 10; ++x) EXPECT_NEAR(std::abs(g0.values[x] - chi[x]), 0.0, 1e-15);
}

TEST(MeanZero, Pythagoras) {
    auto rng = SplitMix64::stream(70, 0);
    for (int t = 0; t < 20; ++t) {
        std::vector<Complex> v(101);
        for (auto& x : v) x = Complex(rng.normal() + 1.0, rng.normal());
        const CyclicFn f(v);
        const auto [m, f0] = mean_zero_split(f);
        EXPECT_NEAR(std::pow(lp_norm(f, 2.0), 2), std::norm(m) + std::pow(lp_norm(f0, 2.0), 2), 1e-10);
    }
}

TEST(MeanZero, GaussSumDecay) {
    auto rng = SplitMix64::stream(71, 0);
    for (std::size_t p : {11, 101, 997}) {
        double worst = 0.0;
        for (int t = 0; t < 100; ++t) {
            const auto f = random_unit(p, rng, false);
            const auto g = random_unit(p, rng, true);
            worst = std::max(worst, lp_norm(avg_cyclic(kLin, kSq, f, g), 1.0));
        }
        EXPECT_LE(worst, 2.0 / std::sqrt(static_cast<double>(p))) << p;
    }
}
