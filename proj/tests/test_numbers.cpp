#include <gtest/gtest.h>

#include <numeric>
#include <random>
#include <thread>
#include <vector>

#include "bilin/numbers.hpp"
#include "bilin/rng.hpp"

using namespace bilin;

namespace {

std::uint64_t recompose(const FactoredInt& f) {
    std::uint64_t v = 1;
    for (auto [p, e] : f.factors())
        for (unsigned i = 0; i < e; ++i) v *= p;
    return v;
}

bool naive_prime(std::uint64_t n) {
    if (n < 2) return false;
    for (std::uint64_t d = 2; d < n; ++d)
        if (n % d == 0) return false;
    return true;
}

}  // namespace

TEST(ReduceFraction, Examples) {
    EXPECT_EQ(reduce_fraction(2, 4), reduce_fraction(1, 2));
    EXPECT_EQ(reduce_fraction(2, 4).numerator(), 1);
    EXPECT_EQ(reduce_fraction(2, 4).denominator(), 2);
    EXPECT_EQ(reduce_fraction(0, 5).numerator(), 0);
    EXPECT_EQ(reduce_fraction(0, 5).denominator(), 1);
    EXPECT_EQ(reduce_fraction(7, 10).to_string(), "7/10");
    EXPECT_EQ(reduce_fraction(-1, 3).to_string(), "2/3");
    EXPECT_THROW(reduce_fraction(1, 0), std::invalid_argument);
    EXPECT_THROW(reduce_fraction(1, -3), std::invalid_argument);
}

TEST(ReduceFraction, PeriodicInNumerator) {
    auto rng = SplitMix64::stream(1, 0);
    for (int i = 0; i < 2000; ++i) {
        const auto q = static_cast<std::int64_t>(1 + rng.below(500));
        const auto a = static_cast<std::int64_t>(rng.below(4000)) - 2000;
        const auto r = reduce_fraction(a, q);
        EXPECT_EQ(r, reduce_fraction(a + q, q));
        EXPECT_GE(r.numerator(), 0);
        EXPECT_LT(r.numerator(), r.denominator());
        EXPECT_EQ(std::gcd(r.numerator(), r.denominator()), 1);
        // Same point of Q/Z: a r.den == r.num q mod q r.den.
        EXPECT_EQ(((a * r.denominator() - r.numerator() * q) % (q * r.denominator())), 0);
    }
}

TEST(ReduceFraction, OrderByTorusValue) {
    EXPECT_LT(reduce_fraction(1, 3), reduce_fraction(1, 2));
    EXPECT_FALSE(reduce_fraction(1, 2) < reduce_fraction(2, 4));
    EXPECT_DOUBLE_EQ(reduce_fraction(3, 4).value(), 0.75);
}

TEST(ReduceFraction, CachedFactorsSharedAcrossThreads) {
    const auto a = reduce_fraction(1, 360);
    std::vector<std::thread> ts;
    std::vector<FactoredInt> out(4);
    for (int i = 0; i < 4; ++i) ts.emplace_back([&, i] { out[i] = a.denominator_factors(); });
    for (auto& t : ts) t.join();
    for (const auto& f : out) EXPECT_EQ(f, factorize(360));
}

TEST(Factorize, Examples) {
    EXPECT_TRUE(factorize(1).is_one());
    EXPECT_EQ(factorize(12), FactoredInt(FactoredInt::Map{{2, 2}, {3, 1}}));
    EXPECT_EQ(factorize(97), FactoredInt(FactoredInt::Map{{97, 1}}));
    EXPECT_THROW(factorize(0), std::invalid_argument);
    EXPECT_THROW(factorize(kFactorizeCap + 1), std::out_of_range);
    EXPECT_NO_THROW(factorize(kFactorizeCap));
}

TEST(Factorize, RecomposesEveryIntegerUpToTenToTheSix) {
    for (std::uint64_t n = 1; n <= 1'000'000; ++n) {
        const auto f = factorize(n);
        ASSERT_EQ(recompose(f), n);
        if (n % 9973 == 0) {
            for (auto [p, e] : f.factors()) EXPECT_TRUE(naive_prime(p)) << p;
        }
    }
}

TEST(Factorize, LargePrimeAndSemiprime) {
    const std::uint64_t p = 1'000'000'007ULL;
    EXPECT_EQ(factorize(p), FactoredInt(FactoredInt::Map{{p, 1}}));
    EXPECT_EQ(factorize(1'000'003ULL * 999'999'937ULL), FactoredInt(FactoredInt::Map{{1'000'003ULL, 1}, {999'999'937ULL, 1}}));
}

TEST(FactoredInt, LcmLaws) {
    auto rng = SplitMix64::stream(2, 0);
    for (int i = 0; i < 300; ++i) {
        const auto a = factorize(1 + rng.below(100000));
        const auto b = factorize(1 + rng.below(100000));
        const auto c = factorize(1 + rng.below(100000));
        EXPECT_EQ(a.lcm(b), b.lcm(a));
        EXPECT_EQ(a.lcm(b).lcm(c), a.lcm(b.lcm(c)));
        EXPECT_EQ(a.lcm(a), a);
        EXPECT_TRUE(a.divides(a.lcm(b)));
        EXPECT_TRUE(a.divides(a * b));
        const auto x = recompose(a), y = recompose(b);
        EXPECT_EQ(recompose(a.lcm(b)), std::lcm(x, y));
        EXPECT_EQ(*(a * b).value(), x * y);
    }
}

TEST(FactoredInt, ValueOverflowAndLog) {
    const FactoredInt big(FactoredInt::Map{{2, 70}});
    EXPECT_FALSE(big.value().has_value());
    EXPECT_DOUBLE_EQ(big.log2_value(), 70.0);
    EXPECT_EQ(FactoredInt(FactoredInt::Map{{2, 63}}).value().value(), std::uint64_t{1} << 63);
    EXPECT_EQ(FactoredInt(FactoredInt::Map{{2, 0}, {3, 1}}), FactoredInt(FactoredInt::Map{{3, 1}}));
    EXPECT_EQ(FactoredInt(FactoredInt::Map{{2, 3}, {5, 1}}).to_string(), "{2:3, 5:1}");
}

TEST(Primes, SieveMatchesTrialDivision) {
    const auto ps = primes_up_to(3000);
    std::size_t k = 0;
    for (std::uint64_t n = 0; n <= 3000; ++n) {
        const bool p = naive_prime(n);
        EXPECT_EQ(is_prime(n), p) << n;
        if (p) {
            ASSERT_LT(k, ps.size());
            EXPECT_EQ(ps[k++], n);
        }
    }
    EXPECT_EQ(k, ps.size());
    EXPECT_TRUE(primes_up_to(1).empty());
}

TEST(Legendre, MatchesDirectCount) {
    for (std::uint64_t p : {2, 3, 5, 7, 11}) {
        std::uint64_t v = 0;
        for (std::uint64_t n = 1; n <= 400; ++n) {
            for (std::uint64_t m = n; m % p == 0; m /= p) ++v;
            EXPECT_EQ(legendre_valuation(n, p), v) << n << " " << p;
        }
    }
    EXPECT_EQ(legendre_valuation(0, 2), 0u);
    EXPECT_EQ(legendre_valuation(3, 2), 1u);
}

TEST(CeilLog2, Values) {
    EXPECT_EQ(ceil_log2(1), 0u);
    EXPECT_EQ(ceil_log2(2), 1u);
    EXPECT_EQ(ceil_log2(3), 2u);
    EXPECT_EQ(ceil_log2(4), 2u);
    EXPECT_EQ(ceil_log2(5), 3u);
    EXPECT_EQ(ceil_log2(1024), 10u);
    EXPECT_EQ(ceil_log2(1025), 11u);
}

TEST(Torus, DistanceExamples) {
    EXPECT_NEAR(torus_distance(TorusPoint(0.1), TorusPoint(0.9)), 0.2, 1e-15);
    EXPECT_EQ(torus_distance(TorusPoint(0.5), TorusPoint(0.5)), 0.0);
    EXPECT_NEAR(torus_distance(TorusPoint(0.25), TorusPoint(0.75)), 0.5, 1e-15);
    EXPECT_NEAR(TorusPoint(-0.25).value, 0.75, 1e-15);
    EXPECT_NEAR(TorusPoint(3.5).value, 0.5, 1e-15);
}

TEST(Torus, MetricProperties) {
    auto rng = SplitMix64::stream(3, 0);
    for (int i = 0; i < 5000; ++i) {
        const TorusPoint x(rng.uniform(-3, 3)), y(rng.uniform(-3, 3)), z(rng.uniform(-3, 3));
        const double dxy = torus_distance(x, y);
        EXPECT_NEAR(dxy, torus_distance(y, x), 1e-15);
        EXPECT_LE(dxy, 0.5);
        EXPECT_GE(dxy, 0.0);
        EXPECT_LE(dxy, torus_distance(x, z) + torus_distance(z, y) + 1e-15);
    }
}

TEST(Torus, SignedRepRange) {
    EXPECT_EQ(signed_rep(0.5), -0.5);
    EXPECT_NEAR(signed_rep(0.75), -0.25, 1e-15);
    EXPECT_NEAR(signed_rep(-0.1), -0.1, 1e-15);
}
