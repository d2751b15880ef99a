#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "pmt/fixtures.hpp"
#include "pmt/series.hpp"

namespace pmt {
namespace {

TEST(Rational, ArithmeticAndOverflow) {
    const auto half = *Rational::make(2, 4);
    EXPECT_EQ(half, (Rational{1, 2}));
    EXPECT_EQ(*Rational::make(3, -6), (Rational{-1, 2}));
    EXPECT_FALSE(Rational::make(1, 0).has_value());
    EXPECT_EQ(*(half + Rational{1, 3}), (Rational{5, 6}));
    EXPECT_EQ(*(half - Rational{1, 3}), (Rational{1, 6}));
    EXPECT_EQ(*(half / Rational{1, 3}), (Rational{3, 2}));
    const Rational big{1, std::int64_t{1} << 40};
    EXPECT_FALSE((big * big).has_value());
    EXPECT_EQ(Rational::from_double(0.375), (Rational{3, 8}));
    EXPECT_DOUBLE_EQ((Rational{1, 3}).to_double(), 1.0 / 3.0);
}

TEST(Rational, ExactPowers) {
    EXPECT_EQ(exact_pow(Rational{1, 4}, 0.5), (Rational{1, 2}));
    EXPECT_EQ(exact_pow(Rational{8, 27}, 2.0 / 3.0), (Rational{4, 9}));
    EXPECT_EQ(exact_pow(Rational{2, 3}, 2.0), (Rational{4, 9}));
    EXPECT_FALSE(exact_pow(Rational{1, 2}, 0.5).has_value());
    EXPECT_FALSE(exact_pow(Rational{1, 2}, 0.1234567).has_value());
}

TEST(RateTerm, WorkedValues) {
    // E3 superdiagonal with the 2^s factor: sqrt(2) / 2^i.
    const auto e3 = get_fixture("E3-kannan-family").family_config->deltas;
    for (std::size_t i = 1; i <= 20; ++i) {
        const double t = rate_term(e3(i, i + 1), e3.exact_at(i, i + 1), 0.5, true);
        EXPECT_DOUBLE_EQ(t, std::sqrt(2.0) / std::ldexp(1.0, static_cast<int>(i))) << i;
    }
    EXPECT_EQ(rate_term(e3(1, 2), e3.exact_at(1, 2), 0.5, true), std::pow(2.0, 0.5) / 2.0);
    // E4 without the factor: 1 / 2^i exactly.
    const auto e4 = get_fixture("E4-relaxed-family").family_config->deltas;
    for (std::size_t i = 1; i <= 30; ++i) {
        EXPECT_EQ(rate_term(e4(i, i + 1), e4.exact_at(i, i + 1), 0.5, false),
                  std::ldexp(1.0, -static_cast<int>(i)));
    }
    EXPECT_EQ(rate_term(0.0, Rational{0, 1}, 0.5, true), 0.0);
    EXPECT_THROW((void)rate_term(1.0, std::nullopt, 1.0, false), InvalidInput);
    EXPECT_THROW((void)rate_term(0.5, std::nullopt, 0.0, false), InvalidInput);
}

TEST(Certificate, HarmonicPrefix) {
    std::vector<double> a(1000);
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = 1.0 / static_cast<double>(i + 1);
    const auto cert = certify_alpha_series(RateSequence::given(a), {0.5, 0.9});
    EXPECT_EQ(cert.status, CertificateStatus::Certified);
    // Smallest certifying grid value wins; 0.9 certifies from n = 2 as well.
    EXPECT_EQ(cert.lambda, std::optional<double>(0.5));
    EXPECT_EQ(cert.n_lambda, std::optional<std::size_t>(5));
    ASSERT_EQ(cert.per_lambda.size(), 2u);
    EXPECT_TRUE(cert.per_lambda[1].certified);
    EXPECT_EQ(cert.per_lambda[1].n_lambda, 2u);
    EXPECT_EQ(cert.horizon_checked, 1000u);
}

TEST(Certificate, E3RateTermsGiveSqrtTwoOverTwo) {
    const auto cfg = *get_fixture("E3-kannan-family").family_config;
    const auto seq = kannan_rate_terms(cfg.deltas, 10000, 0.5, true);
    const auto cert = certify_alpha_series(seq, {std::pow(2.0, 0.5) / 2.0});
    EXPECT_EQ(cert.status, CertificateStatus::Certified);
    EXPECT_EQ(cert.n_lambda, std::optional<std::size_t>(1));
}

TEST(Certificate, ConstantOneIsRefuted) {
    const auto cert = certify_alpha_series(RateSequence::given(std::vector<double>(500, 1.0)));
    EXPECT_EQ(cert.status, CertificateStatus::RefutedAtHorizon);
    EXPECT_EQ(cert.witness_L, std::optional<std::size_t>(500));
    EXPECT_FALSE(cert.lambda.has_value());
}

TEST(Certificate, LateExcursionIsInconclusive) {
    // Sum stays below 0.99 L at the horizon but exceeds it in the upper half.
    std::vector<double> a(100, 0.0);
    a[59] = 60.0;
    const auto cert = certify_alpha_series(RateSequence::given(a), {0.9, 0.99});
    EXPECT_EQ(cert.status, CertificateStatus::Inconclusive);
}

TEST(Certificate, InputValidation) {
    const auto seq = RateSequence::given({0.1, 0.1, 0.1});
    EXPECT_THROW((void)certify_alpha_series(seq, {}), InvalidInput);
    EXPECT_THROW((void)certify_alpha_series(seq, {0.9, 0.5}), InvalidInput);
    EXPECT_THROW((void)certify_alpha_series(seq, {1.0}), InvalidInput);
    EXPECT_THROW((void)certify_alpha_series(RateSequence::given({0.1})), InvalidInput);
    EXPECT_THROW((void)RateSequence::given({-0.1}), InvalidInput);
}

TEST(Certificate, AgreesWithBruteForceOnSeededGeometricSequences) {
    std::mt19937_64 rng(20240611);
    const auto grid = default_lambda_grid();
    for (int trial = 0; trial < 100; ++trial) {
        const auto a = testing::random_geometric_terms(rng, 1000);
        const auto cert = certify_alpha_series(RateSequence::given(a), grid);
        bool any = false;
        for (std::size_t g = 0; g < grid.size(); ++g) {
            const auto n = testing::brute_n_lambda(a, grid[g]);
            EXPECT_EQ(cert.per_lambda[g].certified, n.has_value()) << trial << " " << grid[g];
            EXPECT_EQ(cert.per_lambda[g].refuted, testing::brute_refuted(a, grid[g])) << trial;
            if (n) {
                EXPECT_EQ(cert.per_lambda[g].n_lambda, *n);
            }
            any = any || n.has_value();
        }
        const auto expected = any ? CertificateStatus::Certified
                              : testing::brute_refuted(a, grid.back())
                                  ? CertificateStatus::RefutedAtHorizon
                                  : CertificateStatus::Inconclusive;
        EXPECT_EQ(cert.status, expected) << trial;
    }
}

TEST(ProductTerms, E4IsExactDyadic) {
    const auto d = get_fixture("E4-relaxed-family").family_config->deltas;
    const auto C = product_terms_Cn(d, 20, 0.5);
    for (int n = 1; n <= 20; ++n) {
        EXPECT_EQ(C[static_cast<std::size_t>(n - 1)], std::ldexp(1.0, -n * (n + 1) / 2)) << n;
    }
}

TEST(ProductTerms, E5IsTenElevenths) {
    const auto d = get_fixture("E5-chatterjea-family").family_config->deltas;
    const auto C = product_terms_Cn(d, 50, 1.0);
    for (int n = 1; n <= 50; ++n) {
        const double want = std::pow(10.0 / 11.0, n);
        EXPECT_NEAR(C[static_cast<std::size_t>(n - 1)], want, 1e-12 * want);
    }
}

TEST(Relaxed, E5Passes) {
    const auto d = get_fixture("E5-chatterjea-family").family_config->deltas;
    const auto r = check_relaxed_hypotheses(d, 1.0, 200);
    EXPECT_TRUE(r.passes());
    EXPECT_TRUE(r.all_limsup_ok);
    for (double m : r.limsup_estimate) {
        EXPECT_LT(m, 1.0);
        EXPECT_GT(m, 1.0 / 3.0);
    }
    // Far from the window the estimate approaches 1/3.
    EXPECT_NEAR(r.limsup_estimate.front(), 1.0 / 3.0 + 1.0 / (100 - 1 + 6), 1e-15);
    EXPECT_EQ(r.cn_summable, Summability::Summable);
}

TEST(Relaxed, ConstantNineTenthsNotSummable) {
    const auto r = check_relaxed_hypotheses(DeltaMatrix::constant(0.9), 1.0, 100);
    EXPECT_TRUE(r.all_limsup_ok);
    EXPECT_EQ(r.cn_summable, Summability::NotSummable);
    EXPECT_NEAR(r.Cn[2], 729.0, 1e-9);
    EXPECT_FALSE(r.passes());
}

TEST(Relaxed, ZeroDeltasPassTrivially) {
    const auto r = check_relaxed_hypotheses(DeltaMatrix::constant(0.0), 1.0, 50);
    EXPECT_TRUE(r.passes());
    EXPECT_EQ(r.partial_sum, 0.0);
}

TEST(Relaxed, LimsupAtLeastOneFails) {
    DeltaMatrix d{[](std::size_t i, std::size_t j) { return i == j + 1 ? 0.5 : (i > 60 ? 1.2 : 0.5); },
                  {}, "jump"};
    const auto r = check_relaxed_hypotheses(d, 1.0, 100);
    EXPECT_FALSE(r.all_limsup_ok);
    EXPECT_FALSE(r.passes());
}

TEST(Relaxed, SlowDecayIsSummableByRatio) {
    const auto r = check_relaxed_hypotheses(DeltaMatrix::constant(0.49), 1.0, 400);
    EXPECT_EQ(r.cn_summable, Summability::Summable);
    ASSERT_TRUE(r.tail_ratio.has_value());
    EXPECT_NEAR(*r.tail_ratio, 0.49 / 0.51, 1e-12);
}

}  // namespace
}  // namespace pmt
