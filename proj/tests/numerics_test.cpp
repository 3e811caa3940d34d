#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include <mfbo/numerics/dense.hpp>
#include <mfbo/numerics/finite_diff.hpp>
#include <mfbo/numerics/random.hpp>

using namespace mfbo;
using numerics::Matrix;
using numerics::Vector;

namespace {

    // Independent determinant oracle: cofactor expansion along the first row.
    double det_bruteforce(const Matrix& a)
    {
        const auto n = a.rows();
        if (n == 1)
            return a(0, 0);
        double det = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            Matrix minor(n - 1, n - 1);
            for (Eigen::Index r = 1; r < n; ++r) {
                Eigen::Index cc = 0;
                for (Eigen::Index c = 0; c < n; ++c) {
                    if (c == j)
                        continue;
                    minor(r - 1, cc++) = a(r, c);
                }
            }
            det += ((j % 2 == 0) ? 1.0 : -1.0) * a(0, j) * det_bruteforce(minor);
        }
        return det;
    }

    Matrix random_psd(Eigen::Index n, numerics::RandomSource& rng, double ridge)
    {
        Matrix a(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j)
                a(i, j) = rng.normal();
        return a * a.transpose() + ridge * Matrix::Identity(n, n);
    }

} // namespace

TEST(Cholesky, IdentityNeedsNoJitter)
{
    const auto result = numerics::cholesky(Matrix::Identity(2, 2));
    EXPECT_EQ(result.applied_jitter, 0.0);
    EXPECT_TRUE(result.lower.isApprox(Matrix::Identity(2, 2), 1e-14));
}

TEST(Cholesky, HandFactorization)
{
    Matrix a(2, 2);
    a << 4, 2, 2, 3;
    const auto result = numerics::cholesky(a);
    EXPECT_EQ(result.applied_jitter, 0.0);
    EXPECT_NEAR(result.lower(0, 0), 2.0, 1e-12);
    EXPECT_NEAR(result.lower(1, 0), 1.0, 1e-12);
    EXPECT_NEAR(result.lower(1, 1), std::sqrt(2.0), 1e-12);
    EXPECT_NEAR(result.lower(0, 1), 0.0, 1e-12);
}

TEST(Cholesky, SingularMatrixGetsJitter)
{
    Matrix a(2, 2);
    a << 1, 1, 1, 1;
    const auto result = numerics::cholesky(a);
    EXPECT_GE(result.applied_jitter, 1e-8);
    const Matrix reconstructed = result.lower * result.lower.transpose();
    const Matrix target = a + result.applied_jitter * Matrix::Identity(2, 2);
    EXPECT_LT((reconstructed - target).cwiseAbs().maxCoeff(), 1e-10 * (1.0 + 1.0));
}

TEST(Cholesky, ReconstructionResidualOnRandomPsd)
{
    numerics::RandomSource rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const auto n = static_cast<Eigen::Index>(1 + rng.uniform_index(6));
        const Matrix a = random_psd(n, rng, trial % 3 == 0 ? 0.0 : 0.5);
        const auto result = numerics::cholesky(a);
        const Matrix reconstructed = result.lower * result.lower.transpose();
        const Matrix target = a + result.applied_jitter * Matrix::Identity(n, n);
        const double scale = 1.0 + a.cwiseAbs().maxCoeff();
        EXPECT_LT((reconstructed - target).cwiseAbs().maxCoeff(), 1e-10 * scale);
    }
}

TEST(Cholesky, Errors)
{
    EXPECT_THROW(numerics::cholesky(Matrix::Zero(2, 3)), NotSquareError);
    Matrix nonfinite = Matrix::Identity(2, 2);
    nonfinite(0, 0) = std::nan("");
    EXPECT_THROW(numerics::cholesky(nonfinite), NonFiniteError);
    Matrix asym(2, 2);
    asym << 1, 0.5, -0.5, 1;
    EXPECT_THROW(numerics::cholesky(asym), InvalidParameterError);
    // -I stays indefinite beyond every policy step
    EXPECT_THROW(numerics::cholesky(Matrix(-Matrix::Identity(3, 3))),
                 NotPositiveDefiniteError);
}

TEST(LogDetPsd, KnownValues)
{
    EXPECT_NEAR(numerics::log_det_psd(Matrix::Identity(5, 5)), 0.0, 1e-14);
    Matrix diag = Matrix::Zero(2, 2);
    diag(0, 0) = 2.0;
    diag(1, 1) = 3.0;
    EXPECT_NEAR(numerics::log_det_psd(diag), std::log(6.0), 1e-14);
}

TEST(LogDetPsd, MatchesBruteForceDeterminant)
{
    numerics::RandomSource rng(22);
    for (int trial = 0; trial < 40; ++trial) {
        const auto n = static_cast<Eigen::Index>(2 + rng.uniform_index(5)); // up to 6x6
        const Matrix a = random_psd(n, rng, 1.0);
        EXPECT_NEAR(numerics::log_det_psd(a), std::log(det_bruteforce(a)), 1e-8);
    }
}

TEST(GammaSample, MeanMatchesAnalytic)
{
    numerics::RandomSource rng(33);
    const int n = 1000000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i)
        sum += numerics::gamma_sample(2.0, 4.0, rng);
    const double mean = sum / n;
    const double se = std::sqrt(0.125 / n); // var = shape / rate^2
    EXPECT_NEAR(mean, 0.5, 3.0 * se);
}

TEST(GammaSample, Shape1MatchesExponentialByKs)
{
    numerics::RandomSource rng(44);
    const int n = 100000;
    std::vector<double> draws(n);
    for (auto& d : draws)
        d = numerics::gamma_sample(1.0, 1.0, rng);
    std::sort(draws.begin(), draws.end());
    double ks = 0.0;
    for (int i = 0; i < n; ++i) {
        const double cdf = 1.0 - std::exp(-draws[i]);
        ks = std::max(ks, std::abs((i + 1.0) / n - cdf));
        ks = std::max(ks, std::abs(cdf - static_cast<double>(i) / n));
    }
    EXPECT_LT(ks, 1.628 / std::sqrt(static_cast<double>(n))); // alpha = 0.01
}

TEST(GammaSample, ShapeBelowOneHasCorrectMean)
{
    numerics::RandomSource rng(55);
    const int n = 200000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i)
        sum += numerics::gamma_sample(0.5, 2.0, rng);
    // mean 0.25, var = 0.5/4 = 0.125
    EXPECT_NEAR(sum / n, 0.25, 3.0 * std::sqrt(0.125 / n));
}

TEST(GammaSample, DeterministicAcrossRuns)
{
    numerics::RandomSource a(7), b(7);
    for (int i = 0; i < 100; ++i)
        EXPECT_EQ(numerics::gamma_sample(3.0, 2.0, a), numerics::gamma_sample(3.0, 2.0, b));
}

TEST(GammaSample, RejectsBadParameters)
{
    numerics::RandomSource rng(1);
    EXPECT_THROW(numerics::gamma_sample(0.0, 1.0, rng), InvalidParameterError);
    EXPECT_THROW(numerics::gamma_sample(1.0, -1.0, rng), InvalidParameterError);
}

TEST(FiniteDifference, QuadraticAndSine)
{
    Vector x(2);
    x << 1.0, 2.0;
    const auto grad = numerics::finite_difference_gradient(
        [](const Vector& v) { return v.squaredNorm(); }, x, 1e-5);
    EXPECT_NEAR(grad(0), 2.0, 1e-8);
    EXPECT_NEAR(grad(1), 4.0, 1e-8);

    Vector zero(1);
    zero << 0.0;
    const auto gsin = numerics::finite_difference_gradient(
        [](const Vector& v) { return std::sin(v(0)); }, zero, 1e-5);
    EXPECT_NEAR(gsin(0), 1.0, 1e-9);

    const auto gconst = numerics::finite_difference_gradient(
        [](const Vector&) { return 3.5; }, x, 1e-5);
    EXPECT_EQ(gconst(0), 0.0);
    EXPECT_EQ(gconst(1), 0.0);
}

TEST(FiniteDifference, NonFiniteProbeThrows)
{
    Vector x(1);
    x << 0.0;
    EXPECT_THROW(numerics::finite_difference_gradient(
                     [](const Vector& v) { return std::log(v(0)); }, x, 1e-5),
                 NonFiniteError);
}

TEST(RandomSource, ReplayIsBitIdentical)
{
    numerics::RandomSource a(123), b(123);
    for (int i = 0; i < 1000; ++i)
        ASSERT_EQ(a.next_u64(), b.next_u64());
    for (int i = 0; i < 1000; ++i)
        ASSERT_EQ(a.normal(), b.normal());
}

TEST(RandomSource, SplitIsDeterministicAndDistinct)
{
    numerics::RandomSource a(9), b(9);
    auto child_a = a.split();
    auto child_b = b.split();
    EXPECT_EQ(child_a.next_u64(), child_b.next_u64());
    auto second = a.split();
    EXPECT_NE(child_a.next_u64(), second.next_u64());
}

TEST(RandomSource, SerializeRoundTrip)
{
    numerics::RandomSource rng(77);
    for (int i = 0; i < 17; ++i)
        rng.normal();
    auto copy = numerics::RandomSource::deserialize(rng.serialize());
    for (int i = 0; i < 100; ++i)
        ASSERT_EQ(rng.next_u64(), copy.next_u64());
}

