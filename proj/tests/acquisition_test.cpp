#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include <gtest/gtest.h>

#include <mfbo/acquisition/batch.hpp>
#include <mfbo/acquisition/f_star.hpp>
#include <mfbo/acquisition/moments.hpp>
#include <mfbo/darn/model.hpp>

using namespace mfbo;
using acquisition::QueryBatch;
using acquisition::QueryPoint;
using numerics::Matrix;
using numerics::Vector;

namespace {

    darn::Scaler identity_scaler(Eigen::Index dim, Eigen::Index fidelities)
    {
        darn::Scaler scaler;
        scaler.box = Box(Vector::Zero(dim), Vector::Ones(dim));
        scaler.target_mean = Vector::Zero(fidelities);
        scaler.target_std = Vector::Ones(fidelities);
        return scaler;
    }

    Box unit_box(Eigen::Index dim) { return Box(Vector::Zero(dim), Vector::Ones(dim)); }

    /// Random smooth two-fidelity surrogate sample set (identity scaler).
    hmc::PosteriorSampleSet random_sample_set(std::size_t fidelities, std::size_t draws,
                                              numerics::RandomSource& rng)
    {
        auto model = std::make_shared<darn::DarnModel>(fidelities, 1,
                                                       std::vector<std::size_t>{3});
        hmc::PosteriorSampleSet set;
        set.model = model;
        set.scaler = identity_scaler(1, static_cast<Eigen::Index>(fidelities));
        for (std::size_t j = 0; j < draws; ++j) {
            auto w = darn::init_weights(*model, rng);
            set.weight_samples.push_back(std::move(w));
            set.tau_samples.push_back(
                darn::NoisePrecisions::Ones(static_cast<Eigen::Index>(fidelities)));
        }
        return set;
    }

    /// Two-fidelity surrogate whose outputs are piecewise constant over five
    /// cells of [0,1]: network 1 thresholds x at 0.2/0.4/0.6/0.8 with huge
    /// first-layer weights, network 2 ignores x and warps f1. Outside bands of
    /// width ~1e-6 around the knots, outputs are bitwise cell-constant.
    hmc::PosteriorSampleSet discrete_sample_set(std::size_t draws,
                                                numerics::RandomSource& rng)
    {
        auto model = std::make_shared<darn::DarnModel>(2, 1, std::vector<std::size_t>{4});
        hmc::PosteriorSampleSet set;
        set.model = model;
        set.scaler = identity_scaler(1, 2);
        const double slope = 3e7;
        const double knots[4] = {0.2, 0.4, 0.6, 0.8};
        for (std::size_t j = 0; j < draws; ++j) {
            darn::WeightVector w(static_cast<Eigen::Index>(model->weight_count()));
            std::size_t at = model->weight_offset(1);
            for (int i = 0; i < 4; ++i) // net 1 layer 0 weights (4x1)
                w(at++) = slope;
            for (int i = 0; i < 4; ++i) // biases
                w(at++) = -slope * knots[i];
            for (int i = 0; i < 4; ++i) // output weights
                w(at++) = 0.7 * rng.normal();
            w(at++) = 0.3 * rng.normal(); // output bias
            EXPECT_EQ(at, model->weight_offset(2));
            // net 2 layer 0 weights (4x2, column-major: x column then f1 column)
            for (int i = 0; i < 4; ++i)
                w(at++) = 0.0; // ignore x
            for (int i = 0; i < 4; ++i)
                w(at++) = rng.normal();
            for (int i = 0; i < 4; ++i)
                w(at++) = 0.4 * rng.normal(); // biases
            for (int i = 0; i < 4; ++i)
                w(at++) = 0.8 * rng.normal(); // output weights
            w(at++) = 0.2 * rng.normal();
            EXPECT_EQ(at, model->weight_count());
            set.weight_samples.push_back(std::move(w));
            set.tau_samples.push_back(darn::NoisePrecisions::Ones(2));
        }
        return set;
    }

    const double kGrid[5] = {0.1, 0.3, 0.5, 0.7, 0.9};

    QueryPoint grid_point(int cell, std::size_t m)
    {
        Vector x(1);
        x << kGrid[cell];
        return {x, m};
    }

} // namespace

TEST(SampleFStar, MonotoneSurrogateMaximizesAtRightEndpoint)
{
    auto model = std::make_shared<darn::DarnModel>(1, 1, std::vector<std::size_t>{1});
    hmc::PosteriorSampleSet set;
    set.model = model;
    set.scaler = identity_scaler(1, 1);
    darn::WeightVector w(4);
    w << 1.0, 0.0, 1.0, 0.0; // f(x) = tanh(x), increasing
    for (int j = 0; j < 3; ++j) {
        set.weight_samples.push_back(w);
        set.tau_samples.push_back(darn::NoisePrecisions::Ones(1));
    }
    numerics::RandomSource rng(1);
    const auto f_stars = acquisition::sample_f_star(set, 3, unit_box(1), rng);
    for (Eigen::Index j = 0; j < f_stars.size(); ++j)
        EXPECT_NEAR(f_stars(j), std::tanh(1.0), 1e-6);
}

TEST(SampleFStar, ZeroWeightsGiveDestandardizedZero)
{
    auto model = std::make_shared<darn::DarnModel>(2, 1, std::vector<std::size_t>{3});
    hmc::PosteriorSampleSet set;
    set.model = model;
    set.scaler = identity_scaler(1, 2);
    set.scaler.target_mean(1) = 3.5; // highest fidelity destandardization
    set.scaler.target_std(1) = 2.0;
    const darn::WeightVector zero
        = darn::WeightVector::Zero(static_cast<Eigen::Index>(model->weight_count()));
    for (int j = 0; j < 4; ++j) {
        set.weight_samples.push_back(zero);
        set.tau_samples.push_back(darn::NoisePrecisions::Ones(2));
    }
    numerics::RandomSource rng(2);
    const auto f_stars = acquisition::sample_f_star(set, 4, unit_box(1), rng);
    for (Eigen::Index j = 0; j < f_stars.size(); ++j)
        EXPECT_EQ(f_stars(j), 3.5);
}

TEST(SampleFStar, DominatesRandomProbes)
{
    numerics::RandomSource rng(3);
    auto set = random_sample_set(2, 8, rng);
    const auto f_stars = acquisition::sample_f_star(set, 8, unit_box(1), rng);
    const auto indices = acquisition::subsample_indices(8, 8);
    for (std::size_t j = 0; j < 8; ++j) {
        for (int probe = 0; probe < 100; ++probe) {
            Vector x(1);
            x << rng.uniform();
            const double value = acquisition::chain_output(
                *set.model, set.weight_samples[indices[j]], set.scaler, x, 2);
            ASSERT_GE(f_stars(static_cast<Eigen::Index>(j)), value - 1e-9);
        }
    }
}

TEST(JointSamples, StructureAndFStarColumn)
{
    numerics::RandomSource rng(4);
    auto set = random_sample_set(2, 6, rng);
    Vector f_stars(6);
    f_stars << 1, 2, 3, 4, 5, 6;
    QueryBatch batch;
    batch.pairs.push_back(grid_point(1, 1));
    batch.pairs.push_back(grid_point(1, 1)); // duplicate pair
    batch.pairs.push_back(grid_point(3, 2));
    const auto joint = acquisition::joint_samples(set, f_stars, batch);
    ASSERT_EQ(joint.rows(), 6);
    ASSERT_EQ(joint.cols(), 4);
    for (Eigen::Index j = 0; j < 6; ++j) {
        EXPECT_EQ(joint(j, 0), joint(j, 1)); // duplicate pairs give equal columns
        EXPECT_EQ(joint(j, 3), f_stars(j));
    }
}

TEST(JointSamples, DegeneratePosteriorGivesConstantColumn)
{
    numerics::RandomSource rng(5);
    auto set = random_sample_set(1, 5, rng);
    for (std::size_t j = 1; j < set.weight_samples.size(); ++j)
        set.weight_samples[j] = set.weight_samples[0];
    Vector f_stars = Vector::Zero(5);
    QueryBatch batch;
    batch.pairs.push_back(grid_point(2, 1));
    const auto joint = acquisition::joint_samples(set, f_stars, batch);
    for (Eigen::Index j = 1; j < 5; ++j)
        EXPECT_EQ(joint(j, 0), joint(0, 0));
}

TEST(EstimateMoments, HandComputedExample)
{
    Matrix joint(2, 2);
    joint << 0, 0, 2, 2;
    const auto mom = acquisition::estimate_moments(joint);
    EXPECT_NEAR(mom.mu(0), 1.0, 1e-15);
    EXPECT_NEAR(mom.mu(1), 1.0, 1e-15);
    for (Eigen::Index i = 0; i < 2; ++i)
        for (Eigen::Index j = 0; j < 2; ++j)
            EXPECT_NEAR(mom.sigma(i, j), 2.0, 1e-15); // divisor L-1 = 1
    EXPECT_EQ(mom.applied_jitter, 0.0);

    Matrix constant = Matrix::Ones(4, 3);
    const auto degenerate = acquisition::estimate_moments(constant);
    EXPECT_NEAR(degenerate.sigma.cwiseAbs().maxCoeff(), 0.0, 1e-15);

    EXPECT_THROW(acquisition::estimate_moments(Matrix::Ones(1, 2)), TooFewSamplesError);
}

TEST(EstimateMoments, RowPermutationInvariant)
{
    numerics::RandomSource rng(6);
    Matrix joint(7, 3);
    for (Eigen::Index i = 0; i < joint.size(); ++i)
        joint(i / 3, i % 3) = rng.normal();
    Matrix permuted = joint;
    permuted.row(0).swap(permuted.row(6));
    permuted.row(2).swap(permuted.row(4));
    const auto a = acquisition::estimate_moments(joint);
    const auto b = acquisition::estimate_moments(permuted);
    EXPECT_LT((a.mu - b.mu).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((a.sigma - b.sigma).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(MutualInformation, IndependentBlocksGiveZero)
{
    acquisition::MomentEstimate mom;
    mom.mu = Vector::Zero(3);
    mom.sigma = Matrix::Zero(3, 3);
    mom.sigma(0, 0) = 2.0;
    mom.sigma(1, 1) = 1.5;
    mom.sigma(0, 1) = mom.sigma(1, 0) = 0.4;
    mom.sigma(2, 2) = 3.0; // f* uncorrelated with f
    EXPECT_NEAR(acquisition::mutual_information(mom), 0.0, 1e-9);
}

TEST(MutualInformation, BivariateCorrelationFormula)
{
    for (double rho : {0.0, 0.3, -0.6, 0.9}) {
        acquisition::MomentEstimate mom;
        mom.mu = Vector::Zero(2);
        mom.sigma = Matrix(2, 2);
        mom.sigma << 1.0, rho, rho, 1.0;
        EXPECT_NEAR(acquisition::mutual_information(mom), -0.5 * std::log(1.0 - rho * rho),
                    1e-12);
    }
}

TEST(MutualInformation, NonnegativeOnRandomSampleMoments)
{
    numerics::RandomSource rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        const auto rows = static_cast<Eigen::Index>(2 + rng.uniform_index(30));
        const auto cols = static_cast<Eigen::Index>(2 + rng.uniform_index(5));
        Matrix joint(rows, cols);
        for (Eigen::Index i = 0; i < rows; ++i)
            for (Eigen::Index j = 0; j < cols; ++j)
                joint(i, j) = rng.normal();
        if (trial % 3 == 0)
            joint.col(0) = joint.col(cols - 1); // force a singular covariance
        if (trial % 5 == 0)
            joint.col(1).setConstant(2.5);
        const auto mom = acquisition::estimate_moments(joint);
        ASSERT_GE(acquisition::mutual_information(mom), -1e-8);
    }
}

TEST(BatchAcquisition, CostScalingIsExact)
{
    numerics::RandomSource rng(8);
    auto set = random_sample_set(2, 10, rng);
    const auto f_stars = acquisition::sample_f_star(set, 10, unit_box(1), rng, 2, 30);
    QueryBatch batch;
    batch.pairs.push_back(grid_point(0, 1));
    batch.pairs.push_back(grid_point(2, 2));
    Vector lambdas(2);
    lambdas << 1.0, 7.0;
    const double base = acquisition::batch_acquisition(
        batch, set, f_stars, acquisition::CostModel(lambdas));
    const double scaled = acquisition::batch_acquisition(
        batch, set, f_stars, acquisition::CostModel(Vector(4.0 * lambdas)));
    EXPECT_EQ(scaled, base / 4.0);
}

TEST(BatchAcquisition, PermutationExact)
{
    numerics::RandomSource rng(9);
    auto set = random_sample_set(2, 12, rng);
    const auto f_stars = acquisition::sample_f_star(set, 12, unit_box(1), rng, 2, 30);
    Vector lambdas(2);
    lambdas << 1.0, 3.0;
    const acquisition::CostModel costs(lambdas);
    QueryBatch batch;
    batch.pairs.push_back(grid_point(0, 2));
    batch.pairs.push_back(grid_point(3, 1));
    batch.pairs.push_back(grid_point(1, 1));
    const double base = acquisition::batch_acquisition(batch, set, f_stars, costs);
    QueryBatch permuted;
    permuted.pairs = {batch.pairs[2], batch.pairs[0], batch.pairs[1]};
    EXPECT_EQ(acquisition::batch_acquisition(permuted, set, f_stars, costs), base);
}

TEST(BatchAcquisition, SingleQueryReductionMatchesOracle)
{
    numerics::RandomSource rng(10);
    for (int trial = 0; trial < 50; ++trial) {
        auto set = random_sample_set(2, 16, rng);
        Vector f_stars(16);
        for (Eigen::Index j = 0; j < 16; ++j)
            f_stars(j) = rng.normal() * 2.0 + 1.0;
        const std::size_t m = 1 + rng.uniform_index(2);
        Vector x(1);
        x << rng.uniform();
        const double lambda = 0.5 + rng.uniform() * 4.0;
        QueryBatch batch;
        batch.pairs.push_back({x, m});
        Vector lambdas(2);
        lambdas << lambda, lambda * 2.0;
        const double via_batch = acquisition::batch_acquisition(
            batch, set, f_stars, acquisition::CostModel(lambdas));

        // Independently coded single-query MES-per-cost.
        const auto indices = acquisition::subsample_indices(16, 16);
        const double n = 16.0;
        double mean_f = 0.0, mean_s = 0.0;
        std::vector<double> fs(16);
        for (std::size_t j = 0; j < 16; ++j) {
            fs[j] = acquisition::chain_output(*set.model, set.weight_samples[indices[j]],
                                              set.scaler, x, m);
            mean_f += fs[j];
            mean_s += f_stars(static_cast<Eigen::Index>(j));
        }
        mean_f /= n;
        mean_s /= n;
        double var_f = 0.0, var_s = 0.0, cov = 0.0;
        for (std::size_t j = 0; j < 16; ++j) {
            const double df = fs[j] - mean_f;
            const double ds = f_stars(static_cast<Eigen::Index>(j)) - mean_s;
            var_f += df * df;
            var_s += ds * ds;
            cov += df * ds;
        }
        var_f /= n - 1;
        var_s /= n - 1;
        cov /= n - 1;
        const double mi
            = 0.5 * (std::log(var_f) + std::log(var_s)
                     - std::log(var_f * var_s - cov * cov));
        const double cost_used = lambdas(static_cast<Eigen::Index>(m - 1));
        ASSERT_NEAR(via_batch, mi / cost_used, 1e-12);
    }
}

TEST(ConditionalAcquisition, SubstitutionIdentity)
{
    numerics::RandomSource rng(11);
    auto set = random_sample_set(2, 10, rng);
    const auto f_stars = acquisition::sample_f_star(set, 10, unit_box(1), rng, 2, 30);
    Vector lambdas(2);
    lambdas << 1.0, 5.0;
    const acquisition::CostModel costs(lambdas);
    QueryBatch batch;
    batch.pairs.push_back(grid_point(0, 1));
    batch.pairs.push_back(grid_point(4, 2));
    const double whole = acquisition::batch_acquisition(batch, set, f_stars, costs);
    for (std::size_t k = 1; k <= 2; ++k)
        EXPECT_EQ(acquisition::conditional_acquisition(k, batch.pairs[k - 1], batch, set,
                                                       f_stars, costs),
                  whole);
    EXPECT_THROW(acquisition::conditional_acquisition(3, batch.pairs[0], batch, set,
                                                      f_stars, costs),
                 InvalidParameterError);
}

TEST(ConditionalAcquisition, GridMaxMatchesBruteForce)
{
    numerics::RandomSource rng(12);
    auto set = discrete_sample_set(12, rng);
    const auto f_stars
        = acquisition::sample_f_star(set, 12, unit_box(1), rng, 10, 60);
    Vector lambdas(2);
    lambdas << 1.0, 3.0;
    const acquisition::CostModel costs(lambdas);
    QueryBatch batch;
    batch.pairs.push_back(grid_point(1, 1));
    batch.pairs.push_back(grid_point(3, 2));

    double brute = -std::numeric_limits<double>::infinity();
    for (int cell = 0; cell < 5; ++cell)
        for (std::size_t m = 1; m <= 2; ++m)
            brute = std::max(brute,
                             acquisition::conditional_acquisition(
                                 1, grid_point(cell, m), batch, set, f_stars, costs));

    acquisition::AcqOptConfig cfg;
    cfg.restarts = 10;
    cfg.eval_budget = 60;
    const auto result
        = acquisition::optimize_pair(1, batch, set, f_stars, costs, cfg, unit_box(1), rng);
    EXPECT_NEAR(result.value, brute, 1e-6);
    EXPECT_LE(result.value, brute + 1e-8);
}

TEST(OptimizePair, IncumbentNeverLost)
{
    numerics::RandomSource rng(13);
    auto set = random_sample_set(2, 10, rng);
    const auto f_stars = acquisition::sample_f_star(set, 10, unit_box(1), rng, 2, 30);
    Vector lambdas(2);
    lambdas << 1.0, 2.0;
    const acquisition::CostModel costs(lambdas);
    QueryBatch batch;
    batch.pairs.push_back(grid_point(2, 1));
    batch.pairs.push_back(grid_point(4, 1));
    const double incumbent = acquisition::batch_acquisition(batch, set, f_stars, costs);
    acquisition::AcqOptConfig cfg;
    cfg.restarts = 2;
    cfg.eval_budget = 25;
    const auto result
        = acquisition::optimize_pair(2, batch, set, f_stars, costs, cfg, unit_box(1), rng);
    EXPECT_GE(result.value, incumbent);
}

TEST(OptimizePair, SingleFidelityAlwaysReturnsFidelityOne)
{
    numerics::RandomSource rng(14);
    auto set = random_sample_set(1, 8, rng);
    const auto f_stars = acquisition::sample_f_star(set, 8, unit_box(1), rng, 2, 25);
    Vector lambdas(1);
    lambdas << 2.0;
    QueryBatch batch;
    batch.pairs.push_back(grid_point(0, 1));
    acquisition::AcqOptConfig cfg;
    cfg.restarts = 2;
    cfg.eval_budget = 20;
    const auto result = acquisition::optimize_pair(
        1, batch, set, f_stars, acquisition::CostModel(lambdas), cfg, unit_box(1), rng);
    EXPECT_EQ(result.point.fidelity, 1u);
}

TEST(OptimizeBatch, MonotoneTraceAndWorkCount)
{
    numerics::RandomSource rng(15);
    auto set = random_sample_set(2, 14, rng);
    Vector lambdas(2);
    lambdas << 1.0, 4.0;
    acquisition::AcqOptConfig cfg;
    cfg.sample_count = 14;
    cfg.restarts = 3;
    cfg.eval_budget = 40;
    cfg.max_iterations = 6;
    acquisition::BatchTrace trace;
    const auto batch
        = acquisition::optimize_batch(set, acquisition::CostModel(lambdas), cfg,
                                      unit_box(1), 3, rng, &trace);
    EXPECT_EQ(batch.size(), 3u);
    ASSERT_GE(trace.values.size(), 2u);
    for (std::size_t i = 1; i < trace.values.size(); ++i)
        ASSERT_GE(trace.values[i], trace.values[i - 1]);
    EXPECT_EQ(trace.inner_opt_calls, trace.iterations * 2 * 3); // iterations * M * B
}

TEST(OptimizeBatch, DeterministicGivenSeed)
{
    Vector lambdas(2);
    lambdas << 1.0, 4.0;
    acquisition::AcqOptConfig cfg;
    cfg.sample_count = 10;
    cfg.restarts = 2;
    cfg.eval_budget = 25;
    cfg.max_iterations = 3;
    numerics::RandomSource make(16);
    auto set = random_sample_set(2, 10, make);
    QueryBatch first, second;
    {
        numerics::RandomSource rng(99);
        first = acquisition::optimize_batch(set, acquisition::CostModel(lambdas), cfg,
                                            unit_box(1), 2, rng);
    }
    {
        numerics::RandomSource rng(99);
        second = acquisition::optimize_batch(set, acquisition::CostModel(lambdas), cfg,
                                             unit_box(1), 2, rng);
    }
    ASSERT_EQ(first.size(), second.size());
    for (std::size_t i = 0; i < first.size(); ++i) {
        EXPECT_EQ(first.pairs[i].fidelity, second.pairs[i].fidelity);
        EXPECT_EQ(first.pairs[i].x(0), second.pairs[i].x(0));
    }
}

TEST(OptimizeBatch, GridOracleBound)
{
    numerics::RandomSource make(17);
    auto set = discrete_sample_set(12, make);
    const auto f_stars
        = acquisition::sample_f_star(set, 12, unit_box(1), make, 10, 60);
    Vector lambdas(2);
    lambdas << 1.0, 3.0;
    const acquisition::CostModel costs(lambdas);

    double exhaustive = -std::numeric_limits<double>::infinity();
    for (int c1 = 0; c1 < 5; ++c1)
        for (std::size_t m1 = 1; m1 <= 2; ++m1)
            for (int c2 = 0; c2 < 5; ++c2)
                for (std::size_t m2 = 1; m2 <= 2; ++m2) {
                    QueryBatch config;
                    config.pairs = {grid_point(c1, m1), grid_point(c2, m2)};
                    exhaustive = std::max(exhaustive, acquisition::batch_acquisition(
                                                          config, set, f_stars, costs));
                }

    acquisition::AcqOptConfig cfg;
    cfg.sample_count = 12;
    cfg.restarts = 10;
    cfg.eval_budget = 60;
    cfg.max_iterations = 5;
    std::vector<double> ratios;
    for (int seed = 0; seed < 5; ++seed) {
        numerics::RandomSource rng(300 + seed);
        const auto batch = acquisition::optimize_batch(set, f_stars, costs, cfg,
                                                       unit_box(1), 2, rng);
        const double achieved = acquisition::batch_acquisition(batch, set, f_stars, costs);
        ASSERT_LE(achieved, exhaustive + 1e-8);
        ratios.push_back(achieved / exhaustive);
    }
    std::sort(ratios.begin(), ratios.end());
    EXPECT_GE(ratios[ratios.size() / 2], 0.9);
}
