#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include <mfbo/acquisition/types.hpp>
#include <mfbo/darn/model.hpp>
#include <mfbo/errors.hpp>
#include <mfbo/hmc/sample_set.hpp>
#include <mfbo/numerics/dense.hpp>

namespace mfbo::acquisition {

    /// Deterministic stride over the stored posterior draws: the j-th of L
    /// subsampled indices is floor(j * stored / L).
    inline std::vector<std::size_t> subsample_indices(std::size_t stored, std::size_t take)
    {
        if (take < 1 || take > stored)
            throw InvalidParameterError("subsample size must be in [1, stored samples]");
        std::vector<std::size_t> indices(take);
        for (std::size_t j = 0; j < take; ++j)
            indices[j] = j * stored / take;
        return indices;
    }

    /// Noise-free chain output at (x, m) in original target units under one
    /// weight draw.
    inline double chain_output(const darn::DarnModel& model, const darn::WeightVector& w,
                               const darn::Scaler& scaler, const numerics::Vector& x,
                               std::size_t m)
    {
        const numerics::Vector f
            = darn::chain_forward(model, w, scaler.scale_input(x), m);
        return scaler.destandardize(f(static_cast<Eigen::Index>(m) - 1), m);
    }

    /// L x (B+1) matrix whose row j holds the chain outputs of every batch
    /// pair plus f*_j, all under the j-th subsampled weight draw.
    inline numerics::Matrix joint_samples(const hmc::PosteriorSampleSet& samples,
                                          const numerics::Vector& f_stars,
                                          const QueryBatch& batch)
    {
        const auto draws = static_cast<std::size_t>(f_stars.size());
        const auto indices = subsample_indices(samples.size(), draws);
        const auto b = static_cast<Eigen::Index>(batch.size());
        numerics::Matrix joint(static_cast<Eigen::Index>(draws), b + 1);
        for (std::size_t j = 0; j < draws; ++j) {
            const auto& w = samples.weight_samples[indices[j]];
            for (Eigen::Index k = 0; k < b; ++k)
                joint(static_cast<Eigen::Index>(j), k)
                    = chain_output(*samples.model, w, samples.scaler,
                                   batch.pairs[static_cast<std::size_t>(k)].x,
                                   batch.pairs[static_cast<std::size_t>(k)].fidelity);
            joint(static_cast<Eigen::Index>(j), b) = f_stars(static_cast<Eigen::Index>(j));
        }
        return joint;
    }

    /// Sample mean and unbiased covariance of the joint rows; jitter is left
    /// at zero and applied lazily when the covariance is factorized.
    inline MomentEstimate estimate_moments(const numerics::Matrix& joint)
    {
        const auto rows = joint.rows();
        if (rows < 2)
            throw TooFewSamplesError("moment matching needs at least two samples");
        MomentEstimate mom;
        mom.mu = joint.colwise().mean();
        const numerics::Matrix centered = joint.rowwise() - mom.mu.transpose();
        mom.sigma = (centered.transpose() * centered) / static_cast<double>(rows - 1);
        mom.applied_jitter = 0.0;
        return mom;
    }

    namespace detail {
        struct MiFactorization {
            double log_det_full = 0.0;
            double log_det_ff = 0.0;
            double log_var_star = 0.0;
            double jitter = 0.0;
        };

        /// Factorizes the full covariance, its leading block, and the f*
        /// variance under one shared jitter: the smallest policy step at which
        /// all three succeed, so Fischer's inequality survives regularization.
        inline MiFactorization factor_moments(const MomentEstimate& mom,
                                              const numerics::JitterPolicy& policy)
        {
            const auto n = mom.sigma.rows();
            if (n < 2 || mom.sigma.cols() != n)
                throw InvalidParameterError("moment covariance must be at least 2x2 square");
            numerics::detail::check_symmetric_square(mom.sigma);

            const auto b = n - 1;
            double jitter = mom.applied_jitter;
            for (std::size_t attempt = 0; attempt <= policy.max_attempts; ++attempt) {
                numerics::Matrix l_full;
                numerics::Matrix l_ff;
                const double var_star = mom.sigma(b, b) + jitter;
                if (var_star > 0.0
                    && numerics::detail::try_llt(mom.sigma, jitter, l_full)
                    && numerics::detail::try_llt(mom.sigma.topLeftCorner(b, b), jitter,
                                                 l_ff)) {
                    MiFactorization result;
                    result.log_det_full = 2.0 * l_full.diagonal().array().log().sum();
                    result.log_det_ff = 2.0 * l_ff.diagonal().array().log().sum();
                    result.log_var_star = std::log(var_star);
                    result.jitter = jitter;
                    return result;
                }
                jitter = (jitter == 0.0) ? policy.initial_jitter
                                         : jitter * policy.growth_factor;
            }
            throw NotPositiveDefiniteError("moment covariance not factorizable with jitter");
        }
    } // namespace detail

    /// Closed-form mutual information between the batch outputs and f* under
    /// the moment-matched Gaussian:
    /// (log|S_ff + jI| + log(s** + j) - log|S + jI|) / 2.
    inline double mutual_information(const MomentEstimate& mom,
                                     const numerics::JitterPolicy& policy = {},
                                     double* applied_jitter = nullptr)
    {
        const auto fact = detail::factor_moments(mom, policy);
        if (applied_jitter)
            *applied_jitter = fact.jitter;
        return 0.5 * (fact.log_det_ff + fact.log_var_star - fact.log_det_full);
    }

} // namespace mfbo::acquisition
