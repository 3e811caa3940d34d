#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include <mfbo/darn/log_joint.hpp>
#include <mfbo/darn/model.hpp>
#include <mfbo/errors.hpp>
#include <mfbo/hmc/sample_set.hpp>

namespace mfbo::darn {

    struct Prediction {
        double mean = 0.0;
        double variance = 0.0;
    };

    /// Posterior predictive moments at fidelity m for a batch of
    /// original-domain points: sample mean/variance of the destandardized
    /// chain outputs plus the average destandardized noise variance.
    inline std::vector<Prediction> predict_many(const DarnModel& model,
                                                const hmc::PosteriorSampleSet& samples,
                                                const std::vector<numerics::Vector>& points,
                                                std::size_t m, const Scaler& scaler)
    {
        model.check_fidelity(m);
        if (samples.size() == 0)
            throw EmptySampleSetError("posterior sample set is empty");
        const auto n_points = static_cast<Eigen::Index>(points.size());
        const auto n_samples = samples.size();

        numerics::Matrix x(static_cast<Eigen::Index>(model.input_dim()), n_points);
        for (Eigen::Index i = 0; i < n_points; ++i)
            x.col(i) = scaler.scale_input(points[static_cast<std::size_t>(i)]);

        numerics::Vector mean = numerics::Vector::Zero(n_points);
        numerics::Vector m2 = numerics::Vector::Zero(n_points);
        double noise_var = 0.0;
        detail::ChainTrace trace;
        for (std::size_t j = 0; j < n_samples; ++j) {
            detail::chain_forward_batch(model, samples.weight_samples[j], x, m, trace);
            for (Eigen::Index i = 0; i < n_points; ++i) {
                const double f = scaler.destandardize(
                    trace.outputs(static_cast<Eigen::Index>(m) - 1, i), m);
                mean(i) += f;
                m2(i) += f * f;
            }
            noise_var += scaler.destandardize_variance(
                1.0 / samples.tau_samples[j](static_cast<Eigen::Index>(m) - 1), m);
        }
        noise_var /= static_cast<double>(n_samples);

        std::vector<Prediction> result(points.size());
        for (Eigen::Index i = 0; i < n_points; ++i) {
            const double avg = mean(i) / static_cast<double>(n_samples);
            double sample_var = 0.0;
            if (n_samples > 1) {
                // unbiased: (sum f^2 - n mean^2) / (n - 1), clamped at 0
                sample_var = (m2(i) - static_cast<double>(n_samples) * avg * avg)
                    / static_cast<double>(n_samples - 1);
                sample_var = std::max(sample_var, 0.0);
            }
            result[static_cast<std::size_t>(i)] = {avg, sample_var + noise_var};
        }
        return result;
    }

    /// Single-point predictive mean and variance in original target units.
    inline Prediction predict(const DarnModel& model, const hmc::PosteriorSampleSet& samples,
                              const numerics::Vector& x, std::size_t m, const Scaler& scaler)
    {
        return predict_many(model, samples, {x}, m, scaler).front();
    }

} // namespace mfbo::darn
