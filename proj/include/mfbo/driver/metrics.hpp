#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include <mfbo/benchmarks/dataset.hpp>
#include <mfbo/benchmarks/functions.hpp>
#include <mfbo/darn/predict.hpp>
#include <mfbo/driver/config.hpp>
#include <mfbo/errors.hpp>
#include <mfbo/hmc/sampler.hpp>

namespace mfbo::driver {

    /// RMSE normalized by the population standard deviation of the targets
    /// (floored at 1e-12).
    inline double nrmse(const std::vector<double>& predictions,
                        const std::vector<double>& targets)
    {
        if (predictions.size() != targets.size())
            throw LengthMismatchError("nrmse inputs differ in length");
        if (targets.empty())
            throw EmptyError("nrmse needs at least one point");
        const double n = static_cast<double>(targets.size());
        double mean = 0.0;
        for (double t : targets)
            mean += t;
        mean /= n;
        double var = 0.0;
        double mse = 0.0;
        for (std::size_t i = 0; i < targets.size(); ++i) {
            var += (targets[i] - mean) * (targets[i] - mean);
            mse += (predictions[i] - targets[i]) * (predictions[i] - targets[i]);
        }
        return std::sqrt(mse / n) / std::max(std::sqrt(var / n), 1e-12);
    }

    /// Mean negative Gaussian log-likelihood of the targets under the
    /// predictive means and variances.
    inline double mnll(const std::vector<double>& means, const std::vector<double>& variances,
                       const std::vector<double>& targets)
    {
        if (means.size() != targets.size() || variances.size() != targets.size())
            throw LengthMismatchError("mnll inputs differ in length");
        if (targets.empty())
            throw EmptyError("mnll needs at least one point");
        constexpr double log_2pi = 1.8378770664093454836;
        double total = 0.0;
        for (std::size_t i = 0; i < targets.size(); ++i) {
            if (!(variances[i] > 0.0))
                throw InvalidParameterError("mnll variances must be positive");
            const double r = targets[i] - means[i];
            total += 0.5 * (log_2pi + std::log(variances[i]) + r * r / variances[i]);
        }
        return total / static_cast<double>(targets.size());
    }

    struct MetricReport {
        double nrmse_value = 0.0; // highest fidelity
        double mnll_value = 0.0;
        std::vector<double> per_fidelity_nrmse;
        std::vector<double> per_fidelity_mnll;
        double acceptance_rate = 0.0;
    };

    namespace detail {
        /// MNLL under the per-sample Gaussian mixture predictive instead of
        /// the moment-matched Gaussian.
        inline double mixture_mnll(const darn::DarnModel& model,
                                   const hmc::PosteriorSampleSet& samples,
                                   const std::vector<numerics::Vector>& points,
                                   const std::vector<double>& targets, std::size_t m)
        {
            constexpr double log_2pi = 1.8378770664093454836;
            const auto n_points = points.size();
            const auto n_samples = samples.size();
            numerics::Matrix x(static_cast<Eigen::Index>(model.input_dim()),
                               static_cast<Eigen::Index>(n_points));
            for (std::size_t i = 0; i < n_points; ++i)
                x.col(static_cast<Eigen::Index>(i))
                    = samples.scaler.scale_input(points[i]);

            numerics::Matrix log_densities(static_cast<Eigen::Index>(n_samples),
                                           static_cast<Eigen::Index>(n_points));
            darn::detail::ChainTrace trace;
            for (std::size_t j = 0; j < n_samples; ++j) {
                darn::detail::chain_forward_batch(model, samples.weight_samples[j], x, m,
                                                  trace);
                const double noise_var = samples.scaler.destandardize_variance(
                    1.0 / samples.tau_samples[j](static_cast<Eigen::Index>(m) - 1), m);
                for (std::size_t i = 0; i < n_points; ++i) {
                    const double mean = samples.scaler.destandardize(
                        trace.outputs(static_cast<Eigen::Index>(m) - 1,
                                      static_cast<Eigen::Index>(i)),
                        m);
                    const double r = targets[i] - mean;
                    log_densities(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i))
                        = -0.5 * (log_2pi + std::log(noise_var) + r * r / noise_var);
                }
            }
            double total = 0.0;
            for (std::size_t i = 0; i < n_points; ++i) {
                const auto col = log_densities.col(static_cast<Eigen::Index>(i));
                const double peak = col.maxCoeff();
                const double sum = (col.array() - peak).exp().sum();
                total -= peak + std::log(sum / static_cast<double>(n_samples));
            }
            return total / static_cast<double>(n_points);
        }
    } // namespace detail

    /// Trains on a freshly generated synthetic set and scores the posterior
    /// on uniform test points (disjoint stream) at every fidelity; the
    /// headline numbers are the highest fidelity's.
    inline MetricReport evaluate_surrogate(const RunConfig& cfg,
                                           const benchmarks::MultiFidelityFunction& fn,
                                           const benchmarks::SyntheticDatasetSpec& spec,
                                           std::size_t test_count,
                                           numerics::RandomSource& rng)
    {
        const auto data = benchmarks::generate_dataset(fn, spec, rng);
        const auto scaler = darn::fit_scaler(data, fn.domain);
        const auto model = darn::DarnModel(fn.fidelity_count,
                                           static_cast<std::size_t>(fn.domain.dim()),
                                           cfg.hidden_widths, cfg.prior_a0, cfg.prior_b0);
        const auto samples = hmc::sample_posterior(model, data, scaler, cfg.hmc, rng);

        numerics::RandomSource test_rng = rng.split();
        std::vector<numerics::Vector> test_points(test_count);
        for (auto& point : test_points)
            point = fn.domain.sample(test_rng);

        MetricReport report;
        report.acceptance_rate = samples.acceptance_rate;
        for (std::size_t m = 1; m <= fn.fidelity_count; ++m) {
            std::vector<double> targets(test_count);
            for (std::size_t i = 0; i < test_count; ++i)
                targets[i] = fn(test_points[i], m);
            const auto preds = darn::predict_many(model, samples, test_points, m, scaler);
            std::vector<double> means(test_count), variances(test_count);
            for (std::size_t i = 0; i < test_count; ++i) {
                means[i] = preds[i].mean;
                variances[i] = preds[i].variance;
            }
            report.per_fidelity_nrmse.push_back(nrmse(means, targets));
            report.per_fidelity_mnll.push_back(
                cfg.mixture_predictive
                    ? detail::mixture_mnll(model, samples, test_points, targets, m)
                    : mnll(means, variances, targets));
        }
        report.nrmse_value = report.per_fidelity_nrmse.back();
        report.mnll_value = report.per_fidelity_mnll.back();
        return report;
    }

} // namespace mfbo::driver
