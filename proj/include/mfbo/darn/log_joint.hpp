#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include <mfbo/darn/model.hpp>
#include <mfbo/darn/network.hpp>
#include <mfbo/errors.hpp>
#include <mfbo/numerics/dense.hpp>

namespace mfbo::darn {

    namespace detail {

        /// Batched chain forward: all nets 1..depth evaluated on a column
        /// batch of scaled inputs, keeping per-net activations for backward.
        struct ChainTrace {
            std::vector<NetTrace> nets;
            numerics::Matrix outputs; // depth x N
        };

        inline void chain_forward_batch(const DarnModel& model, const WeightVector& w,
                                        const numerics::Matrix& x, std::size_t depth,
                                        ChainTrace& trace)
        {
            const auto n = x.cols();
            const auto d = x.rows();
            trace.nets.resize(depth);
            trace.outputs.resize(static_cast<Eigen::Index>(depth), n);
            for (std::size_t k = 1; k <= depth; ++k) {
                const auto& shape = model.shape(k);
                numerics::Matrix input(static_cast<Eigen::Index>(shape.input_dim), n);
                input.topRows(d) = x;
                if (k > 1)
                    input.bottomRows(static_cast<Eigen::Index>(k) - 1)
                        = trace.outputs.topRows(static_cast<Eigen::Index>(k) - 1);
                net_forward(shape, w.data() + model.weight_offset(k), std::move(input),
                            trace.nets[k - 1]);
                trace.outputs.row(static_cast<Eigen::Index>(k) - 1) = trace.nets[k - 1].out;
            }
        }

    } // namespace detail

    /// Per-fidelity residual sums of squares under the current weights
    /// (targets already standardized).
    inline std::vector<double> residual_ss(const DarnModel& model, const WeightVector& w,
                                           const FidelityDataset& data)
    {
        std::vector<double> ss(model.fidelity_count(), 0.0);
        detail::ChainTrace trace;
        for (std::size_t m = 1; m <= model.fidelity_count(); ++m) {
            if (m > data.fidelity_count() || data.count(m) == 0)
                continue;
            detail::chain_forward_batch(model, w, data.input_matrix(m), m, trace);
            const auto& ys = data.targets[m - 1];
            double sum = 0.0;
            for (std::size_t n = 0; n < ys.size(); ++n) {
                const double r = ys[n] - trace.outputs(static_cast<Eigen::Index>(m) - 1,
                                                       static_cast<Eigen::Index>(n));
                sum += r * r;
            }
            ss[m - 1] = sum;
        }
        return ss;
    }

    inline double log_gamma_density(double tau, double shape, double rate)
    {
        return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(tau)
            - rate * tau;
    }

    namespace detail {
        inline double log_joint_from_ss(const DarnModel& model, const WeightVector& w,
                                        const NoisePrecisions& taus,
                                        const std::vector<double>& ss,
                                        const std::vector<std::size_t>& counts)
        {
            constexpr double log_2pi = 1.8378770664093454836;
            double value = -0.5 * static_cast<double>(model.weight_count()) * log_2pi
                - 0.5 * w.squaredNorm();
            for (std::size_t m = 1; m <= model.fidelity_count(); ++m) {
                const double tau = taus(static_cast<Eigen::Index>(m) - 1);
                value += log_gamma_density(tau, model.prior_shape(), model.prior_rate());
                const double n = static_cast<double>(counts[m - 1]);
                value += 0.5 * n * (std::log(tau) - log_2pi) - 0.5 * tau * ss[m - 1];
            }
            return value;
        }

        inline std::vector<std::size_t> fidelity_counts(const DarnModel& model,
                                                        const FidelityDataset& data)
        {
            std::vector<std::size_t> counts(model.fidelity_count(), 0);
            for (std::size_t m = 1; m <= model.fidelity_count() && m <= data.fidelity_count();
                 ++m)
                counts[m - 1] = data.count(m);
            return counts;
        }
    } // namespace detail

    /// Joint log-density of weights, precisions, and scaled observations:
    /// standard-normal weight prior, Gamma priors on each precision, and
    /// Gaussian likelihoods around the chain outputs.
    inline double log_joint(const DarnModel& model, const WeightVector& w,
                            const NoisePrecisions& taus, const FidelityDataset& data)
    {
        for (Eigen::Index m = 0; m < taus.size(); ++m)
            if (!(taus(m) > 0.0))
                throw InvalidParameterError("noise precisions must be positive");
        const double value = detail::log_joint_from_ss(
            model, w, taus, residual_ss(model, w, data), detail::fidelity_counts(model, data));
        if (!std::isfinite(value))
            throw NonFiniteError("log_joint is not finite");
        return value;
    }

    /// Exact reverse-mode gradient of log_joint with respect to the weights.
    /// Residuals at fidelity m flow back into every lower network through the
    /// auto-regressive inputs.
    inline numerics::Vector grad_log_joint(const DarnModel& model, const WeightVector& w,
                                           const NoisePrecisions& taus,
                                           const FidelityDataset& data)
    {
        numerics::Vector grad = -w;
        detail::ChainTrace trace;
        const auto d = static_cast<Eigen::Index>(model.input_dim());
        for (std::size_t g = 1; g <= model.fidelity_count(); ++g) {
            if (g > data.fidelity_count() || data.count(g) == 0)
                continue;
            const auto n = static_cast<Eigen::Index>(data.count(g));
            detail::chain_forward_batch(model, w, data.input_matrix(g), g, trace);

            // Output adjoints per net; the observed fidelity seeds its own row.
            numerics::Matrix adjoint = numerics::Matrix::Zero(static_cast<Eigen::Index>(g), n);
            const double tau = taus(static_cast<Eigen::Index>(g) - 1);
            const auto& ys = data.targets[g - 1];
            for (Eigen::Index i = 0; i < n; ++i)
                adjoint(static_cast<Eigen::Index>(g) - 1, i)
                    = tau * (ys[static_cast<std::size_t>(i)]
                             - trace.outputs(static_cast<Eigen::Index>(g) - 1, i));

            numerics::Matrix input_adjoint;
            for (std::size_t k = g; k >= 1; --k) {
                const Eigen::RowVectorXd g_out = adjoint.row(static_cast<Eigen::Index>(k) - 1);
                detail::net_backward(model.shape(k), w.data() + model.weight_offset(k),
                                     trace.nets[k - 1], g_out,
                                     grad.data() + model.weight_offset(k),
                                     k > 1 ? &input_adjoint : nullptr);
                for (std::size_t j = 1; j < k; ++j)
                    adjoint.row(static_cast<Eigen::Index>(j) - 1)
                        += input_adjoint.row(d + static_cast<Eigen::Index>(j) - 1);
            }
        }
        if (!grad.allFinite())
            throw NonFiniteError("grad_log_joint is not finite");
        return grad;
    }

} // namespace mfbo::darn
