#pragma once

#include <cmath>
#include <cstddef>
#include <iostream>
#include <memory>
#include <utility>
#include <vector>

#include <mfbo/darn/log_joint.hpp>
#include <mfbo/darn/model.hpp>
#include <mfbo/errors.hpp>
#include <mfbo/hmc/leapfrog.hpp>
#include <mfbo/hmc/sample_set.hpp>
#include <mfbo/numerics/random.hpp>

namespace mfbo::hmc {

    namespace detail {
        inline darn::NoisePrecisions gibbs_tau_from_ss(const darn::DarnModel& model,
                                                       const std::vector<double>& ss,
                                                       const std::vector<std::size_t>& counts,
                                                       numerics::RandomSource& rng)
        {
            darn::NoisePrecisions taus(static_cast<Eigen::Index>(model.fidelity_count()));
            for (std::size_t m = 1; m <= model.fidelity_count(); ++m) {
                const double shape
                    = model.prior_shape() + 0.5 * static_cast<double>(counts[m - 1]);
                const double rate = model.prior_rate() + 0.5 * ss[m - 1];
                taus(static_cast<Eigen::Index>(m) - 1)
                    = numerics::gamma_sample(shape, rate, rng);
            }
            return taus;
        }
    } // namespace detail

    /// Conjugate draw of every noise precision given the current weights:
    /// tau_m ~ Gamma(a0 + N_m/2, b0 + SS_m/2) on scaled data.
    inline darn::NoisePrecisions gibbs_tau(const darn::DarnModel& model,
                                           const darn::WeightVector& w,
                                           const darn::FidelityDataset& data, double a0,
                                           double b0, numerics::RandomSource& rng)
    {
        const auto ss = darn::residual_ss(model, w, data);
        const auto counts = darn::detail::fidelity_counts(model, data);
        darn::NoisePrecisions taus(static_cast<Eigen::Index>(model.fidelity_count()));
        for (std::size_t m = 1; m <= model.fidelity_count(); ++m)
            taus(static_cast<Eigen::Index>(m) - 1) = numerics::gamma_sample(
                a0 + 0.5 * static_cast<double>(counts[m - 1]), b0 + 0.5 * ss[m - 1], rng);
        return taus;
    }

    /// One Metropolis-corrected leapfrog proposal over the weights, with the
    /// precisions held fixed. Diverged trajectories count as rejections.
    inline std::pair<ChainState, bool> hmc_step(const ChainState& state,
                                                const darn::DarnModel& model,
                                                const darn::FidelityDataset& data,
                                                const HmcConfig& cfg,
                                                numerics::RandomSource& rng)
    {
        numerics::Vector momentum(state.weights.size());
        for (Eigen::Index i = 0; i < momentum.size(); ++i)
            momentum(i) = rng.normal();
        const double h0 = -state.log_joint + 0.5 * momentum.squaredNorm();

        auto grad = [&](const numerics::Vector& q) {
            return darn::grad_log_joint(model, q, state.taus, data);
        };
        try {
            PhasePoint proposal = leapfrog(state.weights, std::move(momentum), cfg.step_size,
                                           cfg.leapfrog_steps, grad);
            const double proposal_lj
                = darn::log_joint(model, proposal.position, state.taus, data);
            const double h1 = -proposal_lj + 0.5 * proposal.momentum.squaredNorm();
            if (!std::isfinite(h1))
                return {state, false};
            const double log_u = std::log(rng.uniform() + 1e-300);
            if (log_u < h0 - h1)
                return {ChainState{std::move(proposal.position), state.taus, proposal_lj},
                        true};
            return {state, false};
        } catch (const NonFiniteError&) {
            return {state, false};
        }
    }

    namespace detail {
        /// Plain gradient-ascent warm start toward a posterior mode, with the
        /// precisions pinned at their conditional means.
        inline void map_warm_start(const darn::DarnModel& model, darn::WeightVector& w,
                                   darn::NoisePrecisions& taus,
                                   const darn::FidelityDataset& data, std::size_t steps)
        {
            const auto counts = darn::detail::fidelity_counts(model, data);
            for (std::size_t i = 0; i < steps; ++i) {
                auto ss = darn::residual_ss(model, w, data);
                for (std::size_t m = 1; m <= model.fidelity_count(); ++m)
                    taus(static_cast<Eigen::Index>(m) - 1)
                        = (model.prior_shape() + 0.5 * static_cast<double>(counts[m - 1]))
                        / (model.prior_rate() + 0.5 * ss[m - 1]);
                w += 1e-3 * darn::grad_log_joint(model, w, taus, data);
            }
        }
    } // namespace detail

    /// Full posterior inference pass: prior-initialized chain alternating one
    /// HMC step on the weights with one conjugate precision draw, discarding
    /// burn_in_steps iterations and then keeping every thinning-th state until
    /// sample_count draws are stored. Data arrives in the original domain and
    /// is mapped through the scaler internally.
    inline PosteriorSampleSet sample_posterior(const darn::DarnModel& model,
                                               const darn::FidelityDataset& data,
                                               const darn::Scaler& scaler,
                                               const HmcConfig& cfg,
                                               numerics::RandomSource& rng)
    {
        cfg.validate();
        if (data.total_count() == 0)
            throw InvalidParameterError("cannot fit a posterior on an empty dataset");

        const darn::FidelityDataset scaled = darn::apply_scaler(scaler, data);
        const auto counts = darn::detail::fidelity_counts(model, scaled);

        darn::WeightVector w = darn::init_weights(model, rng);
        darn::NoisePrecisions taus(static_cast<Eigen::Index>(model.fidelity_count()));
        if (cfg.map_warm_start)
            detail::map_warm_start(model, w, taus, scaled, 500);
        auto ss = darn::residual_ss(model, w, scaled);
        taus = detail::gibbs_tau_from_ss(model, ss, counts, rng);
        ChainState state;
        state.weights = std::move(w);
        state.taus = taus;
        state.log_joint = darn::detail::log_joint_from_ss(model, state.weights, state.taus,
                                                          ss, counts);

        PosteriorSampleSet set;
        set.model = std::make_shared<darn::DarnModel>(model);
        set.scaler = scaler;
        set.weight_samples.reserve(cfg.sample_count);
        set.tau_samples.reserve(cfg.sample_count);

        const std::size_t total_iters = cfg.burn_in_steps + cfg.thinning * cfg.sample_count;
        std::size_t accepted = 0;
        std::size_t accepted_post = 0;
        std::size_t post_iters = 0;
        for (std::size_t iter = 1; iter <= total_iters; ++iter) {
            auto [next, ok] = hmc_step(state, model, scaled, cfg, rng);
            state = std::move(next);

            ss = darn::residual_ss(model, state.weights, scaled);
            state.taus = detail::gibbs_tau_from_ss(model, ss, counts, rng);
            state.log_joint = darn::detail::log_joint_from_ss(model, state.weights,
                                                              state.taus, ss, counts);

            accepted += ok ? 1 : 0;
            if (iter > cfg.burn_in_steps) {
                ++post_iters;
                accepted_post += ok ? 1 : 0;
                if ((iter - cfg.burn_in_steps) % cfg.thinning == 0) {
                    set.weight_samples.push_back(state.weights);
                    set.tau_samples.push_back(state.taus);
                }
            }
        }
        set.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(total_iters);

        if (post_iters > 0
            && static_cast<double>(accepted_post) < 0.01 * static_cast<double>(post_iters))
            throw ChainDivergedError("HMC chain rejected >99% of post-burn-in proposals");
        if (set.acceptance_rate <= 0.2 || set.acceptance_rate >= 0.99)
            std::cerr << "[mfbo] warning: HMC acceptance rate " << set.acceptance_rate
                      << " outside (0.2, 0.99); consider adjusting step_size\n";
        return set;
    }

} // namespace mfbo::hmc
