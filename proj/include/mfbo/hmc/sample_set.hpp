#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include <mfbo/darn/model.hpp>
#include <mfbo/errors.hpp>

namespace mfbo::hmc {

    /// Sampler settings; defaults follow the reference setup (5k burn-in,
    /// one kept state every 10 steps until 200 are stored, 10 leapfrog steps
    /// of size 0.012).
    struct HmcConfig {
        std::size_t burn_in_steps = 5000;
        std::size_t thinning = 10;
        std::size_t sample_count = 200;
        std::size_t leapfrog_steps = 10;
        double step_size = 0.012;
        bool map_warm_start = false;

        void validate() const
        {
            if (burn_in_steps < 1 || thinning < 1 || sample_count < 1 || leapfrog_steps < 1)
                throw InvalidParameterError("HMC counts must be >= 1");
            if (!(step_size > 0.0))
                throw InvalidParameterError("HMC step size must be positive");
        }
    };

    /// Joint posterior draws of all network weights and noise precisions,
    /// plus the model they were drawn for and the scaler that maps raw data
    /// into model space.
    struct PosteriorSampleSet {
        std::shared_ptr<const darn::DarnModel> model;
        std::vector<darn::WeightVector> weight_samples;
        std::vector<darn::NoisePrecisions> tau_samples;
        double acceptance_rate = 0.0;
        darn::Scaler scaler;

        std::size_t size() const { return weight_samples.size(); }
    };

    /// Current position of the sampling chain with its cached joint
    /// log-density.
    struct ChainState {
        darn::WeightVector weights;
        darn::NoisePrecisions taus;
        double log_joint = 0.0;
    };

} // namespace mfbo::hmc
