#pragma once

#include <cstddef>
#include <vector>

#include <mfbo/acquisition/moments.hpp>
#include <mfbo/acquisition/types.hpp>
#include <mfbo/box.hpp>
#include <mfbo/hmc/sample_set.hpp>
#include <mfbo/numerics/random.hpp>
#include <mfbo/opt/bfgs.hpp>

namespace mfbo::acquisition {

    /// Per-draw optima of the highest-fidelity surrogate: for each of L
    /// subsampled weight draws, maximizes f_M over the box with multi-start
    /// quasi-Newton search from Latin-hypercube starts. A stalled search
    /// falls back to its best probed point, so the batch never fails.
    inline numerics::Vector sample_f_star(const hmc::PosteriorSampleSet& samples,
                                          std::size_t draws, const Box& domain,
                                          numerics::RandomSource& rng,
                                          std::size_t restarts = 5,
                                          std::size_t eval_budget = 200)
    {
        const auto indices = subsample_indices(samples.size(), draws);
        const auto& model = *samples.model;
        const std::size_t top = model.fidelity_count();

        numerics::Vector f_stars(static_cast<Eigen::Index>(draws));
        for (std::size_t j = 0; j < draws; ++j) {
            const auto& w = samples.weight_samples[indices[j]];
            auto objective = [&](const numerics::Vector& u) {
                return chain_output(model, w, samples.scaler, domain.from_unit(u), top);
            };
            const auto starts = opt::latin_hypercube(restarts, domain.dim(), rng);
            double best = -std::numeric_limits<double>::infinity();
            for (const auto& start : starts) {
                const auto result = opt::bfgs_maximize_unit(objective, start, eval_budget);
                best = std::max(best, result.value);
            }
            f_stars(static_cast<Eigen::Index>(j)) = best;
        }
        return f_stars;
    }

} // namespace mfbo::acquisition
