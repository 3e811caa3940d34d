#pragma once

#include <cstddef>
#include <vector>

#include <mfbo/benchmarks/functions.hpp>
#include <mfbo/darn/model.hpp>
#include <mfbo/numerics/random.hpp>

namespace mfbo::benchmarks {

    /// Per-fidelity sample counts for a synthetic training set; points are
    /// drawn uniformly over the box and targets are exact (noise-free).
    struct SyntheticDatasetSpec {
        std::vector<std::size_t> counts;
    };

    inline darn::FidelityDataset generate_dataset(const MultiFidelityFunction& fn,
                                                  const SyntheticDatasetSpec& spec,
                                                  numerics::RandomSource& rng)
    {
        darn::FidelityDataset data(fn.fidelity_count);
        for (std::size_t m = 1; m <= fn.fidelity_count && m <= spec.counts.size(); ++m) {
            for (std::size_t n = 0; n < spec.counts[m - 1]; ++n) {
                numerics::Vector x = fn.domain.sample(rng);
                const double y = fn(x, m);
                data.add(m, std::move(x), y);
            }
        }
        return data;
    }

} // namespace mfbo::benchmarks
