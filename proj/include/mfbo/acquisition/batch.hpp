#pragma once

#include <algorithm>
#include <cstddef>
#include <utility>
#include <vector>

#include <mfbo/acquisition/f_star.hpp>
#include <mfbo/acquisition/moments.hpp>
#include <mfbo/acquisition/types.hpp>
#include <mfbo/box.hpp>
#include <mfbo/numerics/random.hpp>
#include <mfbo/opt/nelder_mead.hpp>

namespace mfbo::acquisition {

    namespace detail {

        inline bool canonical_less(const QueryPoint& a, const QueryPoint& b)
        {
            if (a.fidelity != b.fidelity)
                return a.fidelity < b.fidelity;
            for (Eigen::Index i = 0; i < a.x.size() && i < b.x.size(); ++i)
                if (a.x(i) != b.x(i))
                    return a.x(i) < b.x(i);
            return false;
        }

        struct PairColumn {
            QueryPoint point;
            numerics::Vector values; // chain outputs per subsampled draw
        };

        inline numerics::Vector pair_column(const hmc::PosteriorSampleSet& samples,
                                            const std::vector<std::size_t>& indices,
                                            const QueryPoint& point)
        {
            numerics::Vector column(static_cast<Eigen::Index>(indices.size()));
            for (std::size_t j = 0; j < indices.size(); ++j)
                column(static_cast<Eigen::Index>(j))
                    = chain_output(*samples.model, samples.weight_samples[indices[j]],
                                   samples.scaler, point.x, point.fidelity);
            return column;
        }

        /// Acquisition value from precomputed per-pair columns. Pairs are
        /// evaluated in a canonical (fidelity, input) order so that the value
        /// is bit-identical under any permutation of the batch.
        inline double acq_from_columns(std::vector<const PairColumn*> columns,
                                       const numerics::Vector& f_stars,
                                       const CostModel& costs,
                                       const numerics::JitterPolicy& policy)
        {
            std::sort(columns.begin(), columns.end(),
                      [](const PairColumn* a, const PairColumn* b) {
                          return canonical_less(a->point, b->point);
                      });
            const auto draws = f_stars.size();
            const auto b = static_cast<Eigen::Index>(columns.size());
            numerics::Matrix joint(draws, b + 1);
            for (Eigen::Index k = 0; k < b; ++k)
                joint.col(k) = columns[static_cast<std::size_t>(k)]->values;
            joint.col(b) = f_stars;

            const double mi = mutual_information(estimate_moments(joint), policy);
            double total_cost = 0.0;
            for (const auto* column : columns)
                total_cost += costs.cost(column->point.fidelity);
            return mi / total_cost;
        }

    } // namespace detail

    /// Cost-normalized batch acquisition: mutual information between the
    /// batch outputs and f*, divided by the total querying cost.
    inline double batch_acquisition(const QueryBatch& batch,
                                    const hmc::PosteriorSampleSet& samples,
                                    const numerics::Vector& f_stars, const CostModel& costs,
                                    const numerics::JitterPolicy& policy = {})
    {
        const auto indices
            = subsample_indices(samples.size(), static_cast<std::size_t>(f_stars.size()));
        std::vector<detail::PairColumn> columns;
        columns.reserve(batch.size());
        for (const auto& pair : batch.pairs)
            columns.push_back({pair, detail::pair_column(samples, indices, pair)});
        std::vector<const detail::PairColumn*> ptrs;
        ptrs.reserve(columns.size());
        for (const auto& column : columns)
            ptrs.push_back(&column);
        return detail::acq_from_columns(std::move(ptrs), f_stars, costs, policy);
    }

    /// Acquisition of the batch with slot k (1-based) replaced by candidate.
    inline double conditional_acquisition(std::size_t k, const QueryPoint& candidate,
                                          const QueryBatch& batch,
                                          const hmc::PosteriorSampleSet& samples,
                                          const numerics::Vector& f_stars,
                                          const CostModel& costs,
                                          const numerics::JitterPolicy& policy = {})
    {
        if (k < 1 || k > batch.size())
            throw InvalidParameterError("slot index out of range");
        QueryBatch modified = batch;
        modified.pairs[k - 1] = candidate;
        return batch_acquisition(modified, samples, f_stars, costs, policy);
    }

    struct PairResult {
        QueryPoint point;
        double value = 0.0;
    };

    /// Best replacement for slot k: for every fidelity, a multi-start
    /// Nelder-Mead search over the sigmoid-reparameterized box, with the
    /// incumbent always among the starts. The returned value never falls
    /// below the incumbent batch value.
    inline PairResult optimize_pair(std::size_t k, const QueryBatch& batch,
                                    const hmc::PosteriorSampleSet& samples,
                                    const numerics::Vector& f_stars, const CostModel& costs,
                                    const AcqOptConfig& cfg, const Box& domain,
                                    numerics::RandomSource& rng,
                                    std::size_t* inner_opt_calls = nullptr)
    {
        if (k < 1 || k > batch.size())
            throw InvalidParameterError("slot index out of range");
        const auto indices
            = subsample_indices(samples.size(), static_cast<std::size_t>(f_stars.size()));
        const numerics::JitterPolicy policy{};

        // Columns for the fixed slots are reused across every candidate.
        std::vector<detail::PairColumn> columns;
        columns.reserve(batch.size());
        for (const auto& pair : batch.pairs)
            columns.push_back({pair, detail::pair_column(samples, indices, pair)});

        std::vector<const detail::PairColumn*> ptrs;
        ptrs.reserve(columns.size());
        for (const auto& column : columns)
            ptrs.push_back(&column);
        const double incumbent_value
            = detail::acq_from_columns(ptrs, f_stars, costs, policy);
        PairResult best{batch.pairs[k - 1], incumbent_value};

        const std::size_t fidelities = samples.model->fidelity_count();
        for (std::size_t m = 1; m <= fidelities; ++m) {
            if (inner_opt_calls)
                ++*inner_opt_calls;
            detail::PairColumn candidate;
            auto value_at = [&](const numerics::Vector& u) {
                candidate.point = QueryPoint{domain.from_unit(u), m};
                candidate.values = detail::pair_column(samples, indices, candidate.point);
                std::vector<const detail::PairColumn*> with_candidate;
                with_candidate.reserve(columns.size());
                for (std::size_t j = 0; j < columns.size(); ++j)
                    with_candidate.push_back(j == k - 1 ? &candidate : &columns[j]);
                return detail::acq_from_columns(std::move(with_candidate), f_stars, costs,
                                                policy);
            };

            std::vector<numerics::Vector> starts;
            starts.push_back(domain.to_unit(batch.pairs[k - 1].x));
            if (cfg.restarts > 1) {
                auto lhs = opt::latin_hypercube(cfg.restarts - 1, domain.dim(), rng);
                starts.insert(starts.end(), lhs.begin(), lhs.end());
            }
            for (const auto& start : starts) {
                const auto result
                    = opt::nelder_mead_maximize_unit(value_at, start, cfg.eval_budget);
                if (result.value > best.value)
                    best = {QueryPoint{domain.from_unit(result.point), m}, result.value};
            }
        }
        return best;
    }

    /// Progress record of one alternating batch optimization.
    struct BatchTrace {
        std::vector<double> values; // acquisition after init and each slot update
        std::size_t iterations = 0;
        std::size_t inner_opt_calls = 0;
    };

    /// Alternating maximization of the batch acquisition: random batch init,
    /// cyclic slot updates, stopped once a full sweep improves by less than
    /// the tolerance or the iteration cap is reached. The acquisition value
    /// is nondecreasing across every inner update.
    inline QueryBatch optimize_batch(const hmc::PosteriorSampleSet& samples,
                                     const numerics::Vector& f_stars, const CostModel& costs,
                                     const AcqOptConfig& cfg, const Box& domain,
                                     std::size_t batch_size, numerics::RandomSource& rng,
                                     BatchTrace* trace = nullptr)
    {
        cfg.validate();
        if (batch_size < 1)
            throw InvalidParameterError("batch size must be >= 1");
        const std::size_t fidelities = samples.model->fidelity_count();
        if (static_cast<std::size_t>(costs.lambdas.size()) != fidelities)
            throw InvalidParameterError("cost model size does not match fidelity count");

        QueryBatch batch;
        batch.pairs.reserve(batch_size);
        for (std::size_t i = 0; i < batch_size; ++i)
            batch.pairs.push_back(
                {domain.sample(rng), 1 + static_cast<std::size_t>(rng.uniform_index(fidelities))});

        double value = batch_acquisition(batch, samples, f_stars, costs);
        if (trace)
            trace->values.push_back(value);

        for (std::size_t iter = 0; iter < cfg.max_iterations; ++iter) {
            if (trace)
                ++trace->iterations;
            const double sweep_start = value;
            for (std::size_t k = 1; k <= batch.size(); ++k) {
                const auto result
                    = optimize_pair(k, batch, samples, f_stars, costs, cfg, domain, rng,
                                    trace ? &trace->inner_opt_calls : nullptr);
                if (result.value > value) {
                    batch.pairs[k - 1] = result.point;
                    value = result.value;
                }
                if (trace)
                    trace->values.push_back(value);
            }
            if (value - sweep_start < cfg.tolerance)
                break;
        }
        return batch;
    }

    /// Convenience overload that draws the f* samples itself.
    inline QueryBatch optimize_batch(const hmc::PosteriorSampleSet& samples,
                                     const CostModel& costs, const AcqOptConfig& cfg,
                                     const Box& domain, std::size_t batch_size,
                                     numerics::RandomSource& rng, BatchTrace* trace = nullptr)
    {
        const numerics::Vector f_stars = sample_f_star(
            samples, cfg.sample_count, domain, rng, cfg.restarts, cfg.eval_budget);
        return optimize_batch(samples, f_stars, costs, cfg, domain, batch_size, rng, trace);
    }

} // namespace mfbo::acquisition
