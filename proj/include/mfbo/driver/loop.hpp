#pragma once

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

#include <mfbo/acquisition/batch.hpp>
#include <mfbo/benchmarks/functions.hpp>
#include <mfbo/driver/config.hpp>
#include <mfbo/driver/csv.hpp>
#include <mfbo/driver/state.hpp>
#include <mfbo/errors.hpp>
#include <mfbo/hmc/sampler.hpp>

namespace mfbo::driver {

    /// Fresh state: seeded RNG and, in benchmark mode, the initial design of
    /// init_per_fidelity uniform points per fidelity, evaluated and charged.
    inline OptimizationState init_state(const RunConfig& cfg,
                                        const benchmarks::MultiFidelityFunction* fn)
    {
        OptimizationState state;
        state.rng = numerics::RandomSource(cfg.seed);
        state.data = darn::FidelityDataset(cfg.fidelity_count);
        if (!fn)
            return state;
        const auto costs = cfg.cost_model();
        std::size_t index = 0;
        for (std::size_t m = 1; m <= cfg.fidelity_count; ++m) {
            for (std::size_t i = 0; i < cfg.init_per_fidelity; ++i) {
                numerics::Vector x = cfg.domain.sample(state.rng);
                const double y = (*fn)(x, m);
                state.data.add(m, x, y);
                state.cumulative_cost += costs.cost(m);
                if (m == cfg.fidelity_count)
                    state.record_best(y, x);
                HistoryRow row;
                row.round = 0;
                row.query_index = index++;
                row.fidelity = m;
                row.x = std::move(x);
                row.y = y;
                row.cost = costs.cost(m);
                row.cumulative_cost = state.cumulative_cost;
                row.best_so_far = state.best_or_nan();
                state.history.push_back(std::move(row));
            }
        }
        return state;
    }

    /// Seeds an external-mode state with caller-supplied observations; they
    /// enter the dataset uncharged (the ledger only counts issued queries).
    inline void seed_observations(OptimizationState& state,
                                  const std::vector<Observation>& observations,
                                  const RunConfig& cfg)
    {
        for (const auto& obs : observations) {
            if (obs.fidelity < 1 || obs.fidelity > cfg.fidelity_count)
                throw FidelityOutOfRangeError("observation fidelity out of range");
            state.data.add(obs.fidelity, obs.x, obs.y);
            if (obs.fidelity == cfg.fidelity_count)
                state.record_best(obs.y, obs.x);
        }
    }

    /// Fits the posterior on the current dataset and optimizes a batch of
    /// queries, which becomes the pending batch.
    inline acquisition::QueryBatch ask(OptimizationState& state, const RunConfig& cfg)
    {
        if (!state.pending.empty())
            throw PendingBatchExistsError("a pending batch already exists; tell first");
        if (state.data.total_count() == 0)
            throw InvalidParameterError("cannot ask without any observations");
        const auto model = cfg.build_model();
        const auto scaler = darn::fit_scaler(state.data, cfg.domain);
        const auto samples
            = hmc::sample_posterior(model, state.data, scaler, cfg.hmc, state.rng);
        acquisition::QueryBatch batch
            = acquisition::optimize_batch(samples, cfg.cost_model(), cfg.acq, cfg.domain,
                                          cfg.batch_size, state.rng);
        batch.validate(cfg.domain, cfg.fidelity_count);
        state.pending = batch.pairs;
        return batch;
    }

    namespace detail {
        inline bool same_point(const numerics::Vector& a, const numerics::Vector& b)
        {
            if (a.size() != b.size())
                return false;
            for (Eigen::Index i = 0; i < a.size(); ++i)
                if (a(i) != b(i))
                    return false;
            return true;
        }
    } // namespace detail

    /// Ingests the results of the pending batch (order-insensitive, but the
    /// (x, fidelity) pairs must match exactly): appends to the dataset,
    /// charges costs, updates best-so-far, and closes the round. The optional
    /// reporter evaluates the highest fidelity at a queried input for
    /// best-so-far tracking only (zero cost, never added to the dataset).
    inline void tell(OptimizationState& state, const std::vector<Observation>& results,
                     const RunConfig& cfg,
                     const std::function<double(const numerics::Vector&)>& reporter = {})
    {
        if (state.pending.empty())
            throw NoPendingBatchError("no pending batch to tell");
        if (results.size() != state.pending.size())
            throw MismatchedResultsError("result count does not match the pending batch");

        // Match every pending pair to a distinct result before mutating.
        std::vector<std::size_t> match(state.pending.size());
        std::vector<bool> used(results.size(), false);
        for (std::size_t i = 0; i < state.pending.size(); ++i) {
            bool found = false;
            for (std::size_t j = 0; j < results.size(); ++j) {
                if (used[j] || results[j].fidelity != state.pending[i].fidelity
                    || !detail::same_point(results[j].x, state.pending[i].x))
                    continue;
                match[i] = j;
                used[j] = true;
                found = true;
                break;
            }
            if (!found)
                throw MismatchedResultsError("results do not match the pending batch");
        }

        const auto costs = cfg.cost_model();
        const std::size_t round = state.round + 1;
        for (std::size_t i = 0; i < state.pending.size(); ++i) {
            const auto& pair = state.pending[i];
            const double y = results[match[i]].y;
            state.data.add(pair.fidelity, pair.x, y);
            state.cumulative_cost += costs.cost(pair.fidelity);
            if (pair.fidelity == cfg.fidelity_count)
                state.record_best(y, pair.x);
            if (reporter)
                state.record_best(reporter(pair.x), pair.x);
            HistoryRow row;
            row.round = round;
            row.query_index = i;
            row.fidelity = pair.fidelity;
            row.x = pair.x;
            row.y = y;
            row.cost = costs.cost(pair.fidelity);
            row.cumulative_cost = state.cumulative_cost;
            row.best_so_far = state.best_or_nan();
            state.history.push_back(std::move(row));
        }
        state.pending.clear();
        state.round = round;
    }

    /// Runs benchmark-mode rounds until the round cap is reached or the next
    /// batch would exceed the budget. Invokes on_round after every completed
    /// round (for persistence).
    inline void resume_run(OptimizationState& state, const RunConfig& cfg,
                           const benchmarks::MultiFidelityFunction& fn,
                           const std::function<void(const OptimizationState&)>& on_round = {})
    {
        const auto costs = cfg.cost_model();
        const double min_cost = costs.lambdas.minCoeff();
        while (state.round < cfg.rounds) {
            if (cfg.budget
                && state.cumulative_cost + static_cast<double>(cfg.batch_size) * min_cost
                    > *cfg.budget)
                break;
            const auto batch = ask(state, cfg);
            double batch_cost = 0.0;
            for (const auto& pair : batch.pairs)
                batch_cost += costs.cost(pair.fidelity);
            if (cfg.budget && state.cumulative_cost + batch_cost > *cfg.budget) {
                state.pending.clear();
                break;
            }
            std::vector<Observation> results;
            results.reserve(batch.size());
            for (const auto& pair : batch.pairs)
                results.push_back({pair.x, pair.fidelity, fn(pair.x, pair.fidelity)});
            tell(state, results, cfg,
                 [&](const numerics::Vector& x) { return fn(x, cfg.fidelity_count); });
            if (on_round)
                on_round(state);
        }
    }

    /// Algorithm: initial design, then fit / acquire / query / augment rounds.
    inline OptimizationState run(const RunConfig& cfg)
    {
        if (cfg.external())
            throw ConfigError("run requires a named benchmark; use ask/tell externally");
        const auto fn = benchmarks::by_name(cfg.benchmark);
        OptimizationState state = init_state(cfg, &fn);
        resume_run(state, cfg, fn);
        return state;
    }

} // namespace mfbo::driver
