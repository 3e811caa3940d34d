#pragma once

#include <cstddef>
#include <iostream>
#include <utility>
#include <vector>

#include <mfbo/box.hpp>
#include <mfbo/errors.hpp>
#include <mfbo/numerics/dense.hpp>

namespace mfbo::acquisition {

    struct QueryPoint {
        numerics::Vector x;
        std::size_t fidelity = 1;
    };

    /// B (input, fidelity) pairs under construction or issued.
    struct QueryBatch {
        std::vector<QueryPoint> pairs;

        std::size_t size() const { return pairs.size(); }

        void validate(const Box& domain, std::size_t fidelity_count) const
        {
            if (pairs.empty())
                throw InvalidParameterError("query batch must hold at least one pair");
            for (const auto& p : pairs) {
                if (p.fidelity < 1 || p.fidelity > fidelity_count)
                    throw FidelityOutOfRangeError("query fidelity out of range");
                if (!domain.contains(p.x))
                    throw InvalidParameterError("query input outside the domain box");
            }
        }
    };

    /// Per-fidelity querying cost in abstract units.
    struct CostModel {
        numerics::Vector lambdas;

        explicit CostModel(numerics::Vector costs = {}) : lambdas(std::move(costs))
        {
            for (Eigen::Index m = 0; m < lambdas.size(); ++m) {
                if (!(lambdas(m) > 0.0))
                    throw InvalidParameterError("costs must be strictly positive");
                if (m > 0 && lambdas(m) < lambdas(m - 1))
                    std::cerr << "[mfbo] warning: cost model decreases with fidelity\n";
            }
        }

        double cost(std::size_t fidelity) const
        {
            return lambdas(static_cast<Eigen::Index>(fidelity) - 1);
        }
    };

    /// Moment-matched Gaussian for [f_1..f_B; f*]: sample mean, unbiased
    /// sample covariance, and any jitter already committed to the covariance.
    struct MomentEstimate {
        numerics::Vector mu;
        numerics::Matrix sigma;
        double applied_jitter = 0.0;
    };

    /// Settings for the batch acquisition search: L posterior draws, at most
    /// max_iterations alternating sweeps stopped once an entire sweep improves
    /// by less than tolerance, and multi-start inner searches with the given
    /// restart count and per-start evaluation budget.
    struct AcqOptConfig {
        std::size_t sample_count = 100;
        std::size_t max_iterations = 100;
        double tolerance = 1e-3;
        std::size_t restarts = 5;
        std::size_t eval_budget = 200;

        void validate() const
        {
            if (sample_count < 1 || max_iterations < 1 || restarts < 1 || eval_budget < 1)
                throw InvalidParameterError("acquisition counts must be >= 1");
            if (!(tolerance > 0.0))
                throw InvalidParameterError("acquisition tolerance must be positive");
        }
    };

} // namespace mfbo::acquisition
