#pragma once

#include <cstddef>
#include <utility>

#include <mfbo/errors.hpp>
#include <mfbo/numerics/dense.hpp>

namespace mfbo::hmc {

    struct PhasePoint {
        numerics::Vector position;
        numerics::Vector momentum;
    };

    /// n leapfrog steps on the potential U = -log_target; grad returns the
    /// gradient of log_target. Volume-preserving and time-reversible; throws
    /// NonFiniteError on a diverged trajectory (callers treat as rejection).
    template <typename GradFn>
    PhasePoint leapfrog(numerics::Vector q, numerics::Vector p, double step, std::size_t n,
                        GradFn&& grad)
    {
        numerics::Vector g = grad(q);
        p += (0.5 * step) * g;
        for (std::size_t i = 0; i < n; ++i) {
            q += step * p;
            if (!q.allFinite())
                throw NonFiniteError("leapfrog position diverged");
            g = grad(q);
            p += ((i + 1 < n) ? step : 0.5 * step) * g;
            if (!p.allFinite())
                throw NonFiniteError("leapfrog momentum diverged");
        }
        return {std::move(q), std::move(p)};
    }

} // namespace mfbo::hmc
