#pragma once

#include <cmath>

#include <mfbo/errors.hpp>
#include <mfbo/numerics/dense.hpp>

namespace mfbo::numerics {

    /// Central-difference gradient, (f(x+h*e_i) - f(x-h*e_i)) / 2h per coordinate.
    template <typename F>
    Vector finite_difference_gradient(F&& f, const Vector& x, double h)
    {
        Vector grad(x.size());
        Vector probe = x;
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            probe(i) = x(i) + h;
            const double up = f(probe);
            probe(i) = x(i) - h;
            const double down = f(probe);
            probe(i) = x(i);
            if (!std::isfinite(up) || !std::isfinite(down))
                throw NonFiniteError("finite-difference probe is not finite");
            grad(i) = (up - down) / (2.0 * h);
        }
        return grad;
    }

} // namespace mfbo::numerics
