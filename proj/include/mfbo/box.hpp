#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include <mfbo/errors.hpp>
#include <mfbo/numerics/dense.hpp>
#include <mfbo/numerics/random.hpp>

namespace mfbo {

    /// Axis-aligned input domain.
    struct Box {
        numerics::Vector lower;
        numerics::Vector upper;

        Box() = default;
        Box(numerics::Vector lo, numerics::Vector hi)
            : lower(std::move(lo)), upper(std::move(hi))
        {
            if (lower.size() != upper.size())
                throw DegenerateBoundsError("bound dimensions differ");
            for (Eigen::Index i = 0; i < lower.size(); ++i)
                if (!(upper(i) > lower(i)))
                    throw DegenerateBoundsError("upper bound must exceed lower bound");
        }

        Eigen::Index dim() const { return lower.size(); }

        bool contains(const numerics::Vector& x) const
        {
            if (x.size() != dim())
                return false;
            for (Eigen::Index i = 0; i < dim(); ++i)
                if (x(i) < lower(i) || x(i) > upper(i))
                    return false;
            return true;
        }

        numerics::Vector sample(numerics::RandomSource& rng) const
        {
            numerics::Vector x(dim());
            for (Eigen::Index i = 0; i < dim(); ++i)
                x(i) = rng.uniform_in(lower(i), upper(i));
            return x;
        }

        /// Affine map into the unit cube.
        numerics::Vector to_unit(const numerics::Vector& x) const
        {
            return (x - lower).cwiseQuotient(upper - lower);
        }

        numerics::Vector from_unit(const numerics::Vector& u) const
        {
            return lower + u.cwiseProduct(upper - lower);
        }
    };

    namespace opt {

        /// Unconstrained-to-unit-cube reparameterization used by the box
        /// optimizers: u = sigmoid(z) elementwise.
        inline numerics::Vector sigmoid_to_unit(const numerics::Vector& z)
        {
            numerics::Vector u(z.size());
            for (Eigen::Index i = 0; i < z.size(); ++i)
                u(i) = 1.0 / (1.0 + std::exp(-z(i)));
            return u;
        }

        inline numerics::Vector unit_to_sigmoid(const numerics::Vector& u)
        {
            numerics::Vector z(u.size());
            for (Eigen::Index i = 0; i < u.size(); ++i) {
                const double c = std::clamp(u(i), 1e-9, 1.0 - 1e-9);
                z(i) = std::log(c / (1.0 - c));
            }
            return z;
        }

        /// n stratified points in the unit cube (one per stratum along every
        /// axis, strata visited in a random permutation).
        inline std::vector<numerics::Vector> latin_hypercube(std::size_t n, Eigen::Index dim,
                                                             numerics::RandomSource& rng)
        {
            std::vector<numerics::Vector> points(n, numerics::Vector(dim));
            for (Eigen::Index j = 0; j < dim; ++j) {
                std::vector<std::size_t> order(n);
                for (std::size_t i = 0; i < n; ++i)
                    order[i] = i;
                for (std::size_t i = n; i > 1; --i)
                    std::swap(order[i - 1], order[rng.uniform_index(i)]);
                for (std::size_t i = 0; i < n; ++i)
                    points[i](j) = (static_cast<double>(order[i]) + rng.uniform())
                        / static_cast<double>(n);
            }
            return points;
        }

    } // namespace opt

} // namespace mfbo
