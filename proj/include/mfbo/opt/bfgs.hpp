#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>

#include <mfbo/box.hpp>
#include <mfbo/numerics/dense.hpp>

namespace mfbo::opt {

    struct OptResult {
        numerics::Vector point; // unit-cube coordinates of the best probe
        double value = 0.0;
        std::size_t evals = 0;
    };

    /// Quasi-Newton ascent of f over the unit cube through the sigmoid
    /// reparameterization, with central-difference gradients and an
    /// Armijo backtracking/doubling line search. Never evaluates more than
    /// max_evals times and always returns the best probed point.
    template <typename F>
    OptResult bfgs_maximize_unit(F&& f, const numerics::Vector& start, std::size_t max_evals)
    {
        const Eigen::Index d = start.size();
        OptResult best{start, -std::numeric_limits<double>::infinity(), 0};

        auto eval = [&](const numerics::Vector& z) {
            numerics::Vector u = sigmoid_to_unit(z);
            const double v = f(u);
            ++best.evals;
            if (v > best.value) {
                best.value = v;
                best.point = u;
            }
            return -v;
        };
        auto budget_left = [&](std::size_t need) { return best.evals + need <= max_evals; };

        const double grad_h = 1e-5;
        auto num_grad = [&](const numerics::Vector& z, numerics::Vector& g) {
            numerics::Vector probe = z;
            for (Eigen::Index i = 0; i < d; ++i) {
                probe(i) = z(i) + grad_h;
                const double up = eval(probe);
                probe(i) = z(i) - grad_h;
                const double down = eval(probe);
                probe(i) = z(i);
                g(i) = (up - down) / (2.0 * grad_h);
            }
        };
        auto clamp_z = [](numerics::Vector z) {
            for (Eigen::Index i = 0; i < z.size(); ++i)
                z(i) = std::clamp(z(i), -36.0, 36.0);
            return z;
        };

        numerics::Vector z = clamp_z(unit_to_sigmoid(start));
        if (!budget_left(1))
            return best;
        double phi = eval(z);
        numerics::Matrix h_inv = numerics::Matrix::Identity(d, d);
        numerics::Vector g(d);
        if (!budget_left(2 * static_cast<std::size_t>(d)))
            return best;
        num_grad(z, g);

        for (;;) {
            if (g.norm() < 1e-10)
                break;
            numerics::Vector dir = -(h_inv * g);
            if (dir.dot(g) >= 0.0) { // not a descent direction: reset
                h_inv.setIdentity();
                dir = -g;
            }

            // Backtrack until Armijo holds, then greedily double the step.
            double t = 1.0;
            double phi_step = 0.0;
            bool stepped = false;
            const double slope = g.dot(dir);
            for (int k = 0; k < 24; ++k) {
                if (!budget_left(1))
                    return best;
                phi_step = eval(clamp_z(z + t * dir));
                if (phi_step <= phi + 1e-4 * t * slope) {
                    stepped = true;
                    break;
                }
                t *= 0.5;
            }
            if (!stepped)
                break;
            while (budget_left(1)) {
                const double phi_next = eval(clamp_z(z + 2.0 * t * dir));
                if (phi_next < phi_step) {
                    t *= 2.0;
                    phi_step = phi_next;
                } else {
                    break;
                }
            }

            numerics::Vector z_next = clamp_z(z + t * dir);
            if (!budget_left(2 * static_cast<std::size_t>(d)))
                break;
            numerics::Vector g_next(d);
            num_grad(z_next, g_next);

            const numerics::Vector s = z_next - z;
            const numerics::Vector y = g_next - g;
            const double sy = s.dot(y);
            if (sy > 1e-12) {
                const numerics::Vector hy = h_inv * y;
                const double yhy = y.dot(hy);
                h_inv += ((sy + yhy) / (sy * sy)) * (s * s.transpose())
                    - (hy * s.transpose() + s * hy.transpose()) / sy;
            }
            if (s.norm() < 1e-12)
                break;
            z = std::move(z_next);
            g = std::move(g_next);
            phi = phi_step;
        }
        return best;
    }

} // namespace mfbo::opt
