#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include <mfbo/box.hpp>
#include <mfbo/opt/bfgs.hpp>

namespace mfbo::opt {

    /// Nelder-Mead ascent over the unit cube through the sigmoid
    /// reparameterization. Gradient-free; returns the best probed point.
    template <typename F>
    OptResult nelder_mead_maximize_unit(F&& f, const numerics::Vector& start,
                                        std::size_t max_evals)
    {
        const Eigen::Index d = start.size();
        OptResult best{start, -std::numeric_limits<double>::infinity(), 0};

        auto clamp_z = [](numerics::Vector z) {
            for (Eigen::Index i = 0; i < z.size(); ++i)
                z(i) = std::clamp(z(i), -36.0, 36.0);
            return z;
        };
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
        auto budget_left = [&] { return best.evals < max_evals; };

        struct Node {
            numerics::Vector z;
            double phi;
        };
        std::vector<Node> simplex;
        simplex.reserve(static_cast<std::size_t>(d) + 1);
        numerics::Vector z0 = clamp_z(unit_to_sigmoid(start));
        if (!budget_left())
            return best;
        simplex.push_back({z0, eval(z0)});
        for (Eigen::Index i = 0; i < d; ++i) {
            numerics::Vector z = z0;
            z(i) += 0.5;
            z = clamp_z(std::move(z));
            if (!budget_left())
                return best;
            simplex.push_back({z, eval(z)});
        }

        auto by_phi = [](const Node& a, const Node& b) { return a.phi < b.phi; };
        while (budget_left()) {
            std::sort(simplex.begin(), simplex.end(), by_phi);
            const Node& worst = simplex.back();
            const Node& second_worst = simplex[simplex.size() - 2];
            const Node& best_node = simplex.front();

            double spread = 0.0;
            for (const auto& node : simplex)
                spread = std::max(spread, (node.z - best_node.z).norm());
            if (spread < 1e-10)
                break;

            numerics::Vector centroid = numerics::Vector::Zero(d);
            for (std::size_t i = 0; i + 1 < simplex.size(); ++i)
                centroid += simplex[i].z;
            centroid /= static_cast<double>(simplex.size() - 1);

            numerics::Vector reflected = clamp_z(centroid + (centroid - worst.z));
            const double phi_r = eval(reflected);
            if (phi_r < best_node.phi) {
                if (!budget_left()) {
                    simplex.back() = {reflected, phi_r};
                    continue;
                }
                numerics::Vector expanded = clamp_z(centroid + 2.0 * (centroid - worst.z));
                const double phi_e = eval(expanded);
                simplex.back() = phi_e < phi_r ? Node{expanded, phi_e} : Node{reflected, phi_r};
            } else if (phi_r < second_worst.phi) {
                simplex.back() = {reflected, phi_r};
            } else {
                if (!budget_left())
                    break;
                numerics::Vector contracted = clamp_z(centroid + 0.5 * (worst.z - centroid));
                const double phi_c = eval(contracted);
                if (phi_c < worst.phi) {
                    simplex.back() = {contracted, phi_c};
                } else {
                    // shrink toward the best vertex
                    for (std::size_t i = 1; i < simplex.size(); ++i) {
                        if (!budget_left())
                            break;
                        simplex[i].z = clamp_z(best_node.z
                                               + 0.5 * (simplex[i].z - best_node.z));
                        simplex[i].phi = eval(simplex[i].z);
                    }
                }
            }
        }
        return best;
    }

} // namespace mfbo::opt
