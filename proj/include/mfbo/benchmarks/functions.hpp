#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <utility>

#include <mfbo/acquisition/types.hpp>
#include <mfbo/box.hpp>
#include <mfbo/errors.hpp>
#include <mfbo/numerics/dense.hpp>

namespace mfbo::benchmarks {

    namespace detail {
        /// sin(pi * t) with exact range reduction, so integer t gives exactly 0.
        inline double sinpi(double t)
        {
            double r = std::remainder(t, 2.0); // r in [-1, 1]
            if (r > 0.5)
                r = 1.0 - r;
            else if (r < -0.5)
                r = -1.0 - r;
            return std::sin(std::numbers::pi * r);
        }
    } // namespace detail

    /// Three-fidelity Branin variant on [-5,10] x [0,15]; fidelity 3 is the
    /// negated standard Branin, the lower fidelities are nonlinear warps of it.
    inline double branin_mf(const numerics::Vector& x, std::size_t m)
    {
        using std::numbers::pi;
        auto f3 = [](double x1, double x2) {
            const double inner = -1.275 * x1 * x1 / (pi * pi) + 5.0 * x1 / pi + x2 - 6.0;
            return -(inner * inner) - (10.0 - 5.0 / (4.0 * pi)) * std::cos(x1) - 10.0;
        };
        auto f2 = [&](double x1, double x2) {
            return -10.0 * std::sqrt(-f3(x1 - 2.0, x2 - 2.0)) - 2.0 * (x1 - 0.5)
                + 3.0 * (3.0 * x2 - 1.0) + 1.0;
        };
        switch (m) {
        case 3:
            return f3(x(0), x(1));
        case 2:
            return f2(x(0), x(1));
        case 1:
            return -f2(1.2 * (x(0) + 2.0), 1.2 * (x(1) + 2.0)) + 3.0 * x(1) - 1.0;
        default:
            throw FidelityOutOfRangeError("branin_mf supports fidelities 1..3");
        }
    }

    /// Two-fidelity negated Levy on [-10,10]^2; the optimum of fidelity 2 is
    /// 0 at (1, 1).
    inline double levy_mf(const numerics::Vector& x, std::size_t m)
    {
        auto f2 = [](double x1, double x2) {
            const double s1 = detail::sinpi(3.0 * x1);
            const double s2 = detail::sinpi(3.0 * x2);
            const double s3 = detail::sinpi(2.0 * x2);
            return -s1 * s1 - (x1 - 1.0) * (x1 - 1.0) * (1.0 + s2 * s2)
                - (x2 - 1.0) * (x2 - 1.0) * (1.0 + s3 * s3);
        };
        switch (m) {
        case 2:
            return f2(x(0), x(1));
        case 1: {
            const double v = f2(x(0), x(1));
            return -std::sqrt(1.0 + v * v);
        }
        default:
            throw FidelityOutOfRangeError("levy_mf supports fidelities 1..2");
        }
    }

    /// A named multi-fidelity objective with its domain and, when known, the
    /// highest-fidelity optimum used for regret reporting.
    struct MultiFidelityFunction {
        std::string name;
        std::size_t fidelity_count = 1;
        Box domain;
        std::function<double(const numerics::Vector&, std::size_t)> evaluator;
        std::optional<std::pair<numerics::Vector, double>> known_optimum;

        double operator()(const numerics::Vector& x, std::size_t m) const
        {
            if (m < 1 || m > fidelity_count)
                throw FidelityOutOfRangeError("fidelity out of range for " + name);
            return evaluator(x, m);
        }
    };

    inline MultiFidelityFunction branin3()
    {
        numerics::Vector lo(2), hi(2), xopt(2);
        lo << -5.0, 0.0;
        hi << 10.0, 15.0;
        xopt << -std::numbers::pi, 12.275;
        return {"branin3", 3, Box(lo, hi), branin_mf,
                std::make_pair(xopt, -0.39788735772973816)};
    }

    inline MultiFidelityFunction levy2()
    {
        numerics::Vector lo(2), hi(2), xopt(2);
        lo << -10.0, -10.0;
        hi << 10.0, 10.0;
        xopt << 1.0, 1.0;
        return {"levy2", 2, Box(lo, hi), levy_mf, std::make_pair(xopt, 0.0)};
    }

    inline MultiFidelityFunction by_name(const std::string& name)
    {
        if (name == "branin3")
            return branin3();
        if (name == "levy2")
            return levy2();
        throw ConfigError("unknown benchmark: " + name);
    }

    /// Default per-fidelity costs: (1, 10, 50), truncated for fewer
    /// fidelities and extended by a factor of 5 per extra level.
    inline acquisition::CostModel default_cost_model(std::size_t fidelity_count)
    {
        if (fidelity_count < 1)
            throw InvalidParameterError("fidelity count must be >= 1");
        numerics::Vector lambdas(static_cast<Eigen::Index>(fidelity_count));
        for (std::size_t m = 0; m < fidelity_count; ++m) {
            if (m == 0)
                lambdas(0) = 1.0;
            else if (m == 1)
                lambdas(1) = 10.0;
            else if (m == 2)
                lambdas(2) = 50.0;
            else
                lambdas(static_cast<Eigen::Index>(m))
                    = lambdas(static_cast<Eigen::Index>(m) - 1) * 5.0;
        }
        return acquisition::CostModel(lambdas);
    }

} // namespace mfbo::benchmarks
