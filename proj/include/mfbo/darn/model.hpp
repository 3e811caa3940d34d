#pragma once

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include <mfbo/box.hpp>
#include <mfbo/darn/network.hpp>
#include <mfbo/errors.hpp>
#include <mfbo/numerics/dense.hpp>
#include <mfbo/numerics/random.hpp>

namespace mfbo::darn {

    using WeightVector = numerics::Vector;
    using NoisePrecisions = numerics::Vector;

    /// The auto-regressive surrogate: a chain of fidelity networks where
    /// network m consumes the original input plus the outputs of networks
    /// 1..m-1, so its input width is input_dim + m - 1. A standard-normal
    /// prior covers every weight; each noise precision carries a
    /// Gamma(prior_shape, prior_rate) prior. Immutable once built.
    class DarnModel {
    public:
        DarnModel(std::size_t fidelity_count, std::size_t input_dim,
                  std::vector<std::size_t> hidden_widths = {40, 40},
                  double prior_shape = 1.0, double prior_rate = 0.1)
            : _fidelity_count(fidelity_count), _input_dim(input_dim),
              _prior_shape(prior_shape), _prior_rate(prior_rate)
        {
            if (fidelity_count < 1)
                throw InvalidParameterError("fidelity_count must be >= 1");
            if (input_dim < 1)
                throw InvalidParameterError("input_dim must be >= 1");
            if (!(prior_shape > 0.0) || !(prior_rate > 0.0))
                throw InvalidParameterError("gamma prior parameters must be positive");
            _shapes.reserve(fidelity_count);
            _offsets.reserve(fidelity_count);
            std::size_t offset = 0;
            for (std::size_t m = 1; m <= fidelity_count; ++m) {
                NetworkShape shape;
                shape.input_dim = input_dim + m - 1;
                shape.hidden_widths = hidden_widths;
                shape.validate();
                _offsets.push_back(offset);
                offset += shape.param_count();
                _shapes.push_back(std::move(shape));
            }
            _weight_count = offset;
        }

        std::size_t fidelity_count() const { return _fidelity_count; }
        std::size_t input_dim() const { return _input_dim; }
        double prior_shape() const { return _prior_shape; }
        double prior_rate() const { return _prior_rate; }
        std::size_t weight_count() const { return _weight_count; }

        /// Shape of the network for fidelity m (1-based).
        const NetworkShape& shape(std::size_t m) const { return _shapes.at(m - 1); }

        /// Offset of fidelity m's parameters in the flat weight vector.
        std::size_t weight_offset(std::size_t m) const { return _offsets.at(m - 1); }

        void check_fidelity(std::size_t m) const
        {
            if (m < 1 || m > _fidelity_count)
                throw FidelityOutOfRangeError("fidelity index out of range");
        }

    private:
        std::size_t _fidelity_count;
        std::size_t _input_dim;
        double _prior_shape;
        double _prior_rate;
        std::vector<NetworkShape> _shapes;
        std::vector<std::size_t> _offsets;
        std::size_t _weight_count = 0;
    };

    /// Observations grouped by fidelity; inputs live in whatever domain the
    /// caller is working in (raw or scaled).
    struct FidelityDataset {
        std::vector<std::vector<numerics::Vector>> inputs;
        std::vector<std::vector<double>> targets;

        explicit FidelityDataset(std::size_t fidelity_count = 0)
            : inputs(fidelity_count), targets(fidelity_count) {}

        std::size_t fidelity_count() const { return inputs.size(); }

        std::size_t count(std::size_t m) const { return inputs.at(m - 1).size(); }

        std::size_t total_count() const
        {
            std::size_t n = 0;
            for (const auto& fid : inputs)
                n += fid.size();
            return n;
        }

        void add(std::size_t m, numerics::Vector x, double y)
        {
            inputs.at(m - 1).push_back(std::move(x));
            targets.at(m - 1).push_back(y);
        }

        /// Inputs of one fidelity as columns.
        numerics::Matrix input_matrix(std::size_t m) const
        {
            const auto& xs = inputs.at(m - 1);
            if (xs.empty())
                return numerics::Matrix(0, 0);
            numerics::Matrix result(xs.front().size(), xs.size());
            for (std::size_t n = 0; n < xs.size(); ++n)
                result.col(static_cast<Eigen::Index>(n)) = xs[n];
            return result;
        }
    };

    /// Affine input map onto the unit cube plus per-fidelity target
    /// standardization (population std, floored at 1e-12).
    struct Scaler {
        Box box;
        numerics::Vector target_mean;
        numerics::Vector target_std;

        numerics::Vector scale_input(const numerics::Vector& x) const
        {
            return box.to_unit(x);
        }

        double standardize(double y, std::size_t m) const
        {
            return (y - target_mean(static_cast<Eigen::Index>(m - 1)))
                / target_std(static_cast<Eigen::Index>(m - 1));
        }

        double destandardize(double f, std::size_t m) const
        {
            return target_mean(static_cast<Eigen::Index>(m - 1))
                + target_std(static_cast<Eigen::Index>(m - 1)) * f;
        }

        double destandardize_variance(double var, std::size_t m) const
        {
            const double s = target_std(static_cast<Eigen::Index>(m - 1));
            return var * s * s;
        }
    };

    inline Scaler fit_scaler(const FidelityDataset& data, const Box& bounds)
    {
        const auto fidelities = static_cast<Eigen::Index>(data.fidelity_count());
        Scaler scaler;
        scaler.box = bounds;
        scaler.target_mean = numerics::Vector::Zero(fidelities);
        scaler.target_std = numerics::Vector::Ones(fidelities);
        for (Eigen::Index m = 0; m < fidelities; ++m) {
            const auto& ys = data.targets[static_cast<std::size_t>(m)];
            if (ys.empty())
                continue; // no data: identity standardization
            double mean = 0.0;
            for (double y : ys)
                mean += y;
            mean /= static_cast<double>(ys.size());
            double var = 0.0;
            for (double y : ys)
                var += (y - mean) * (y - mean);
            var /= static_cast<double>(ys.size());
            scaler.target_mean(m) = mean;
            scaler.target_std(m) = std::max(std::sqrt(var), 1e-12);
        }
        return scaler;
    }

    /// Dataset mapped into model space: inputs in the unit cube, targets
    /// standardized per fidelity.
    inline FidelityDataset apply_scaler(const Scaler& scaler, const FidelityDataset& data)
    {
        FidelityDataset scaled(data.fidelity_count());
        for (std::size_t m = 1; m <= data.fidelity_count(); ++m)
            for (std::size_t n = 0; n < data.count(m); ++n)
                scaled.add(m, scaler.scale_input(data.inputs[m - 1][n]),
                           scaler.standardize(data.targets[m - 1][n], m));
        return scaled;
    }

    /// A draw from the standard-normal weight prior.
    inline WeightVector init_weights(const DarnModel& model, numerics::RandomSource& rng)
    {
        WeightVector w(static_cast<Eigen::Index>(model.weight_count()));
        for (Eigen::Index i = 0; i < w.size(); ++i)
            w(i) = rng.normal();
        return w;
    }

    /// Chain outputs [f_1(x), ..., f_m(x)] for one scaled input.
    inline numerics::Vector chain_forward(const DarnModel& model, const WeightVector& w,
                                          const numerics::Vector& x, std::size_t m)
    {
        model.check_fidelity(m);
        numerics::Vector outputs(static_cast<Eigen::Index>(m));
        detail::NetTrace trace;
        for (std::size_t k = 1; k <= m; ++k) {
            const auto& shape = model.shape(k);
            numerics::Matrix input(static_cast<Eigen::Index>(shape.input_dim), 1);
            input.col(0).head(x.size()) = x;
            for (std::size_t j = 1; j < k; ++j)
                input(x.size() + static_cast<Eigen::Index>(j) - 1, 0)
                    = outputs(static_cast<Eigen::Index>(j) - 1);
            detail::net_forward(shape, w.data() + model.weight_offset(k),
                                std::move(input), trace);
            outputs(static_cast<Eigen::Index>(k) - 1) = trace.out(0);
        }
        return outputs;
    }

} // namespace mfbo::darn
