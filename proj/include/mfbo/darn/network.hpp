#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include <mfbo/errors.hpp>
#include <mfbo/numerics/dense.hpp>

namespace mfbo::darn {

    enum class Activation { Tanh };

    /// Architecture of one fidelity network. The output layer is always a
    /// single linear unit; hidden_widths may be empty (a plain linear model).
    struct NetworkShape {
        std::size_t input_dim = 1;
        std::vector<std::size_t> hidden_widths = {40, 40};
        Activation activation = Activation::Tanh;

        /// Unit counts per layer, input first, scalar output last.
        std::vector<std::size_t> layer_sizes() const
        {
            std::vector<std::size_t> sizes;
            sizes.reserve(hidden_widths.size() + 2);
            sizes.push_back(input_dim);
            for (std::size_t w : hidden_widths)
                sizes.push_back(w);
            sizes.push_back(1);
            return sizes;
        }

        std::size_t param_count() const
        {
            auto sizes = layer_sizes();
            std::size_t count = 0;
            for (std::size_t l = 0; l + 1 < sizes.size(); ++l)
                count += sizes[l + 1] * (sizes[l] + 1);
            return count;
        }

        void validate() const
        {
            if (input_dim < 1)
                throw InvalidParameterError("network input_dim must be >= 1");
            for (std::size_t w : hidden_widths)
                if (w < 1)
                    throw InvalidParameterError("hidden widths must be >= 1");
        }
    };

    namespace detail {

        using numerics::Matrix;
        using numerics::Vector;

        // Weight layout per network: layers in order, each as the (out x in)
        // matrix flattened column-major followed by the bias vector.
        struct LayerMap {
            Eigen::Map<const Matrix> weights;
            Eigen::Map<const Vector> bias;
        };

        inline std::vector<LayerMap> map_layers(const NetworkShape& shape, const double* w)
        {
            auto sizes = shape.layer_sizes();
            std::vector<LayerMap> layers;
            layers.reserve(sizes.size() - 1);
            const double* p = w;
            for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
                const auto rows = static_cast<Eigen::Index>(sizes[l + 1]);
                const auto cols = static_cast<Eigen::Index>(sizes[l]);
                layers.push_back({Eigen::Map<const Matrix>(p, rows, cols),
                                  Eigen::Map<const Vector>(p + rows * cols, rows)});
                p += rows * cols + rows;
            }
            return layers;
        }

        /// Forward activations for a column batch; H[0] is the input block,
        /// H[l] the tanh output of hidden layer l, out the linear output row.
        struct NetTrace {
            std::vector<Matrix> H;
            Eigen::RowVectorXd out;
        };

        inline void net_forward(const NetworkShape& shape, const double* w, Matrix input,
                                NetTrace& trace)
        {
            auto layers = map_layers(shape, w);
            trace.H.clear();
            trace.H.push_back(std::move(input));
            for (std::size_t l = 0; l + 1 < layers.size(); ++l) {
                Matrix a = layers[l].weights * trace.H.back();
                a.colwise() += layers[l].bias;
                trace.H.push_back(a.array().tanh().matrix());
            }
            const auto& last = layers.back();
            trace.out = (last.weights * trace.H.back()).row(0);
            trace.out.array() += last.bias(0);
        }

        /// Backward pass for a scalar-output network. g_out is the adjoint of
        /// the output row; weight/bias gradients accumulate into grad (same
        /// layout as the weights). Returns the adjoint of the input block when
        /// input_adjoint is non-null.
        inline void net_backward(const NetworkShape& shape, const double* w,
                                 const NetTrace& trace, const Eigen::RowVectorXd& g_out,
                                 double* grad, Matrix* input_adjoint)
        {
            auto sizes = shape.layer_sizes();
            const std::size_t n_layers = sizes.size() - 1;

            // Gradient segments mirror map_layers.
            std::vector<std::size_t> offsets(n_layers);
            {
                std::size_t off = 0;
                for (std::size_t l = 0; l < n_layers; ++l) {
                    offsets[l] = off;
                    off += sizes[l + 1] * (sizes[l] + 1);
                }
            }
            auto layers = map_layers(shape, w);

            Matrix g = g_out; // (out_l x N), starting at the scalar output
            for (std::size_t l = n_layers; l-- > 0;) {
                const auto rows = static_cast<Eigen::Index>(sizes[l + 1]);
                const auto cols = static_cast<Eigen::Index>(sizes[l]);
                Eigen::Map<Matrix> grad_w(grad + offsets[l], rows, cols);
                Eigen::Map<Vector> grad_b(grad + offsets[l] + rows * cols, rows);
                grad_w.noalias() += g * trace.H[l].transpose();
                grad_b += g.rowwise().sum();
                if (l > 0) {
                    Matrix upstream = layers[l].weights.transpose() * g;
                    g = upstream.cwiseProduct(
                        (1.0 - trace.H[l].array().square()).matrix());
                } else if (input_adjoint) {
                    input_adjoint->noalias() = layers[l].weights.transpose() * g;
                }
            }
        }

    } // namespace detail

} // namespace mfbo::darn
