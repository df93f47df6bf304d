#pragma once

// Fully connected ReLU network with a linear output layer, hand-written
// backpropagation for a masked MSE loss, and Adam.

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "dsa/rng.hpp"

namespace dsa::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Layer {
    Matrix weights; // fan_out x fan_in
    Vector bias;    // fan_out
};

struct MlpParams {
    std::vector<Layer> layers;

    std::vector<std::size_t> dims() const;
    std::size_t input_dim() const;
    std::size_t output_dim() const;
    std::size_t parameter_count() const;
    bool all_finite() const;

    bool operator==(const MlpParams& other) const;
};

// Same shape as MlpParams; kept as a separate type so the two cannot be mixed up.
struct Gradients {
    std::vector<Layer> layers;
};

// activations[0] is the input batch; activations[k] is the output of layer k.
// pre_activations[k] is the affine output of layer k before the nonlinearity.
struct ForwardCache {
    std::vector<Matrix> activations;
    std::vector<Matrix> pre_activations;
};

struct ForwardResult {
    Matrix q_values; // batch x output_dim
    ForwardCache cache;
};

struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct AdamState {
    AdamConfig config;
    std::vector<Layer> first_moment;
    std::vector<Layer> second_moment;
    std::size_t step = 0;

    static AdamState zeros_like(const MlpParams& params, AdamConfig config = {});
};

struct LossResult {
    double loss = 0.0;
    Matrix output_grad;
};

// Uniform Glorot init, zero biases.
MlpParams init_params(std::span<const std::size_t> dims, Rng& rng);

ForwardResult forward(const MlpParams& params, const Matrix& batch);
// Forward pass without keeping intermediates.
Matrix predict(const MlpParams& params, const Matrix& batch);

// Mean over the batch of (q[b, actions[b]] - targets[b])^2. Only the taken
// action receives gradient.
LossResult masked_mse_loss(const Matrix& q_pred, std::span<const std::size_t> actions,
                           std::span<const double> targets);

Gradients backward(const MlpParams& params, const ForwardCache& cache, const Matrix& output_grad);

void adam_update(MlpParams& params, AdamState& state, const Gradients& grads, double learning_rate);

MlpParams copy_params(const MlpParams& src);

} // namespace dsa::nn
