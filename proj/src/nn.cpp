#include "dsa/nn.hpp"

#include <cmath>
#include <string>

#include "dsa/error.hpp"

namespace dsa::nn {

namespace {

Matrix affine(const Layer& layer, const Matrix& input) {
    Matrix z = layer.bias.transpose().replicate(input.rows(), 1);
    z.noalias() += input * layer.weights.transpose();
    return z;
}

void check_input(const MlpParams& params, const Matrix& batch) {
    if (params.layers.empty()) throw ShapeMismatch("network has no layers");
    if (static_cast<std::size_t>(batch.cols()) != params.input_dim())
        throw ShapeMismatch("batch width " + std::to_string(batch.cols()) + " != input dim " +
                            std::to_string(params.input_dim()));
}

std::vector<Layer> zeros_like(const std::vector<Layer>& layers) {
    std::vector<Layer> out;
    out.reserve(layers.size());
    for (const auto& l : layers)
        out.push_back({Matrix::Zero(l.weights.rows(), l.weights.cols()), Vector::Zero(l.bias.size())});
    return out;
}

} // namespace

std::vector<std::size_t> MlpParams::dims() const {
    std::vector<std::size_t> d;
    if (layers.empty()) return d;
    d.push_back(static_cast<std::size_t>(layers.front().weights.cols()));
    for (const auto& l : layers) d.push_back(static_cast<std::size_t>(l.weights.rows()));
    return d;
}

std::size_t MlpParams::input_dim() const {
    return layers.empty() ? 0 : static_cast<std::size_t>(layers.front().weights.cols());
}

std::size_t MlpParams::output_dim() const {
    return layers.empty() ? 0 : static_cast<std::size_t>(layers.back().weights.rows());
}

std::size_t MlpParams::parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += static_cast<std::size_t>(l.weights.size() + l.bias.size());
    return n;
}

bool MlpParams::all_finite() const {
    for (const auto& l : layers)
        if (!l.weights.allFinite() || !l.bias.allFinite()) return false;
    return true;
}

bool MlpParams::operator==(const MlpParams& other) const {
    if (layers.size() != other.layers.size()) return false;
    for (std::size_t k = 0; k < layers.size(); ++k) {
        const auto& a = layers[k];
        const auto& b = other.layers[k];
        if (a.weights.rows() != b.weights.rows() || a.weights.cols() != b.weights.cols() ||
            a.bias.size() != b.bias.size())
            return false;
        if (a.weights != b.weights || a.bias != b.bias) return false;
    }
    return true;
}

AdamState AdamState::zeros_like(const MlpParams& params, AdamConfig config) {
    AdamState s;
    s.config = config;
    s.first_moment = nn::zeros_like(params.layers);
    s.second_moment = nn::zeros_like(params.layers);
    return s;
}

MlpParams init_params(std::span<const std::size_t> dims, Rng& rng) {
    if (dims.size() < 2) throw ShapeMismatch("a network needs at least an input and an output dim");
    MlpParams params;
    for (std::size_t k = 0; k + 1 < dims.size(); ++k) {
        const auto fan_in = dims[k];
        const auto fan_out = dims[k + 1];
        if (fan_in == 0 || fan_out == 0) throw ShapeMismatch("layer dimensions must be positive");
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        std::uniform_real_distribution<double> dist(-limit, limit);
        Layer layer{Matrix(fan_out, fan_in), Vector::Zero(static_cast<Eigen::Index>(fan_out))};
        for (Eigen::Index r = 0; r < layer.weights.rows(); ++r)
            for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) layer.weights(r, c) = dist(rng);
        params.layers.push_back(std::move(layer));
    }
    return params;
}

ForwardResult forward(const MlpParams& params, const Matrix& batch) {
    check_input(params, batch);
    ForwardResult out;
    auto& cache = out.cache;
    cache.activations.reserve(params.layers.size() + 1);
    cache.pre_activations.reserve(params.layers.size());
    cache.activations.push_back(batch);
    for (std::size_t k = 0; k < params.layers.size(); ++k) {
        cache.pre_activations.push_back(affine(params.layers[k], cache.activations.back()));
        const bool hidden = k + 1 < params.layers.size();
        if (hidden)
            cache.activations.push_back(cache.pre_activations.back().cwiseMax(0.0));
        else
            cache.activations.push_back(cache.pre_activations.back());
    }
    out.q_values = cache.activations.back();
    return out;
}

Matrix predict(const MlpParams& params, const Matrix& batch) {
    check_input(params, batch);
    Matrix a = batch;
    for (std::size_t k = 0; k < params.layers.size(); ++k) {
        Matrix z = affine(params.layers[k], a);
        if (k + 1 < params.layers.size()) z = z.cwiseMax(0.0);
        a = std::move(z);
    }
    return a;
}

LossResult masked_mse_loss(const Matrix& q_pred, std::span<const std::size_t> actions,
                           std::span<const double> targets) {
    const auto batch = static_cast<std::size_t>(q_pred.rows());
    if (actions.size() != batch || targets.size() != batch)
        throw ShapeMismatch("loss inputs have inconsistent batch sizes");
    LossResult out;
    out.output_grad = Matrix::Zero(q_pred.rows(), q_pred.cols());
    if (batch == 0) return out;
    const double inv_b = 1.0 / static_cast<double>(batch);
    for (std::size_t b = 0; b < batch; ++b) {
        if (actions[b] >= static_cast<std::size_t>(q_pred.cols()))
            throw ActionIndexOutOfRange("action " + std::to_string(actions[b]) + " out of range");
        const auto row = static_cast<Eigen::Index>(b);
        const auto col = static_cast<Eigen::Index>(actions[b]);
        const double diff = q_pred(row, col) - targets[b];
        out.loss += diff * diff * inv_b;
        out.output_grad(row, col) = 2.0 * inv_b * diff;
    }
    return out;
}

Gradients backward(const MlpParams& params, const ForwardCache& cache, const Matrix& output_grad) {
    const std::size_t n_layers = params.layers.size();
    if (cache.activations.size() != n_layers + 1 || cache.pre_activations.size() != n_layers)
        throw ShapeMismatch("forward cache does not match the network depth");
    if (output_grad.rows() != cache.activations.back().rows() ||
        static_cast<std::size_t>(output_grad.cols()) != params.output_dim())
        throw ShapeMismatch("output gradient shape does not match the forward pass");

    Gradients grads;
    grads.layers.resize(n_layers);
    Matrix delta = output_grad; // dL/dz for the current layer
    for (std::size_t k = n_layers; k-- > 0;) {
        const Matrix& input = cache.activations[k];
        grads.layers[k].weights.noalias() = delta.transpose() * input;
        grads.layers[k].bias = delta.colwise().sum().transpose();
        if (k == 0) break;
        Matrix upstream(delta.rows(), params.layers[k].weights.cols());
        upstream.noalias() = delta * params.layers[k].weights;
        // ReLU'(z) = 1 for z > 0, else 0.
        delta = (cache.pre_activations[k - 1].array() > 0.0).select(upstream, 0.0);
    }
    return grads;
}

void adam_update(MlpParams& params, AdamState& state, const Gradients& grads, double learning_rate) {
    if (grads.layers.size() != params.layers.size() ||
        state.first_moment.size() != params.layers.size())
        throw ShapeMismatch("Adam update with mismatched layer counts");
    ++state.step;
    const auto& cfg = state.config;
    const double t = static_cast<double>(state.step);
    const double c1 = 1.0 - std::pow(cfg.beta1, t);
    const double c2 = 1.0 - std::pow(cfg.beta2, t);

    auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
        m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
        v = cfg.beta2 * v + (1.0 - cfg.beta2) * g.cwiseProduct(g);
        param.array() -= learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + cfg.epsilon);
    };
    for (std::size_t k = 0; k < params.layers.size(); ++k) {
        auto& layer = params.layers[k];
        const auto& g = grads.layers[k];
        if (g.weights.rows() != layer.weights.rows() || g.weights.cols() != layer.weights.cols())
            throw ShapeMismatch("gradient shape does not match layer " + std::to_string(k));
        update(layer.weights, state.first_moment[k].weights, state.second_moment[k].weights, g.weights);
        update(layer.bias, state.first_moment[k].bias, state.second_moment[k].bias, g.bias);
    }
}

MlpParams copy_params(const MlpParams& src) { return src; }

} // namespace dsa::nn
