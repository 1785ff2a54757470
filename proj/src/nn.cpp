#include "ara3c/nn.hpp"

#include <cmath>
#include <stdexcept>

#include "ara3c/errors.hpp"

namespace ara3c::nn {

namespace {

double activate(Activation a, double x) {
    switch (a) {
        case Activation::identity: return x;
        case Activation::tanh: return std::tanh(x);
        case Activation::relu: return x > 0.0 ? x : 0.0;
        case Activation::softplus:
            // log(1 + e^x), overflow-safe for large x
            return x > 30.0 ? x : std::log1p(std::exp(x));
    }
    return x;
}

// Derivative w.r.t. the preactivation x.
double activate_grad(Activation a, double x) {
    switch (a) {
        case Activation::identity: return 1.0;
        case Activation::tanh: {
            const double t = std::tanh(x);
            return 1.0 - t * t;
        }
        case Activation::relu: return x > 0.0 ? 1.0 : 0.0;
        case Activation::softplus: return 1.0 / (1.0 + std::exp(-x));
    }
    return 1.0;
}

bool all_finite(const Vec& v) {
    for (double x : v) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

}  // namespace

std::string activation_name(Activation a) {
    switch (a) {
        case Activation::identity: return "identity";
        case Activation::tanh: return "tanh";
        case Activation::relu: return "relu";
        case Activation::softplus: return "softplus";
    }
    return "identity";
}

Activation activation_from_name(const std::string& name) {
    if (name == "identity") return Activation::identity;
    if (name == "tanh") return Activation::tanh;
    if (name == "relu") return Activation::relu;
    if (name == "softplus") return Activation::softplus;
    throw ConfigError("unknown activation: " + name);
}

bool MlpParams::finite() const {
    for (const Layer& layer : layers) {
        if (!all_finite(layer.weights.data) || !all_finite(layer.bias)) return false;
    }
    return true;
}

void MlpGrads::scale(double s) {
    for (auto& m : weights) {
        for (double& x : m.data) x *= s;
    }
    for (auto& v : bias) {
        for (double& x : v) x *= s;
    }
}

void MlpGrads::add(const MlpGrads& other) {
    for (size_t k = 0; k < weights.size(); ++k) {
        for (size_t i = 0; i < weights[k].data.size(); ++i) weights[k].data[i] += other.weights[k].data[i];
        for (size_t i = 0; i < bias[k].size(); ++i) bias[k][i] += other.bias[k][i];
    }
}

bool MlpGrads::finite() const {
    for (const auto& m : weights) {
        if (!all_finite(m.data)) return false;
    }
    for (const auto& v : bias) {
        if (!all_finite(v)) return false;
    }
    return true;
}

MlpGrads zeros_like(const MlpParams& params) {
    MlpGrads g;
    g.weights.reserve(params.layers.size());
    g.bias.reserve(params.layers.size());
    for (const Layer& layer : params.layers) {
        g.weights.emplace_back(layer.weights.rows, layer.weights.cols);
        g.bias.emplace_back(layer.bias.size(), 0.0);
    }
    return g;
}

MlpParams make_mlp(const std::vector<int>& sizes, const std::vector<Activation>& activations,
                   Rng& rng) {
    if (sizes.size() < 2) throw std::invalid_argument("mlp needs at least input and output sizes");
    if (activations.size() != sizes.size() - 1) {
        throw std::invalid_argument("one activation per layer required");
    }
    MlpParams params;
    for (size_t k = 0; k + 1 < sizes.size(); ++k) {
        Layer layer;
        layer.weights = Matrix(sizes[k + 1], sizes[k]);
        for (double& w : layer.weights.data) w = rng.normal(0.0, 0.1);
        layer.bias.assign(sizes[k + 1], 0.0);
        layer.activation = activations[k];
        params.layers.push_back(std::move(layer));
    }
    return params;
}

ForwardResult forward(const MlpParams& params, std::span<const double> input) {
    if (params.layers.empty()) throw std::invalid_argument("forward: empty network");
    if (static_cast<int>(input.size()) != params.input_size()) {
        throw std::invalid_argument("forward: input size " + std::to_string(input.size()) +
                                    " does not match first layer " +
                                    std::to_string(params.input_size()));
    }

    ForwardResult result;
    result.tape.inputs.reserve(params.layers.size());
    result.tape.preacts.reserve(params.layers.size());

    Vec current(input.begin(), input.end());
    for (const Layer& layer : params.layers) {
        result.tape.inputs.push_back(current);
        const int rows = layer.weights.rows;
        const int cols = layer.weights.cols;
        Vec preact(rows);
        for (int r = 0; r < rows; ++r) {
            double acc = layer.bias[r];
            const double* w = &layer.weights.data[static_cast<size_t>(r) * cols];
            for (int c = 0; c < cols; ++c) acc += w[c] * current[c];
            preact[r] = acc;
        }
        Vec out(rows);
        for (int r = 0; r < rows; ++r) out[r] = activate(layer.activation, preact[r]);
        result.tape.preacts.push_back(std::move(preact));
        current = std::move(out);
    }
    result.output = std::move(current);
    return result;
}

void backward_accumulate(const MlpParams& params, const Tape& tape,
                         std::span<const double> output_grad, double scale, MlpGrads& accum) {
    const size_t n_layers = params.layers.size();
    if (tape.inputs.size() != n_layers || tape.preacts.size() != n_layers) {
        throw std::invalid_argument("backward: tape does not match network depth");
    }
    if (static_cast<int>(output_grad.size()) != params.output_size()) {
        throw std::invalid_argument("backward: output_grad size mismatch");
    }

    Vec grad(output_grad.begin(), output_grad.end());
    for (size_t k = n_layers; k-- > 0;) {
        const Layer& layer = params.layers[k];
        const Vec& preact = tape.preacts[k];
        const Vec& input = tape.inputs[k];
        const int rows = layer.weights.rows;
        const int cols = layer.weights.cols;
        if (static_cast<int>(preact.size()) != rows || static_cast<int>(input.size()) != cols) {
            throw std::invalid_argument("backward: tape shapes do not match layer " +
                                        std::to_string(k));
        }

        // dL/dz = dL/dy * f'(z)
        Vec delta(rows);
        for (int r = 0; r < rows; ++r) delta[r] = grad[r] * activate_grad(layer.activation, preact[r]);

        Matrix& dW = accum.weights[k];
        Vec& db = accum.bias[k];
        for (int r = 0; r < rows; ++r) {
            const double d = delta[r] * scale;
            double* dw_row = &dW.data[static_cast<size_t>(r) * cols];
            for (int c = 0; c < cols; ++c) dw_row[c] += d * input[c];
            db[r] += d;
        }

        if (k > 0) {
            Vec next_grad(cols, 0.0);
            for (int r = 0; r < rows; ++r) {
                const double d = delta[r];
                const double* w_row = &layer.weights.data[static_cast<size_t>(r) * cols];
                for (int c = 0; c < cols; ++c) next_grad[c] += w_row[c] * d;
            }
            grad = std::move(next_grad);
        }
    }
}

MlpGrads backward(const MlpParams& params, const Tape& tape, std::span<const double> output_grad) {
    MlpGrads grads = zeros_like(params);
    backward_accumulate(params, tape, output_grad, 1.0, grads);
    return grads;
}

RmsPropState make_rmsprop(const MlpParams& params, double learning_rate, double decay,
                          double epsilon) {
    RmsPropState state;
    state.cache = zeros_like(params);
    state.decay = decay;
    state.epsilon = epsilon;
    state.learning_rate = learning_rate;
    return state;
}

void rmsprop_apply(MlpParams& params, const MlpGrads& grads, RmsPropState& state) {
    if (!grads.finite()) throw DivergenceError("non-finite gradient in rmsprop_apply");
    if (grads.weights.size() != params.layers.size()) {
        throw std::invalid_argument("rmsprop_apply: gradient/parameter shape mismatch");
    }
    const double rho = state.decay;
    for (size_t k = 0; k < params.layers.size(); ++k) {
        Layer& layer = params.layers[k];
        if (grads.weights[k].rows != layer.weights.rows ||
            grads.weights[k].cols != layer.weights.cols ||
            grads.bias[k].size() != layer.bias.size()) {
            throw std::invalid_argument("rmsprop_apply: shape mismatch in layer " +
                                        std::to_string(k));
        }
        auto update = [&](double& param, double& cache, double g) {
            cache = rho * cache + (1.0 - rho) * g * g;
            param -= state.learning_rate * g / (std::sqrt(cache) + state.epsilon);
        };
        for (size_t i = 0; i < layer.weights.data.size(); ++i) {
            update(layer.weights.data[i], state.cache.weights[k].data[i], grads.weights[k].data[i]);
        }
        for (size_t i = 0; i < layer.bias.size(); ++i) {
            update(layer.bias[i], state.cache.bias[k][i], grads.bias[k][i]);
        }
    }
}

}  // namespace ara3c::nn
