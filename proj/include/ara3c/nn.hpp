#pragma once

#include <span>
#include <string>
#include <vector>

#include "ara3c/rng.hpp"

namespace ara3c::nn {

using Vec = std::vector<double>;

// Dense row-major matrix. The networks here are tiny (hundreds of weights),
// so plain loops beat any BLAS dispatch.
struct Matrix {
    int rows = 0;
    int cols = 0;
    Vec data;

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c, 0.0) {}

    double& operator()(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
    double operator()(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }
};

enum class Activation { identity, tanh, relu, softplus };

std::string activation_name(Activation a);
Activation activation_from_name(const std::string& name);

struct Layer {
    Matrix weights;  // rows = layer output size, cols = layer input size
    Vec bias;
    Activation activation = Activation::identity;
};

struct MlpParams {
    std::vector<Layer> layers;

    int input_size() const { return layers.empty() ? 0 : layers.front().weights.cols; }
    int output_size() const { return layers.empty() ? 0 : layers.back().weights.rows; }
    bool finite() const;
};

// Gradient (or any parameter-shaped accumulator, e.g. the RMSProp cache).
struct MlpGrads {
    std::vector<Matrix> weights;
    std::vector<Vec> bias;

    void scale(double s);
    void add(const MlpGrads& other);
    bool finite() const;
};

MlpGrads zeros_like(const MlpParams& params);

// Cached activations from one forward pass, sufficient for backward.
struct Tape {
    std::vector<Vec> inputs;   // inputs[k] = input fed to layer k
    std::vector<Vec> preacts;  // preacts[k] = W_k * inputs[k] + b_k
};

struct ForwardResult {
    Vec output;
    Tape tape;
};

// Weights ~ N(0, 0.1), biases 0.
MlpParams make_mlp(const std::vector<int>& sizes, const std::vector<Activation>& activations,
                   Rng& rng);

ForwardResult forward(const MlpParams& params, std::span<const double> input);

// Exact reverse-mode gradients of dot(output, output_grad) w.r.t. every
// parameter. The tape must come from a forward pass over the same params.
MlpGrads backward(const MlpParams& params, const Tape& tape, std::span<const double> output_grad);

// Accumulating variant used for batch losses: adds the gradients, scaled by
// `scale`, into `accum` without allocating.
void backward_accumulate(const MlpParams& params, const Tape& tape,
                         std::span<const double> output_grad, double scale, MlpGrads& accum);

struct RmsPropState {
    MlpGrads cache;  // running mean of squared gradients, entries >= 0
    double decay = 0.9;
    double epsilon = 1e-10;
    double learning_rate = 1e-3;
};

RmsPropState make_rmsprop(const MlpParams& params, double learning_rate, double decay = 0.9,
                          double epsilon = 1e-10);

// cache <- decay*cache + (1-decay)*g^2; param <- param - lr*g/(sqrt(cache)+eps).
// Throws DivergenceError if the gradient has a non-finite entry.
void rmsprop_apply(MlpParams& params, const MlpGrads& grads, RmsPropState& state);

}  // namespace ara3c::nn
