#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "aec/tensor.hpp"

namespace aec::nn {

// Layer forward/backward passes with analytic gradients. Inputs are either
// a single sample ([H,W,C] / [N]) or a batch ([B,H,W,C] / [B,N]); output
// rank follows input rank. Shape mismatches throw std::invalid_argument
// naming the offending dimension.

// Valid (unpadded) cross-correlation, weights [k,k,Cin,Cout], bias [Cout].
Tensor conv2d(const Tensor& input, const Tensor& weights, const Tensor& bias, int stride);

struct Conv2dGrads {
    Tensor input;
    Tensor weights;
    Tensor bias;
};
Conv2dGrads conv2d_backward(const Tensor& input, const Tensor& weights, int stride,
                            const Tensor& upstream, bool need_input_grad = true);

struct Maxpool2Out {
    Tensor output;
    std::vector<std::int64_t> argmax;  // flat input index per output element
};
Maxpool2Out maxpool2(const Tensor& input);
Tensor maxpool2_backward(const Maxpool2Out& fwd, const std::vector<int>& input_shape,
                         const Tensor& upstream);

// Affine map, weights [N,M], bias [M].
Tensor dense(const Tensor& input, const Tensor& weights, const Tensor& bias);

struct DenseGrads {
    Tensor input;
    Tensor weights;
    Tensor bias;
};
DenseGrads dense_backward(const Tensor& input, const Tensor& weights, const Tensor& upstream,
                          bool need_input_grad = true);

Tensor relu(const Tensor& input);
// `pre` is the layer input (pre-activation); subgradient at exactly 0 is 0.
Tensor relu_backward(const Tensor& pre, const Tensor& upstream);

// Returns {loss, d loss / d prediction}.
std::pair<double, double> huber_loss(double prediction, double target, double delta);

// Glorot-uniform fill: U(-sqrt(6/(fan_in+fan_out)), +...). Biases stay zero.
void glorot_fill(Tensor& w, int fan_in, int fan_out, std::mt19937& rng);

}  // namespace aec::nn
