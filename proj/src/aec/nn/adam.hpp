#pragma once

#include <cstdint>

#include "aec/tensor.hpp"

namespace aec::nn {

struct AdamHyper {
    float lr = 1e-4f;
    float beta1 = 0.9f;
    float beta2 = 0.999f;
    float eps = 1e-8f;
};

// Per-tensor optimizer state: first/second moments and a step counter.
struct AdamState {
    Tensor m;
    Tensor v;
    std::int64_t t = 0;
    AdamHyper hyper;

    AdamState() = default;
    AdamState(const std::vector<int>& shape, AdamHyper h)
        : m(shape), v(shape), t(0), hyper(h) {}
};

// One Adam update with bias correction; increments state.t. Rejects
// (throws std::runtime_error) on non-finite gradients without touching
// params or state.
void adam_step(Tensor& params, const Tensor& grads, AdamState& state);

}  // namespace aec::nn
