#include "aec/nn/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace aec::nn {

void adam_step(Tensor& params, const Tensor& grads, AdamState& state) {
    if (!params.same_shape(grads))
        throw std::invalid_argument("adam_step: gradient shape " + shape_str(grads.shape) +
                                    " != parameter shape " + shape_str(params.shape));
    if (!params.same_shape(state.m))
        throw std::invalid_argument("adam_step: state shape " + shape_str(state.m.shape) +
                                    " != parameter shape " + shape_str(params.shape));
    if (!grads.all_finite()) throw std::runtime_error("adam_step: non-finite gradient");

    state.t += 1;
    const double b1 = state.hyper.beta1, b2 = state.hyper.beta2;
    const double corr1 = 1.0 - std::pow(b1, static_cast<double>(state.t));
    const double corr2 = 1.0 - std::pow(b2, static_cast<double>(state.t));
    const float step = static_cast<float>(state.hyper.lr / corr1);
    const float vscale = static_cast<float>(1.0 / corr2);

    const std::int64_t n = params.numel();
    float* p = params.data.data();
    float* m = state.m.data.data();
    float* v = state.v.data.data();
    const float* g = grads.data.data();
    const float eps = state.hyper.eps;
    for (std::int64_t i = 0; i < n; ++i) {
        m[i] = static_cast<float>(b1) * m[i] + static_cast<float>(1.0 - b1) * g[i];
        v[i] = static_cast<float>(b2) * v[i] + static_cast<float>(1.0 - b2) * g[i] * g[i];
        p[i] -= step * m[i] / (std::sqrt(v[i] * vscale) + eps);
    }
}

}  // namespace aec::nn
