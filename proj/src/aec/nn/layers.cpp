#include "aec/nn/layers.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "aec/nn/kernels.hpp"
#include "aec/rng.hpp"

namespace aec::nn {

namespace {

struct ConvDims {
    int n, h, w, cin, k, cout, oh, ow;
    bool batched;
};

ConvDims check_conv(const Tensor& input, const Tensor& weights, const Tensor* bias, int stride) {
    if (input.rank() != 3 && input.rank() != 4)
        throw std::invalid_argument("conv2d: input rank must be 3 or 4, got " +
                                    shape_str(input.shape));
    if (weights.rank() != 4)
        throw std::invalid_argument("conv2d: weights must be [k,k,Cin,Cout], got " +
                                    shape_str(weights.shape));
    if (stride < 1) throw std::invalid_argument("conv2d: stride must be >= 1");
    ConvDims d{};
    d.batched = input.rank() == 4;
    d.n = d.batched ? input.dim(0) : 1;
    d.h = input.dim(d.batched ? 1 : 0);
    d.w = input.dim(d.batched ? 2 : 1);
    d.cin = input.dim(d.batched ? 3 : 2);
    d.k = weights.dim(0);
    d.cout = weights.dim(3);
    if (weights.dim(1) != d.k)
        throw std::invalid_argument("conv2d: non-square kernel " + shape_str(weights.shape));
    if (weights.dim(2) != d.cin)
        throw std::invalid_argument("conv2d: weight input-channel dimension " +
                                    std::to_string(weights.dim(2)) + " != input channels " +
                                    std::to_string(d.cin));
    if (d.h < d.k || d.w < d.k)
        throw std::invalid_argument("conv2d: input spatial extent " + std::to_string(d.h) + "x" +
                                    std::to_string(d.w) + " smaller than kernel " +
                                    std::to_string(d.k));
    if ((d.h - d.k) % stride != 0 || (d.w - d.k) % stride != 0)
        throw std::invalid_argument("conv2d: (extent - kernel) not divisible by stride for input " +
                                    shape_str(input.shape));
    if (bias && (bias->rank() != 1 || bias->dim(0) != d.cout))
        throw std::invalid_argument("conv2d: bias length " + shape_str(bias->shape) +
                                    " != output channels " + std::to_string(d.cout));
    d.oh = detail::conv_out_extent(d.h, d.k, stride);
    d.ow = detail::conv_out_extent(d.w, d.k, stride);
    return d;
}

}  // namespace

Tensor conv2d(const Tensor& input, const Tensor& weights, const Tensor& bias, int stride) {
    const ConvDims d = check_conv(input, weights, &bias, stride);
    const std::int64_t rows = static_cast<std::int64_t>(d.n) * d.oh * d.ow;
    const int patch = d.k * d.k * d.cin;

    Tensor out(d.batched ? std::vector<int>{d.n, d.oh, d.ow, d.cout}
                         : std::vector<int>{d.oh, d.ow, d.cout});
    if (d.k == 1 && stride == 1) {
        // 1x1 convolution is a per-pixel affine map; skip the patch copy.
        gemm<float>(false, false, static_cast<int>(rows), d.cout, d.cin, 1.0f, input.data.data(),
                    d.cin, weights.data.data(), d.cout, 0.0f, out.data.data(), d.cout);
    } else {
        std::vector<float> cols(static_cast<std::size_t>(rows) * patch);
        detail::im2col(input.data.data(), d.n, d.h, d.w, d.cin, d.k, stride, cols.data());
        gemm<float>(false, false, static_cast<int>(rows), d.cout, patch, 1.0f, cols.data(), patch,
                    weights.data.data(), d.cout, 0.0f, out.data.data(), d.cout);
    }
    detail::add_bias_rows(out.data.data(), rows, d.cout, bias.data.data());
    return out;
}

Conv2dGrads conv2d_backward(const Tensor& input, const Tensor& weights, int stride,
                            const Tensor& upstream, bool need_input_grad) {
    const ConvDims d = check_conv(input, weights, nullptr, stride);
    const std::vector<int> expect = d.batched ? std::vector<int>{d.n, d.oh, d.ow, d.cout}
                                              : std::vector<int>{d.oh, d.ow, d.cout};
    require_shape(upstream, expect, "conv2d_backward: upstream gradient");

    const std::int64_t rows = static_cast<std::int64_t>(d.n) * d.oh * d.ow;
    const int patch = d.k * d.k * d.cin;

    Conv2dGrads g;
    g.weights = Tensor(weights.shape);
    g.bias = Tensor({d.cout});
    detail::bias_grad_rows(upstream.data.data(), rows, d.cout, g.bias.data.data());

    if (d.k == 1 && stride == 1) {
        gemm<float>(true, false, d.cin, d.cout, static_cast<int>(rows), 1.0f, input.data.data(),
                    d.cin, upstream.data.data(), d.cout, 0.0f, g.weights.data.data(), d.cout);
        if (need_input_grad) {
            g.input = Tensor(input.shape);
            gemm<float>(false, true, static_cast<int>(rows), d.cin, d.cout, 1.0f,
                        upstream.data.data(), d.cout, weights.data.data(), d.cout, 0.0f,
                        g.input.data.data(), d.cin);
        }
        return g;
    }

    std::vector<float> cols(static_cast<std::size_t>(rows) * patch);
    detail::im2col(input.data.data(), d.n, d.h, d.w, d.cin, d.k, stride, cols.data());
    gemm<float>(true, false, patch, d.cout, static_cast<int>(rows), 1.0f, cols.data(), patch,
                upstream.data.data(), d.cout, 0.0f, g.weights.data.data(), d.cout);
    if (need_input_grad) {
        std::vector<float> dcols(static_cast<std::size_t>(rows) * patch);
        gemm<float>(false, true, static_cast<int>(rows), patch, d.cout, 1.0f,
                    upstream.data.data(), d.cout, weights.data.data(), d.cout, 0.0f, dcols.data(),
                    patch);
        g.input = Tensor(input.shape);
        detail::col2im_add(dcols.data(), d.n, d.h, d.w, d.cin, d.k, stride,
                           g.input.data.data());
    }
    return g;
}

Maxpool2Out maxpool2(const Tensor& input) {
    if (input.rank() != 3 && input.rank() != 4)
        throw std::invalid_argument("maxpool2: input rank must be 3 or 4, got " +
                                    shape_str(input.shape));
    const bool batched = input.rank() == 4;
    const int n = batched ? input.dim(0) : 1;
    const int h = input.dim(batched ? 1 : 0);
    const int w = input.dim(batched ? 2 : 1);
    const int c = input.dim(batched ? 3 : 2);
    if (h < 2 || w < 2)
        throw std::invalid_argument("maxpool2: spatial extent " + std::to_string(h) + "x" +
                                    std::to_string(w) + " smaller than window 2x2");
    Maxpool2Out out;
    out.output = Tensor(batched ? std::vector<int>{n, h / 2, w / 2, c}
                                : std::vector<int>{h / 2, w / 2, c});
    out.argmax.resize(static_cast<std::size_t>(out.output.numel()));
    detail::maxpool2_fwd(input.data.data(), n, h, w, c, out.output.data.data(),
                         out.argmax.data());
    return out;
}

Tensor maxpool2_backward(const Maxpool2Out& fwd, const std::vector<int>& input_shape,
                         const Tensor& upstream) {
    require_shape(upstream, fwd.output.shape, "maxpool2_backward: upstream gradient");
    Tensor grad(input_shape);
    detail::maxpool2_bwd(fwd.argmax.data(), upstream.data.data(),
                         static_cast<std::int64_t>(fwd.argmax.size()), grad.data.data());
    return grad;
}

namespace {

struct DenseDims {
    int b, n, m;
    bool batched;
};

DenseDims check_dense(const Tensor& input, const Tensor& weights, const Tensor* bias) {
    if (input.rank() != 1 && input.rank() != 2)
        throw std::invalid_argument("dense: input rank must be 1 or 2, got " +
                                    shape_str(input.shape));
    if (weights.rank() != 2)
        throw std::invalid_argument("dense: weights must be [N,M], got " +
                                    shape_str(weights.shape));
    DenseDims d{};
    d.batched = input.rank() == 2;
    d.b = d.batched ? input.dim(0) : 1;
    d.n = input.dim(d.batched ? 1 : 0);
    d.m = weights.dim(1);
    if (weights.dim(0) != d.n)
        throw std::invalid_argument("dense: weight rows " + std::to_string(weights.dim(0)) +
                                    " != input length " + std::to_string(d.n));
    if (bias && (bias->rank() != 1 || bias->dim(0) != d.m))
        throw std::invalid_argument("dense: bias length " + shape_str(bias->shape) +
                                    " != output length " + std::to_string(d.m));
    return d;
}

}  // namespace

Tensor dense(const Tensor& input, const Tensor& weights, const Tensor& bias) {
    const DenseDims d = check_dense(input, weights, &bias);
    Tensor out(d.batched ? std::vector<int>{d.b, d.m} : std::vector<int>{d.m});
    gemm<float>(false, false, d.b, d.m, d.n, 1.0f, input.data.data(), d.n, weights.data.data(),
                d.m, 0.0f, out.data.data(), d.m);
    detail::add_bias_rows(out.data.data(), d.b, d.m, bias.data.data());
    return out;
}

DenseGrads dense_backward(const Tensor& input, const Tensor& weights, const Tensor& upstream,
                          bool need_input_grad) {
    const DenseDims d = check_dense(input, weights, nullptr);
    const std::vector<int> expect =
        d.batched ? std::vector<int>{d.b, d.m} : std::vector<int>{d.m};
    require_shape(upstream, expect, "dense_backward: upstream gradient");

    DenseGrads g;
    g.weights = Tensor(weights.shape);
    g.bias = Tensor({d.m});
    gemm<float>(true, false, d.n, d.m, d.b, 1.0f, input.data.data(), d.n, upstream.data.data(),
                d.m, 0.0f, g.weights.data.data(), d.m);
    detail::bias_grad_rows(upstream.data.data(), d.b, d.m, g.bias.data.data());
    if (need_input_grad) {
        g.input = Tensor(input.shape);
        gemm<float>(false, true, d.b, d.n, d.m, 1.0f, upstream.data.data(), d.m,
                    weights.data.data(), d.m, 0.0f, g.input.data.data(), d.n);
    }
    return g;
}

Tensor relu(const Tensor& input) {
    Tensor out = input;
    detail::relu_inplace(out.data.data(), out.numel());
    return out;
}

Tensor relu_backward(const Tensor& pre, const Tensor& upstream) {
    if (!pre.same_shape(upstream))
        throw std::invalid_argument("relu_backward: pre-activation shape " + shape_str(pre.shape) +
                                    " != upstream shape " + shape_str(upstream.shape));
    Tensor grad = upstream;
    detail::relu_mask(pre.data.data(), grad.data.data(), grad.numel());
    return grad;
}

std::pair<double, double> huber_loss(double prediction, double target, double delta) {
    const double e = prediction - target;
    if (std::abs(e) <= delta) return {0.5 * e * e, e};
    return {delta * (std::abs(e) - 0.5 * delta), e > 0 ? delta : -delta};
}

void glorot_fill(Tensor& w, int fan_in, int fan_out, std::mt19937& rng) {
    const float bound = std::sqrt(6.0f / static_cast<float>(fan_in + fan_out));
    for (float& v : w.data) v = rng_uniform_f(rng, -bound, bound);
}

}  // namespace aec::nn
