#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "aec/nn/blas.hpp"

// Scalar-generic building blocks behind the layer ops. Everything here is
// shape-unchecked; callers validate. Layout is row-major NHWC throughout.

namespace aec::nn::detail {

inline int conv_out_extent(int in, int k, int stride) { return (in - k) / stride + 1; }

// Patch matrix for valid cross-correlation: out is [N*OH*OW, k*k*C],
// row-major, patch elements ordered (ky, kx, c) to match a [k,k,C,Cout]
// weight tensor flattened to [k*k*C, Cout].
template <typename T>
void im2col(const T* in, int n, int h, int w, int c, int k, int stride, T* out) {
    const int oh = conv_out_extent(h, k, stride);
    const int ow = conv_out_extent(w, k, stride);
    const std::int64_t row_len = static_cast<std::int64_t>(k) * k * c;
    for (int img = 0; img < n; ++img) {
        const T* src = in + static_cast<std::int64_t>(img) * h * w * c;
        T* dst = out + static_cast<std::int64_t>(img) * oh * ow * row_len;
        for (int oy = 0; oy < oh; ++oy) {
            for (int ox = 0; ox < ow; ++ox) {
                T* row = dst + (static_cast<std::int64_t>(oy) * ow + ox) * row_len;
                const int iy0 = oy * stride, ix0 = ox * stride;
                for (int ky = 0; ky < k; ++ky) {
                    const T* line = src + (static_cast<std::int64_t>(iy0 + ky) * w + ix0) * c;
                    std::copy(line, line + static_cast<std::int64_t>(k) * c,
                              row + static_cast<std::int64_t>(ky) * k * c);
                }
            }
        }
    }
}

// Scatter-add of a patch matrix back onto the input grid (adjoint of im2col).
template <typename T>
void col2im_add(const T* cols, int n, int h, int w, int c, int k, int stride, T* in_grad) {
    const int oh = conv_out_extent(h, k, stride);
    const int ow = conv_out_extent(w, k, stride);
    const std::int64_t row_len = static_cast<std::int64_t>(k) * k * c;
    for (int img = 0; img < n; ++img) {
        T* dst = in_grad + static_cast<std::int64_t>(img) * h * w * c;
        const T* src = cols + static_cast<std::int64_t>(img) * oh * ow * row_len;
        for (int oy = 0; oy < oh; ++oy) {
            for (int ox = 0; ox < ow; ++ox) {
                const T* row = src + (static_cast<std::int64_t>(oy) * ow + ox) * row_len;
                const int iy0 = oy * stride, ix0 = ox * stride;
                for (int ky = 0; ky < k; ++ky) {
                    T* line = dst + (static_cast<std::int64_t>(iy0 + ky) * w + ix0) * c;
                    const T* part = row + static_cast<std::int64_t>(ky) * k * c;
                    for (std::int64_t i = 0; i < static_cast<std::int64_t>(k) * c; ++i)
                        line[i] += part[i];
                }
            }
        }
    }
}

template <typename T>
void add_bias_rows(T* mat, std::int64_t rows, int cols, const T* bias) {
    for (std::int64_t r = 0; r < rows; ++r) {
        T* line = mat + r * cols;
        for (int j = 0; j < cols; ++j) line[j] += bias[j];
    }
}

// db[j] = sum over rows of up[r,j].
template <typename T>
void bias_grad_rows(const T* up, std::int64_t rows, int cols, T* db) {
    std::fill(db, db + cols, T(0));
    for (std::int64_t r = 0; r < rows; ++r) {
        const T* line = up + r * cols;
        for (int j = 0; j < cols; ++j) db[j] += line[j];
    }
}

template <typename T>
void relu_inplace(T* x, std::int64_t n) {
    for (std::int64_t i = 0; i < n; ++i) x[i] = x[i] > T(0) ? x[i] : T(0);
}

// Masks `grad` by the sign of the pre-activation. Subgradient at 0 is 0.
template <typename T>
void relu_mask(const T* pre, T* grad, std::int64_t n) {
    for (std::int64_t i = 0; i < n; ++i)
        if (!(pre[i] > T(0))) grad[i] = T(0);
}

// 2x2/2 max pooling over [N,H,W,C]; trailing odd row/column dropped.
// argmax holds flat indices into the input for the backward routing,
// first-index tie-break.
template <typename T>
void maxpool2_fwd(const T* in, int n, int h, int w, int c, T* out, std::int64_t* argmax) {
    const int oh = h / 2, ow = w / 2;
    std::int64_t o = 0;
    for (int img = 0; img < n; ++img) {
        const std::int64_t base = static_cast<std::int64_t>(img) * h * w * c;
        for (int oy = 0; oy < oh; ++oy) {
            for (int ox = 0; ox < ow; ++ox) {
                for (int ch = 0; ch < c; ++ch) {
                    std::int64_t best_idx =
                        base + (static_cast<std::int64_t>(2 * oy) * w + 2 * ox) * c + ch;
                    T best = in[best_idx];
                    for (int ky = 0; ky < 2; ++ky) {
                        for (int kx = 0; kx < 2; ++kx) {
                            const std::int64_t idx =
                                base + (static_cast<std::int64_t>(2 * oy + ky) * w + 2 * ox + kx) * c + ch;
                            if (in[idx] > best) {
                                best = in[idx];
                                best_idx = idx;
                            }
                        }
                    }
                    out[o] = best;
                    argmax[o] = best_idx;
                    ++o;
                }
            }
        }
    }
}

template <typename T>
void maxpool2_bwd(const std::int64_t* argmax, const T* up, std::int64_t n_out, T* in_grad) {
    for (std::int64_t i = 0; i < n_out; ++i) in_grad[argmax[i]] += up[i];
}

}  // namespace aec::nn::detail
