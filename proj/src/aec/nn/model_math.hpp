#pragma once

#include <cstdint>
#include <vector>

#include "aec/nn/kernels.hpp"

// Forward/backward math for the two network families, written once over a
// generic scalar. Production models instantiate T = float; the gradient
// checker instantiates T = double over the identical code path.
//
// Autoencoder (one stream at one scale), input [n,32,32,cin]:
//   patches X = im2col(input, k=8, stride=4)            [n*49, 64*cin]
//   H1 = relu(X  W1 + b1)   W1 [64*cin, f1]
//   S  = relu(H1 W2 + b2)   W2 [f1, cb]        (the encoding, [n,7,7,cb])
//   Y  =      S  W3 + b3    W3 [cb, 64*cin]    (decoded patches)
//   loss = mean((Y - X)^2) over every patch element.
//
// Critic (one joint), encodings [n,7,7,cenc] per scale:
//   per scale: conv 2x2/1 (f filters) + relu -> [n,6,6,f] -> maxpool 2x2/2
//   flatten + concatenate scales -> [n, 2*9*f]
//   dense 200 + relu -> dense 9 (linear q-values).

namespace aec::nn {

inline constexpr int kAeKernel = 8;
inline constexpr int kAeStride = 4;
inline constexpr int kAeInputExtent = 32;
inline constexpr int kAeGrid = 7;          // (32-8)/4+1
inline constexpr int kAeLocations = kAeGrid * kAeGrid;
inline constexpr int kCriticGrid = 7;
inline constexpr int kCriticConvOut = 6;   // 7 - 2 + 1
inline constexpr int kCriticPoolOut = 3;
inline constexpr int kNumActions = 9;

template <typename T>
struct AeParamsView {
    const T *w1, *b1, *w2, *b2, *w3, *b3;
    int cin, f1, cb;
    int patch() const { return kAeKernel * kAeKernel * cin; }
};

template <typename T>
struct AeTrace {
    std::vector<T> x;       // [rows, patch], also the reconstruction target
    std::vector<T> h1_pre;  // [rows, f1]
    std::vector<T> h1;
    std::vector<T> s_pre;   // [rows, cb]
    std::vector<T> s;       // encoding
    std::vector<T> y;       // [rows, patch]
    std::int64_t rows = 0;
};

template <typename T>
double ae_forward(const T* input, int n, const AeParamsView<T>& p, AeTrace<T>& tr) {
    const std::int64_t rows = static_cast<std::int64_t>(n) * kAeLocations;
    const int patch = p.patch();
    tr.rows = rows;
    tr.x.resize(static_cast<std::size_t>(rows * patch));
    tr.h1_pre.resize(static_cast<std::size_t>(rows * p.f1));
    tr.s_pre.resize(static_cast<std::size_t>(rows * p.cb));
    tr.y.resize(static_cast<std::size_t>(rows * patch));

    detail::im2col(input, n, kAeInputExtent, kAeInputExtent, p.cin, kAeKernel, kAeStride,
                   tr.x.data());
    gemm<T>(false, false, static_cast<int>(rows), p.f1, patch, T(1), tr.x.data(), patch, p.w1,
            p.f1, T(0), tr.h1_pre.data(), p.f1);
    detail::add_bias_rows(tr.h1_pre.data(), rows, p.f1, p.b1);
    tr.h1 = tr.h1_pre;
    detail::relu_inplace(tr.h1.data(), rows * p.f1);

    gemm<T>(false, false, static_cast<int>(rows), p.cb, p.f1, T(1), tr.h1.data(), p.f1, p.w2,
            p.cb, T(0), tr.s_pre.data(), p.cb);
    detail::add_bias_rows(tr.s_pre.data(), rows, p.cb, p.b2);
    tr.s = tr.s_pre;
    detail::relu_inplace(tr.s.data(), rows * p.cb);

    gemm<T>(false, false, static_cast<int>(rows), patch, p.cb, T(1), tr.s.data(), p.cb, p.w3,
            patch, T(0), tr.y.data(), patch);
    detail::add_bias_rows(tr.y.data(), rows, patch, p.b3);

    // Double accumulation keeps the scalar loss usable by finite differences.
    double acc = 0.0;
    const std::int64_t total = rows * patch;
    for (std::int64_t i = 0; i < total; ++i) {
        const double e = static_cast<double>(tr.y[static_cast<std::size_t>(i)]) -
                         static_cast<double>(tr.x[static_cast<std::size_t>(i)]);
        acc += e * e;
    }
    return acc / static_cast<double>(total);
}

template <typename T>
struct AeGrads {
    std::vector<T> w1, b1, w2, b2, w3, b3;
};

template <typename T>
void ae_backward(const AeParamsView<T>& p, const AeTrace<T>& tr, AeGrads<T>& g) {
    const std::int64_t rows = tr.rows;
    const int patch = p.patch();
    g.w1.assign(static_cast<std::size_t>(patch) * p.f1, T(0));
    g.b1.assign(static_cast<std::size_t>(p.f1), T(0));
    g.w2.assign(static_cast<std::size_t>(p.f1) * p.cb, T(0));
    g.b2.assign(static_cast<std::size_t>(p.cb), T(0));
    g.w3.assign(static_cast<std::size_t>(p.cb) * patch, T(0));
    g.b3.assign(static_cast<std::size_t>(patch), T(0));

    const std::int64_t total = rows * patch;
    std::vector<T> dy(static_cast<std::size_t>(total));
    const T scale = T(2) / static_cast<T>(total);
    for (std::int64_t i = 0; i < total; ++i)
        dy[static_cast<std::size_t>(i)] =
            scale * (tr.y[static_cast<std::size_t>(i)] - tr.x[static_cast<std::size_t>(i)]);

    gemm<T>(true, false, p.cb, patch, static_cast<int>(rows), T(1), tr.s.data(), p.cb, dy.data(),
            patch, T(0), g.w3.data(), patch);
    detail::bias_grad_rows(dy.data(), rows, patch, g.b3.data());

    std::vector<T> ds(static_cast<std::size_t>(rows * p.cb));
    gemm<T>(false, true, static_cast<int>(rows), p.cb, patch, T(1), dy.data(), patch, p.w3,
            patch, T(0), ds.data(), p.cb);
    detail::relu_mask(tr.s_pre.data(), ds.data(), rows * p.cb);

    gemm<T>(true, false, p.f1, p.cb, static_cast<int>(rows), T(1), tr.h1.data(), p.f1, ds.data(),
            p.cb, T(0), g.w2.data(), p.cb);
    detail::bias_grad_rows(ds.data(), rows, p.cb, g.b2.data());

    std::vector<T> dh1(static_cast<std::size_t>(rows * p.f1));
    gemm<T>(false, true, static_cast<int>(rows), p.f1, p.cb, T(1), ds.data(), p.cb, p.w2, p.cb,
            T(0), dh1.data(), p.f1);
    detail::relu_mask(tr.h1_pre.data(), dh1.data(), rows * p.f1);

    gemm<T>(true, false, patch, p.f1, static_cast<int>(rows), T(1), tr.x.data(), patch,
            dh1.data(), p.f1, T(0), g.w1.data(), p.f1);
    detail::bias_grad_rows(dh1.data(), rows, p.f1, g.b1.data());
}

// Encoder-only pass; `s_out` must hold n*49*cb elements.
template <typename T>
void ae_encode(const T* input, int n, const AeParamsView<T>& p, T* s_out) {
    const std::int64_t rows = static_cast<std::int64_t>(n) * kAeLocations;
    const int patch = p.patch();
    std::vector<T> cols(static_cast<std::size_t>(rows * patch));
    std::vector<T> h1(static_cast<std::size_t>(rows * p.f1));
    detail::im2col(input, n, kAeInputExtent, kAeInputExtent, p.cin, kAeKernel, kAeStride,
                   cols.data());
    gemm<T>(false, false, static_cast<int>(rows), p.f1, patch, T(1), cols.data(), patch, p.w1,
            p.f1, T(0), h1.data(), p.f1);
    detail::add_bias_rows(h1.data(), rows, p.f1, p.b1);
    detail::relu_inplace(h1.data(), rows * p.f1);
    gemm<T>(false, false, static_cast<int>(rows), p.cb, p.f1, T(1), h1.data(), p.f1, p.w2, p.cb,
            T(0), s_out, p.cb);
    detail::add_bias_rows(s_out, rows, p.cb, p.b2);
    detail::relu_inplace(s_out, rows * p.cb);
}

template <typename T>
struct CriticParamsView {
    const T *wc_fine, *bc_fine, *wc_coarse, *bc_coarse;  // conv [2,2,cenc,f]
    const T *w_fc0, *b_fc0;                              // [2*9*f, 200]
    const T *w_fc1, *b_fc1;                              // [200, 9]
    int cenc, f, hidden;
    int conv_patch() const { return 4 * cenc; }
    int flat_per_scale() const { return kCriticPoolOut * kCriticPoolOut * f; }
};

template <typename T>
struct CriticScaleTrace {
    std::vector<T> cols;      // [n*36, 4*cenc]
    std::vector<T> conv_pre;  // [n*36, f]
    std::vector<T> conv;
    std::vector<T> pool;      // [n*9, f]
    std::vector<std::int64_t> argmax;
};

template <typename T>
struct CriticTrace {
    CriticScaleTrace<T> fine, coarse;
    std::vector<T> flat;     // [n, 2*9*f]
    std::vector<T> fc0_pre;  // [n, hidden]
    std::vector<T> fc0;
    std::vector<T> q;  // [n, 9]
    int n = 0;
};

template <typename T>
void critic_scale_fwd(const T* enc, int n, const T* w, const T* b, int cenc, int f,
                      CriticScaleTrace<T>& tr) {
    const std::int64_t conv_rows = static_cast<std::int64_t>(n) * kCriticConvOut * kCriticConvOut;
    const int patch = 4 * cenc;
    tr.cols.resize(static_cast<std::size_t>(conv_rows * patch));
    tr.conv_pre.resize(static_cast<std::size_t>(conv_rows * f));
    detail::im2col(enc, n, kCriticGrid, kCriticGrid, cenc, 2, 1, tr.cols.data());
    gemm<T>(false, false, static_cast<int>(conv_rows), f, patch, T(1), tr.cols.data(), patch, w,
            f, T(0), tr.conv_pre.data(), f);
    detail::add_bias_rows(tr.conv_pre.data(), conv_rows, f, b);
    tr.conv = tr.conv_pre;
    detail::relu_inplace(tr.conv.data(), conv_rows * f);

    const std::int64_t pool_n =
        static_cast<std::int64_t>(n) * kCriticPoolOut * kCriticPoolOut * f;
    tr.pool.resize(static_cast<std::size_t>(pool_n));
    tr.argmax.resize(static_cast<std::size_t>(pool_n));
    detail::maxpool2_fwd(tr.conv.data(), n, kCriticConvOut, kCriticConvOut, f, tr.pool.data(),
                         tr.argmax.data());
}

template <typename T>
void critic_forward(const T* enc_fine, const T* enc_coarse, int n, const CriticParamsView<T>& p,
                    CriticTrace<T>& tr) {
    tr.n = n;
    critic_scale_fwd(enc_fine, n, p.wc_fine, p.bc_fine, p.cenc, p.f, tr.fine);
    critic_scale_fwd(enc_coarse, n, p.wc_coarse, p.bc_coarse, p.cenc, p.f, tr.coarse);

    const int per_scale = p.flat_per_scale();
    const int flat_len = 2 * per_scale;
    tr.flat.resize(static_cast<std::size_t>(n) * flat_len);
    for (int i = 0; i < n; ++i) {
        std::copy(tr.fine.pool.begin() + static_cast<std::size_t>(i) * per_scale,
                  tr.fine.pool.begin() + static_cast<std::size_t>(i + 1) * per_scale,
                  tr.flat.begin() + static_cast<std::size_t>(i) * flat_len);
        std::copy(tr.coarse.pool.begin() + static_cast<std::size_t>(i) * per_scale,
                  tr.coarse.pool.begin() + static_cast<std::size_t>(i + 1) * per_scale,
                  tr.flat.begin() + static_cast<std::size_t>(i) * flat_len + per_scale);
    }

    tr.fc0_pre.resize(static_cast<std::size_t>(n) * p.hidden);
    gemm<T>(false, false, n, p.hidden, flat_len, T(1), tr.flat.data(), flat_len, p.w_fc0,
            p.hidden, T(0), tr.fc0_pre.data(), p.hidden);
    detail::add_bias_rows(tr.fc0_pre.data(), n, p.hidden, p.b_fc0);
    tr.fc0 = tr.fc0_pre;
    detail::relu_inplace(tr.fc0.data(), static_cast<std::int64_t>(n) * p.hidden);

    tr.q.resize(static_cast<std::size_t>(n) * kNumActions);
    gemm<T>(false, false, n, kNumActions, p.hidden, T(1), tr.fc0.data(), p.hidden, p.w_fc1,
            kNumActions, T(0), tr.q.data(), kNumActions);
    detail::add_bias_rows(tr.q.data(), n, kNumActions, p.b_fc1);
}

template <typename T>
struct CriticGrads {
    std::vector<T> wc_fine, bc_fine, wc_coarse, bc_coarse, w_fc0, b_fc0, w_fc1, b_fc1;
};

template <typename T>
void critic_scale_bwd(const T* dpool, int n, const CriticParamsView<T>& p,
                      const CriticScaleTrace<T>& tr, std::vector<T>& dw, std::vector<T>& db) {
    const std::int64_t conv_rows = static_cast<std::int64_t>(n) * kCriticConvOut * kCriticConvOut;
    const int patch = 4 * p.cenc;
    std::vector<T> dconv(static_cast<std::size_t>(conv_rows * p.f), T(0));
    detail::maxpool2_bwd(tr.argmax.data(), dpool,
                         static_cast<std::int64_t>(tr.argmax.size()), dconv.data());
    detail::relu_mask(tr.conv_pre.data(), dconv.data(), conv_rows * p.f);
    dw.assign(static_cast<std::size_t>(patch) * p.f, T(0));
    db.assign(static_cast<std::size_t>(p.f), T(0));
    gemm<T>(true, false, patch, p.f, static_cast<int>(conv_rows), T(1), tr.cols.data(), patch,
            dconv.data(), p.f, T(0), dw.data(), p.f);
    detail::bias_grad_rows(dconv.data(), conv_rows, p.f, db.data());
    // Encodings are detached: no gradient flows back into the input.
}

template <typename T>
void critic_backward(const CriticParamsView<T>& p, const CriticTrace<T>& tr, const T* dq,
                     CriticGrads<T>& g) {
    const int n = tr.n;
    const int per_scale = p.flat_per_scale();
    const int flat_len = 2 * per_scale;

    g.w_fc1.assign(static_cast<std::size_t>(p.hidden) * kNumActions, T(0));
    g.b_fc1.assign(static_cast<std::size_t>(kNumActions), T(0));
    gemm<T>(true, false, p.hidden, kNumActions, n, T(1), tr.fc0.data(), p.hidden, dq,
            kNumActions, T(0), g.w_fc1.data(), kNumActions);
    detail::bias_grad_rows(dq, n, kNumActions, g.b_fc1.data());

    std::vector<T> dfc0(static_cast<std::size_t>(n) * p.hidden);
    gemm<T>(false, true, n, p.hidden, kNumActions, T(1), dq, kNumActions, p.w_fc1, kNumActions,
            T(0), dfc0.data(), p.hidden);
    detail::relu_mask(tr.fc0_pre.data(), dfc0.data(), static_cast<std::int64_t>(n) * p.hidden);

    g.w_fc0.assign(static_cast<std::size_t>(flat_len) * p.hidden, T(0));
    g.b_fc0.assign(static_cast<std::size_t>(p.hidden), T(0));
    gemm<T>(true, false, flat_len, p.hidden, n, T(1), tr.flat.data(), flat_len, dfc0.data(),
            p.hidden, T(0), g.w_fc0.data(), p.hidden);
    detail::bias_grad_rows(dfc0.data(), n, p.hidden, g.b_fc0.data());

    std::vector<T> dflat(static_cast<std::size_t>(n) * flat_len);
    gemm<T>(false, true, n, flat_len, p.hidden, T(1), dfc0.data(), p.hidden, p.w_fc0, p.hidden,
            T(0), dflat.data(), flat_len);

    std::vector<T> dpool_f(static_cast<std::size_t>(n) * per_scale);
    std::vector<T> dpool_c(static_cast<std::size_t>(n) * per_scale);
    for (int i = 0; i < n; ++i) {
        std::copy(dflat.begin() + static_cast<std::size_t>(i) * flat_len,
                  dflat.begin() + static_cast<std::size_t>(i) * flat_len + per_scale,
                  dpool_f.begin() + static_cast<std::size_t>(i) * per_scale);
        std::copy(dflat.begin() + static_cast<std::size_t>(i) * flat_len + per_scale,
                  dflat.begin() + static_cast<std::size_t>(i + 1) * flat_len,
                  dpool_c.begin() + static_cast<std::size_t>(i) * per_scale);
    }
    critic_scale_bwd(dpool_f.data(), n, p, tr.fine, g.wc_fine, g.bc_fine);
    critic_scale_bwd(dpool_c.data(), n, p, tr.coarse, g.wc_coarse, g.bc_coarse);
}

}  // namespace aec::nn
