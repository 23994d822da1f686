#include "aec/perception.hpp"

#include <cmath>
#include <stdexcept>

#include "aec/nn/layers.hpp"

namespace aec {

const char* stream_name(Stream s) { return s == Stream::Binocular ? "binocular" : "temporal"; }
const char* scale_name(Scale s) { return s == Scale::Fine ? "fine" : "coarse"; }

AutoencoderModel AutoencoderModel::init(Stream stream, Scale scale, std::mt19937& rng,
                                        nn::AdamHyper hyper) {
    AutoencoderModel m;
    m.stream = stream;
    m.scale = scale;
    if (stream == Stream::Binocular) {
        m.cin = 6;
        m.f1 = 96;
        m.cb = 24;
    } else {
        m.cin = 12;
        m.f1 = 192;
        m.cb = 48;
    }
    const int patch = 64 * m.cin;
    m.enc0_w = Tensor({8, 8, m.cin, m.f1});
    m.enc0_b = Tensor({m.f1});
    m.enc1_w = Tensor({1, 1, m.f1, m.cb});
    m.enc1_b = Tensor({m.cb});
    m.dec0_w = Tensor({1, 1, m.cb, patch});
    m.dec0_b = Tensor({patch});
    nn::glorot_fill(m.enc0_w, patch, m.f1, rng);
    nn::glorot_fill(m.enc1_w, m.f1, m.cb, rng);
    nn::glorot_fill(m.dec0_w, m.cb, patch, rng);
    m.enc0_w_adam = nn::AdamState(m.enc0_w.shape, hyper);
    m.enc0_b_adam = nn::AdamState(m.enc0_b.shape, hyper);
    m.enc1_w_adam = nn::AdamState(m.enc1_w.shape, hyper);
    m.enc1_b_adam = nn::AdamState(m.enc1_b.shape, hyper);
    m.dec0_w_adam = nn::AdamState(m.dec0_w.shape, hyper);
    m.dec0_b_adam = nn::AdamState(m.dec0_b.shape, hyper);
    return m;
}

nn::AeParamsView<float> AutoencoderModel::view() const {
    nn::AeParamsView<float> v;
    v.w1 = enc0_w.data.data();
    v.b1 = enc0_b.data.data();
    v.w2 = enc1_w.data.data();
    v.b2 = enc1_b.data.data();
    v.w3 = dec0_w.data.data();
    v.b3 = dec0_b.data.data();
    v.cin = cin;
    v.f1 = f1;
    v.cb = cb;
    return v;
}

std::vector<std::pair<std::string, Tensor*>> AutoencoderModel::named_tensors() {
    const std::string base =
        std::string("ae.") + stream_name(stream) + "." + scale_name(scale) + ".";
    return {{base + "enc.0.w", &enc0_w}, {base + "enc.0.b", &enc0_b},
            {base + "enc.1.w", &enc1_w}, {base + "enc.1.b", &enc1_b},
            {base + "dec.0.w", &dec0_w}, {base + "dec.0.b", &dec0_b}};
}

std::vector<std::pair<std::string, nn::AdamState*>> AutoencoderModel::named_adam() {
    const std::string base =
        std::string("ae.") + stream_name(stream) + "." + scale_name(scale) + ".";
    return {{base + "enc.0.w", &enc0_w_adam}, {base + "enc.0.b", &enc0_b_adam},
            {base + "enc.1.w", &enc1_w_adam}, {base + "enc.1.b", &enc1_b_adam},
            {base + "dec.0.w", &dec0_w_adam}, {base + "dec.0.b", &dec0_b_adam}};
}

namespace {

void copy_rgb(const Tensor& src, Tensor& dst, int channel0) {
    for (int r = 0; r < kCropSize; ++r)
        for (int c = 0; c < kCropSize; ++c)
            for (int k = 0; k < 3; ++k) dst.at3(r, c, channel0 + k) = src.at3(r, c, k);
}

}  // namespace

Tensor build_vergence_stream(const BinocularObservation& obs, Scale scale) {
    Tensor v({kCropSize, kCropSize, 6});
    const bool fine = scale == Scale::Fine;
    copy_rgb(fine ? obs.fine_left : obs.coarse_left, v, 0);
    copy_rgb(fine ? obs.fine_right : obs.coarse_right, v, 3);
    return v;
}

Tensor build_temporal_stream(const BinocularObservation& obs, Scale scale) {
    Tensor v({kCropSize, kCropSize, 12});
    const bool fine = scale == Scale::Fine;
    copy_rgb(fine ? obs.fine_left : obs.coarse_left, v, 0);
    copy_rgb(fine ? obs.fine_right : obs.coarse_right, v, 3);
    copy_rgb(fine ? obs.fine_left_prev : obs.coarse_left_prev, v, 6);
    copy_rgb(fine ? obs.fine_right_prev : obs.coarse_right_prev, v, 9);
    return v;
}

Tensor stream_input(const BinocularObservation& obs, Stream stream, Scale scale) {
    return stream == Stream::Binocular ? build_vergence_stream(obs, scale)
                                       : build_temporal_stream(obs, scale);
}

namespace {

void check_input(const Tensor& v, const AutoencoderModel& m, const char* what) {
    require_shape(v, {kCropSize, kCropSize, m.cin}, what);
}

}  // namespace

Tensor encode(const Tensor& v, const AutoencoderModel& model) {
    check_input(v, model, "encode: input");
    Tensor s({nn::kAeGrid, nn::kAeGrid, model.cb});
    nn::ae_encode(v.data.data(), 1, model.view(), s.data.data());
    return s;
}

double reconstruction_loss(const Tensor& v, const AutoencoderModel& model) {
    check_input(v, model, "reconstruction_loss: input");
    nn::AeTrace<float> tr;
    return nn::ae_forward(v.data.data(), 1, model.view(), tr);
}

AeForwardOut ae_loss_and_encoding(const Tensor& v, const AutoencoderModel& model) {
    check_input(v, model, "ae_loss_and_encoding: input");
    nn::AeTrace<float> tr;
    AeForwardOut out;
    out.loss = nn::ae_forward(v.data.data(), 1, model.view(), tr);
    out.encoding = Tensor({nn::kAeGrid, nn::kAeGrid, model.cb},
                          std::vector<float>(tr.s.begin(), tr.s.end()));
    return out;
}

nn::AeGrads<float> ae_gradients(std::span<const Tensor* const> batch,
                                const AutoencoderModel& model, double* mean_loss) {
    if (batch.empty()) throw std::invalid_argument("ae_gradients: empty batch");
    const int n = static_cast<int>(batch.size());
    std::vector<float> stacked(static_cast<std::size_t>(n) * kCropSize * kCropSize * model.cin);
    const std::size_t one = static_cast<std::size_t>(kCropSize) * kCropSize * model.cin;
    for (int i = 0; i < n; ++i) {
        check_input(*batch[static_cast<std::size_t>(i)], model, "ae_gradients: batch input");
        std::copy(batch[static_cast<std::size_t>(i)]->data.begin(),
                  batch[static_cast<std::size_t>(i)]->data.end(),
                  stacked.begin() + static_cast<std::size_t>(i) * one);
    }
    nn::AeTrace<float> tr;
    const double loss = nn::ae_forward(stacked.data(), n, model.view(), tr);
    if (!std::isfinite(loss)) throw std::runtime_error("autoencoder training: non-finite loss");
    if (mean_loss) *mean_loss = loss;
    nn::AeGrads<float> g;
    nn::ae_backward(model.view(), tr, g);
    return g;
}

double ae_train_step(std::span<const Tensor> batch, AutoencoderModel& model) {
    std::vector<const Tensor*> ptrs;
    ptrs.reserve(batch.size());
    for (const Tensor& t : batch) ptrs.push_back(&t);
    double loss = 0.0;
    nn::AeGrads<float> g = ae_gradients(ptrs, model, &loss);
    auto step = [](Tensor& p, std::vector<float>& grad, nn::AdamState& st) {
        nn::adam_step(p, Tensor(p.shape, std::move(grad)), st);
    };
    step(model.enc0_w, g.w1, model.enc0_w_adam);
    step(model.enc0_b, g.b1, model.enc0_b_adam);
    step(model.enc1_w, g.w2, model.enc1_w_adam);
    step(model.enc1_b, g.b2, model.enc1_b_adam);
    step(model.dec0_w, g.w3, model.dec0_w_adam);
    step(model.dec0_b, g.b3, model.dec0_b_adam);
    return loss;
}

double combined_stream_loss(const BinocularObservation& obs, const AutoencoderModel& fine,
                            const AutoencoderModel& coarse) {
    if (fine.stream != coarse.stream)
        throw std::invalid_argument("combined_stream_loss: models from different streams");
    const double lf = reconstruction_loss(stream_input(obs, fine.stream, Scale::Fine), fine);
    const double lc = reconstruction_loss(stream_input(obs, coarse.stream, Scale::Coarse), coarse);
    return 0.5 * (lf + lc);
}

}  // namespace aec
