#pragma once

#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "aec/environment.hpp"
#include "aec/nn/adam.hpp"
#include "aec/nn/model_math.hpp"
#include "aec/tensor.hpp"

namespace aec {

enum class Stream { Binocular = 0, Temporal = 1 };
enum class Scale { Fine = 0, Coarse = 1 };

const char* stream_name(Stream s);
const char* scale_name(Scale s);

// Patch-wise autoencoder for one stream at one scale:
//   encoder: conv 8x8/4 (96 or 192 filters) + relu, conv 1x1 (24 or 48) + relu
//   decoder: conv 1x1 back to an 8x8 patch per location (linear).
// Binocular: 6 input channels, bottleneck 24, decoder 384 = 8*8*6.
// Temporal: 12 input channels, bottleneck 48, decoder 768 = 8*8*12.
struct AutoencoderModel {
    Stream stream = Stream::Binocular;
    Scale scale = Scale::Fine;
    int cin = 6, f1 = 96, cb = 24;

    Tensor enc0_w, enc0_b;  // [8,8,cin,f1]
    Tensor enc1_w, enc1_b;  // [1,1,f1,cb]
    Tensor dec0_w, dec0_b;  // [1,1,cb,64*cin]

    nn::AdamState enc0_w_adam, enc0_b_adam, enc1_w_adam, enc1_b_adam, dec0_w_adam, dec0_b_adam;

    static AutoencoderModel init(Stream stream, Scale scale, std::mt19937& rng,
                                 nn::AdamHyper hyper);

    nn::AeParamsView<float> view() const;
    // Checkpoint/server names: ae.<stream>.<scale>.<enc|dec>.<layer>.<w|b>.
    std::vector<std::pair<std::string, Tensor*>> named_tensors();
    std::vector<std::pair<std::string, nn::AdamState*>> named_adam();
};

// [32,32,6]: left/right RGB at time t, channels [Lr,Lg,Lb,Rr,Rg,Rb].
Tensor build_vergence_stream(const BinocularObservation& obs, Scale scale);
// [32,32,12]: [Lt, Rt, L(t-1), R(t-1)] x RGB.
Tensor build_temporal_stream(const BinocularObservation& obs, Scale scale);

Tensor stream_input(const BinocularObservation& obs, Stream stream, Scale scale);

// Encoding: [7,7,cb].
Tensor encode(const Tensor& v, const AutoencoderModel& model);

// Mean squared error between the 49 decoded 8x8 patches and the matching
// (overlapping, stride-4) input patches.
double reconstruction_loss(const Tensor& v, const AutoencoderModel& model);

struct AeForwardOut {
    double loss = 0.0;
    Tensor encoding;
};
AeForwardOut ae_loss_and_encoding(const Tensor& v, const AutoencoderModel& model);

// One Adam step on encoder+decoder against the mean batch loss; returns the
// pre-update mean loss. Throws on a non-finite loss without stepping.
double ae_train_step(std::span<const Tensor> batch, AutoencoderModel& model);

// Gradients only (no optimizer step); used by the delta-computing worker.
nn::AeGrads<float> ae_gradients(std::span<const Tensor* const> batch, const AutoencoderModel& model,
                                double* mean_loss);

// (l_fine + l_coarse) / 2 on this observation's stream inputs.
double combined_stream_loss(const BinocularObservation& obs, const AutoencoderModel& fine,
                            const AutoencoderModel& coarse);

}  // namespace aec
