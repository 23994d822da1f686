#pragma once

#include <array>
#include <random>

#include "aec/config.hpp"
#include "aec/control.hpp"
#include "aec/perception.hpp"

namespace aec {

// The seven trainable networks: four autoencoders (stream x scale) and
// three per-joint critics.
struct Models {
    AutoencoderModel ae_bin_fine, ae_bin_coarse, ae_tmp_fine, ae_tmp_coarse;
    CriticModel critic_pan, critic_tilt, critic_vergence;

    static Models init(const RunConfig& cfg);

    AutoencoderModel& ae(Stream s, Scale sc);
    const AutoencoderModel& ae(Stream s, Scale sc) const;
    CriticModel& critic(Joint j);
    const CriticModel& critic(Joint j) const;

    std::vector<std::pair<std::string, Tensor*>> named_tensors();
    std::vector<std::pair<std::string, nn::AdamState*>> named_adam();
};

// Vergence reads the binocular stream; pan and tilt read the temporal one.
inline Stream joint_stream(Joint j) {
    return j == Joint::Vergence ? Stream::Binocular : Stream::Temporal;
}

// One observation pushed through all four autoencoders: stream inputs,
// encodings, and (optionally) per-scale reconstruction losses.
struct PerceptionSnapshot {
    Tensor v_bin_fine, v_bin_coarse, v_tmp_fine, v_tmp_coarse;
    Tensor enc_bin_fine, enc_bin_coarse, enc_tmp_fine, enc_tmp_coarse;
    double loss_bin_fine = 0, loss_bin_coarse = 0, loss_tmp_fine = 0, loss_tmp_coarse = 0;
    bool has_losses = false;

    double combined_loss(Stream s) const {
        return s == Stream::Binocular ? 0.5 * (loss_bin_fine + loss_bin_coarse)
                                      : 0.5 * (loss_tmp_fine + loss_tmp_coarse);
    }
    const Tensor& encoding(Stream s, Scale sc) const {
        if (s == Stream::Binocular) return sc == Scale::Fine ? enc_bin_fine : enc_bin_coarse;
        return sc == Scale::Fine ? enc_tmp_fine : enc_tmp_coarse;
    }
};

PerceptionSnapshot perceive(const BinocularObservation& obs, const Models& models,
                            bool with_losses = true);

// Action selection hook; evaluation and tests can substitute scripted
// policies for the learned critics.
class Environment;
struct ActionPolicy {
    virtual ~ActionPolicy() = default;
    virtual int select(Joint j, const PerceptionSnapshot& snap, const Environment& env,
                       std::mt19937& rng) = 0;
};

struct EpsilonGreedyPolicy : ActionPolicy {
    const Models* models;
    double epsilon;

    EpsilonGreedyPolicy(const Models* m, double eps) : models(m), epsilon(eps) {}
    int select(Joint j, const PerceptionSnapshot& snap, const Environment&,
               std::mt19937& rng) override {
        const Stream s = joint_stream(j);
        const Tensor q = q_values(snap.encoding(s, Scale::Fine), snap.encoding(s, Scale::Coarse),
                                  models->critic(j));
        return select_action(q, epsilon, rng);
    }
};

}  // namespace aec
