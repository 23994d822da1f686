#include "aec/models.hpp"

#include "aec/rng.hpp"

namespace aec {

Models Models::init(const RunConfig& cfg) {
    std::mt19937 rng = make_rng(cfg.seed, 0x0de1);
    const nn::AdamHyper ae_hyper{static_cast<float>(cfg.ae_lr), static_cast<float>(cfg.adam_beta1),
                                 static_cast<float>(cfg.adam_beta2),
                                 static_cast<float>(cfg.adam_eps)};
    const nn::AdamHyper critic_hyper{static_cast<float>(cfg.critic_lr),
                                     static_cast<float>(cfg.adam_beta1),
                                     static_cast<float>(cfg.adam_beta2),
                                     static_cast<float>(cfg.adam_eps)};
    Models m{
        AutoencoderModel::init(Stream::Binocular, Scale::Fine, rng, ae_hyper),
        AutoencoderModel::init(Stream::Binocular, Scale::Coarse, rng, ae_hyper),
        AutoencoderModel::init(Stream::Temporal, Scale::Fine, rng, ae_hyper),
        AutoencoderModel::init(Stream::Temporal, Scale::Coarse, rng, ae_hyper),
        CriticModel::init(Joint::Pan, 48, cfg.critic_filters, rng, critic_hyper),
        CriticModel::init(Joint::Tilt, 48, cfg.critic_filters, rng, critic_hyper),
        CriticModel::init(Joint::Vergence, 24, cfg.critic_filters, rng, critic_hyper),
    };
    return m;
}

AutoencoderModel& Models::ae(Stream s, Scale sc) {
    if (s == Stream::Binocular) return sc == Scale::Fine ? ae_bin_fine : ae_bin_coarse;
    return sc == Scale::Fine ? ae_tmp_fine : ae_tmp_coarse;
}
const AutoencoderModel& Models::ae(Stream s, Scale sc) const {
    return const_cast<Models*>(this)->ae(s, sc);
}

CriticModel& Models::critic(Joint j) {
    switch (j) {
        case Joint::Pan: return critic_pan;
        case Joint::Tilt: return critic_tilt;
        case Joint::Vergence: return critic_vergence;
    }
    return critic_vergence;
}
const CriticModel& Models::critic(Joint j) const { return const_cast<Models*>(this)->critic(j); }

std::vector<std::pair<std::string, Tensor*>> Models::named_tensors() {
    std::vector<std::pair<std::string, Tensor*>> out;
    for (AutoencoderModel* m : {&ae_bin_fine, &ae_bin_coarse, &ae_tmp_fine, &ae_tmp_coarse})
        for (auto& p : m->named_tensors()) out.push_back(p);
    for (CriticModel* c : {&critic_pan, &critic_tilt, &critic_vergence})
        for (auto& p : c->named_tensors()) out.push_back(p);
    return out;
}

std::vector<std::pair<std::string, nn::AdamState*>> Models::named_adam() {
    std::vector<std::pair<std::string, nn::AdamState*>> out;
    for (AutoencoderModel* m : {&ae_bin_fine, &ae_bin_coarse, &ae_tmp_fine, &ae_tmp_coarse})
        for (auto& p : m->named_adam()) out.push_back(p);
    for (CriticModel* c : {&critic_pan, &critic_tilt, &critic_vergence})
        for (auto& p : c->named_adam()) out.push_back(p);
    return out;
}

PerceptionSnapshot perceive(const BinocularObservation& obs, const Models& models,
                            bool with_losses) {
    PerceptionSnapshot s;
    s.v_bin_fine = build_vergence_stream(obs, Scale::Fine);
    s.v_bin_coarse = build_vergence_stream(obs, Scale::Coarse);
    s.v_tmp_fine = build_temporal_stream(obs, Scale::Fine);
    s.v_tmp_coarse = build_temporal_stream(obs, Scale::Coarse);
    if (with_losses) {
        auto run = [&](const Tensor& v, const AutoencoderModel& m, double& loss, Tensor& enc) {
            AeForwardOut out = ae_loss_and_encoding(v, m);
            loss = out.loss;
            enc = std::move(out.encoding);
        };
        run(s.v_bin_fine, models.ae_bin_fine, s.loss_bin_fine, s.enc_bin_fine);
        run(s.v_bin_coarse, models.ae_bin_coarse, s.loss_bin_coarse, s.enc_bin_coarse);
        run(s.v_tmp_fine, models.ae_tmp_fine, s.loss_tmp_fine, s.enc_tmp_fine);
        run(s.v_tmp_coarse, models.ae_tmp_coarse, s.loss_tmp_coarse, s.enc_tmp_coarse);
        s.has_losses = true;
    } else {
        s.enc_bin_fine = encode(s.v_bin_fine, models.ae_bin_fine);
        s.enc_bin_coarse = encode(s.v_bin_coarse, models.ae_bin_coarse);
        s.enc_tmp_fine = encode(s.v_tmp_fine, models.ae_tmp_fine);
        s.enc_tmp_coarse = encode(s.v_tmp_coarse, models.ae_tmp_coarse);
    }
    return s;
}

}  // namespace aec
