#include "aec/training.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <thread>

#include "aec/evaluation.hpp"
#include "aec/rng.hpp"

namespace aec {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

}  // namespace

EpisodeResult run_episode(Environment& env, const Models& models, const RunConfig& cfg,
                          ActionPolicy& policy, std::mt19937& rng) {
    const int length = cfg.episode_length;
    const RewardMode mode = reward_mode_from_string(cfg.reward_mode);

    struct Pending {
        Tensor s_fine, s_coarse;
        int action = kNullActionIndex;
        std::vector<Tensor> ae_inputs;
    };
    std::array<Pending, 3> pending;

    EpisodeResult result;
    for (auto& v : result.transitions) v.reserve(static_cast<std::size_t>(length - 1));
    std::array<double, 2> prev_loss{};  // per stream
    double sum_bin = 0.0, sum_tmp = 0.0;

    for (int t = 0; t < length; ++t) {
        const BinocularObservation obs = env.observation();
        const PerceptionSnapshot snap = perceive(obs, models, true);
        sum_bin += snap.combined_loss(Stream::Binocular);
        sum_tmp += snap.combined_loss(Stream::Temporal);

        if (t > 0) {
            for (Joint j : kJoints) {
                const Stream s = joint_stream(j);
                Pending& p = pending[static_cast<std::size_t>(j)];
                Transition tr;
                tr.s_fine = std::move(p.s_fine);
                tr.s_coarse = std::move(p.s_coarse);
                tr.action = p.action;
                tr.ae_inputs = std::move(p.ae_inputs);
                tr.reward = static_cast<float>(compute_reward(
                    prev_loss[static_cast<std::size_t>(s)], snap.combined_loss(s), mode,
                    cfg.reward_scale_c));
                tr.next_fine = snap.encoding(s, Scale::Fine);
                tr.next_coarse = snap.encoding(s, Scale::Coarse);
                tr.terminal = t == length - 1;
                result.transitions[static_cast<std::size_t>(j)].push_back(std::move(tr));
            }
        }
        if (t == length - 1) {
            const GroundTruthErrors e = env.ground_truth_errors();
            result.stats.final_abs_error = {std::abs(e.pan_px), std::abs(e.tilt_px),
                                            std::abs(e.vergence_px)};
        }

        std::array<int, 3> actions{};
        for (Joint j : kJoints) {
            const int a = policy.select(j, snap, env, rng);
            actions[static_cast<std::size_t>(j)] = a;
            const Stream s = joint_stream(j);
            Pending& p = pending[static_cast<std::size_t>(j)];
            p.s_fine = snap.encoding(s, Scale::Fine);
            p.s_coarse = snap.encoding(s, Scale::Coarse);
            p.action = a;
            p.ae_inputs.clear();
            if (j == Joint::Vergence)
                p.ae_inputs = {snap.v_bin_fine, snap.v_bin_coarse};
            else if (j == Joint::Pan)
                p.ae_inputs = {snap.v_tmp_fine, snap.v_tmp_coarse};
        }
        prev_loss = {snap.combined_loss(Stream::Binocular), snap.combined_loss(Stream::Temporal)};

        env.apply_actions(kActionSetPx[static_cast<std::size_t>(actions[0])],
                          kActionSetPx[static_cast<std::size_t>(actions[1])],
                          kActionSetPx[static_cast<std::size_t>(actions[2])]);
    }

    result.stats.mean_loss_binocular = sum_bin / length;
    result.stats.mean_loss_temporal = sum_tmp / length;
    return result;
}

ParameterServer::ParameterServer(Models& initial) {
    for (auto& [name, tensor] : initial.named_tensors()) {
        auto e = std::make_unique<Entry>();
        e->value = *tensor;
        entries_.emplace(name, std::move(e));
    }
}

const ParameterServer::Entry& ParameterServer::entry(const std::string& name) const {
    auto it = entries_.find(name);
    if (it == entries_.end())
        throw std::invalid_argument("parameter server: unknown tensor '" + name + "'");
    return *it->second;
}

void ParameterServer::pull_into(Models& models) const {
    for (auto& [name, tensor] : models.named_tensors()) {
        const Entry& e = entry(name);
        std::lock_guard<std::mutex> lock(e.mu);
        *tensor = e.value;
    }
}

std::map<std::string, Tensor> ParameterServer::pull_all() const {
    std::map<std::string, Tensor> out;
    for (const auto& [name, e] : entries_) {
        std::lock_guard<std::mutex> lock(e->mu);
        out.emplace(name, e->value);
    }
    return out;
}

Tensor ParameterServer::pull(const std::string& name) const {
    const Entry& e = entry(name);
    std::lock_guard<std::mutex> lock(e.mu);
    return e.value;
}

std::uint64_t ParameterServer::version(const std::string& name) const {
    const Entry& e = entry(name);
    std::lock_guard<std::mutex> lock(e.mu);
    return e.version;
}

void ParameterServer::apply(const std::vector<std::pair<std::string, Tensor>>& deltas) {
    for (const auto& [name, delta] : deltas) {
        auto it = entries_.find(name);
        if (it == entries_.end())
            throw std::invalid_argument("server_apply: unknown tensor '" + name + "'");
        Entry& e = *it->second;
        std::lock_guard<std::mutex> lock(e.mu);
        if (delta.shape != e.value.shape)
            throw std::invalid_argument("server_apply: shape mismatch for '" + name + "'");
        float* dst = e.value.data.data();
        const float* src = delta.data.data();
        for (std::size_t i = 0; i < e.value.data.size(); ++i) dst[i] += src[i];
        e.version += 1;
    }
}

int effective_worker_count(int requested) {
    if (const char* cap = std::getenv("AGZ_THREADS")) {
        const int c = std::atoi(cap);
        if (c >= 1 && c < requested) return c;
    }
    return requested;
}

namespace {

struct CsvSinks {
    std::mutex mu;
    std::ofstream log, curve;
};

// Tensor stacking for buffer serialization.
Tensor stack(const std::vector<const Tensor*>& parts) {
    std::vector<int> shape = parts.front()->shape;
    shape.insert(shape.begin(), static_cast<int>(parts.size()));
    Tensor out(shape);
    const std::size_t one = parts.front()->data.size();
    for (std::size_t i = 0; i < parts.size(); ++i)
        std::copy(parts[i]->data.begin(), parts[i]->data.end(), out.data.begin() + i * one);
    return out;
}

Tensor unstack(const Tensor& stacked, std::size_t index) {
    std::vector<int> shape(stacked.shape.begin() + 1, stacked.shape.end());
    const std::size_t one = static_cast<std::size_t>(shape_numel(shape));
    Tensor out(shape);
    std::copy(stacked.data.begin() + index * one, stacked.data.begin() + (index + 1) * one,
              out.data.begin());
    return out;
}

class Worker {
public:
    Worker(int id, const RunConfig& cfg, const StimulusSet* stimuli,
           const StimulusSet* eval_stimuli, ParameterServer* server,
           std::atomic<long long>* counter, CsvSinks* csv, const std::string& out_dir)
        : id_(id),
          cfg_(cfg),
          server_(server),
          counter_(counter),
          csv_(csv),
          out_dir_(out_dir),
          eval_stimuli_(eval_stimuli),
          models_(Models::init(cfg)),
          buffers_{ReplayBuffer(static_cast<std::size_t>(cfg.replay_capacity)),
                   ReplayBuffer(static_cast<std::size_t>(cfg.replay_capacity)),
                   ReplayBuffer(static_cast<std::size_t>(cfg.replay_capacity))},
          rng_(make_rng(cfg.seed, 0x1000 + static_cast<std::uint64_t>(id))),
          env_(stimuli, cfg.env_config()) {}

    void run() {
        while (true) {
            const long long ep = counter_->fetch_add(1);
            if (ep >= cfg_.episodes) break;
            run_one(ep);
        }
    }

private:
    void run_one(long long ep) {
        server_->pull_into(models_);
        env_.reset(rng_);
        EpsilonGreedyPolicy policy(&models_, cfg_.epsilon);
        EpisodeResult res = run_episode(env_, models_, cfg_, policy, rng_);
        for (Joint j : kJoints) {
            auto& list = res.transitions[static_cast<std::size_t>(j)];
            for (Transition& t : list) buffers_[static_cast<std::size_t>(j)].push(std::move(t));
        }
        server_->apply(compute_deltas());

        const bool eval_now = (ep + 1) % cfg_.eval_interval == 0 || ep + 1 == cfg_.episodes;
        std::array<double, 3> test_err{};
        if (eval_now) {
            server_->pull_into(models_);
            test_err = testing_error(models_, *eval_stimuli_, cfg_.env_config(),
                                     cfg_.episode_length);
        }
        write_rows(ep, res.stats, eval_now, test_err);

        if ((ep + 1) % cfg_.checkpoint_interval == 0 && ep + 1 != cfg_.episodes) {
            char name[64];
            std::snprintf(name, sizeof(name), "ckpt_ep%07lld.agze", ep + 1);
            Checkpoint ckpt;
            ckpt.config = cfg_;
            ckpt.meta["episodes_done"] = ep + 1;
            ckpt.meta["has_state"] = false;
            ckpt.tensors = server_->pull_all();
            checkpoint_save(out_dir_ + "/" + name, ckpt);
        }
    }

    std::vector<std::pair<std::string, Tensor>> compute_deltas() {
        std::vector<std::pair<std::string, Tensor>> deltas;
        auto adam_delta = [&deltas](Tensor& p, std::vector<float>&& grad, nn::AdamState& st,
                                    const std::string& name) {
            const Tensor before = p;
            nn::adam_step(p, Tensor(p.shape, std::move(grad)), st);
            Tensor d(p.shape);
            for (std::size_t i = 0; i < d.data.size(); ++i)
                d.data[i] = p.data[i] - before.data[i];
            deltas.emplace_back(name, std::move(d));
        };

        for (Joint j : kJoints) {
            ReplayBuffer& buf = buffers_[static_cast<std::size_t>(j)];
            if (buf.size() == 0) continue;
            const auto batch = buf.sample(static_cast<std::size_t>(cfg_.batch_size), rng_);

            CriticModel& cr = models_.critic(j);
            CriticStepStats stats;
            nn::CriticGrads<float> cg =
                critic_gradients(batch, cr, cfg_.gamma, cfg_.huber_delta, &stats);
            const std::string cb = std::string("critic.") + joint_name(j) + ".";
            adam_delta(cr.conv_fine_w, std::move(cg.wc_fine), cr.conv_fine_w_adam,
                       cb + "conv_fine.w");
            adam_delta(cr.conv_fine_b, std::move(cg.bc_fine), cr.conv_fine_b_adam,
                       cb + "conv_fine.b");
            adam_delta(cr.conv_coarse_w, std::move(cg.wc_coarse), cr.conv_coarse_w_adam,
                       cb + "conv_coarse.w");
            adam_delta(cr.conv_coarse_b, std::move(cg.bc_coarse), cr.conv_coarse_b_adam,
                       cb + "conv_coarse.b");
            adam_delta(cr.fc0_w, std::move(cg.w_fc0), cr.fc0_w_adam, cb + "fc0.w");
            adam_delta(cr.fc0_b, std::move(cg.b_fc0), cr.fc0_b_adam, cb + "fc0.b");
            adam_delta(cr.fc1_w, std::move(cg.w_fc1), cr.fc1_w_adam, cb + "fc1.w");
            adam_delta(cr.fc1_b, std::move(cg.b_fc1), cr.fc1_b_adam, cb + "fc1.b");

            // The stream autoencoders train on the same sampled batch;
            // tilt transitions carry no stream inputs (pan hosts temporal).
            if (j == Joint::Tilt) continue;
            const Stream host = j == Joint::Vergence ? Stream::Binocular : Stream::Temporal;
            for (Scale sc : {Scale::Fine, Scale::Coarse}) {
                std::vector<const Tensor*> inputs;
                inputs.reserve(batch.size());
                for (const Transition* t : batch)
                    inputs.push_back(&t->ae_inputs[sc == Scale::Fine ? 0 : 1]);
                AutoencoderModel& m = models_.ae(host, sc);
                double loss = 0.0;
                nn::AeGrads<float> g = ae_gradients(inputs, m, &loss);
                const std::string base =
                    std::string("ae.") + stream_name(host) + "." + scale_name(sc) + ".";
                adam_delta(m.enc0_w, std::move(g.w1), m.enc0_w_adam, base + "enc.0.w");
                adam_delta(m.enc0_b, std::move(g.b1), m.enc0_b_adam, base + "enc.0.b");
                adam_delta(m.enc1_w, std::move(g.w2), m.enc1_w_adam, base + "enc.1.w");
                adam_delta(m.enc1_b, std::move(g.b2), m.enc1_b_adam, base + "enc.1.b");
                adam_delta(m.dec0_w, std::move(g.w3), m.dec0_w_adam, base + "dec.0.w");
                adam_delta(m.dec0_b, std::move(g.b3), m.dec0_b_adam, base + "dec.0.b");
            }
        }
        return deltas;
    }

    void write_rows(long long ep, const EpisodeStats& stats, bool eval_now,
                    const std::array<double, 3>& test_err) {
        std::lock_guard<std::mutex> lock(csv_->mu);
        for (Joint j : kJoints) {
            const std::size_t ji = static_cast<std::size_t>(j);
            const double ae_loss = joint_stream(j) == Stream::Binocular
                                       ? stats.mean_loss_binocular
                                       : stats.mean_loss_temporal;
            csv_->log << ep << "," << joint_name(j) << "," << fmt(stats.final_abs_error[ji])
                      << "," << fmt(ae_loss) << "," << cfg_.reward_mode << "," << id_ << "\n";
            csv_->curve << ep << "," << joint_name(j) << "," << fmt(stats.final_abs_error[ji])
                        << "," << (eval_now ? fmt(test_err[ji]) : std::string()) << ","
                        << cfg_.reward_mode << "," << cfg_.seed << "\n";
        }
        csv_->log.flush();
        csv_->curve.flush();
    }

    friend void restore_worker(Worker&, const Checkpoint&, int);
    friend void save_worker_state(const Worker&, Checkpoint&, int);

    int id_;
    RunConfig cfg_;
    ParameterServer* server_;
    std::atomic<long long>* counter_;
    CsvSinks* csv_;
    std::string out_dir_;
    const StimulusSet* eval_stimuli_;
    Models models_;
    std::array<ReplayBuffer, 3> buffers_;
    std::mt19937 rng_;
    Environment env_;
};

std::string worker_key(int id) { return "w" + std::to_string(id); }

void save_worker_state(const Worker& w, Checkpoint& ckpt, int id) {
    Worker& wm = const_cast<Worker&>(w);
    const std::string wk = worker_key(id);
    for (auto& [name, st] : wm.models_.named_adam()) {
        ckpt.tensors.emplace(wk + ".adam." + name + ".m", st->m);
        ckpt.tensors.emplace(wk + ".adam." + name + ".v", st->v);
        ckpt.meta["adam_t"][wk + "." + name] = st->t;
    }
    ckpt.meta["rng"][wk] = rng_state_to_string(wm.rng_);
    for (Joint j : kJoints) {
        const ReplayBuffer& buf = wm.buffers_[static_cast<std::size_t>(j)];
        const std::string bk = wk + ".buf." + joint_name(j);
        nlohmann::json bmeta;
        bmeta["count"] = buf.raw_slots().size();
        bmeta["next"] = buf.raw_next();
        bmeta["ae_inputs"] =
            buf.raw_slots().empty() ? 0 : static_cast<int>(buf.raw_slots().front().ae_inputs.size());
        ckpt.meta["buffers"][bk] = bmeta;
        if (buf.raw_slots().empty()) continue;

        const auto& slots = buf.raw_slots();
        std::vector<const Tensor*> sf, sc, nf, nc, vf, vc;
        Tensor scalars({static_cast<int>(slots.size()), 3});
        for (std::size_t i = 0; i < slots.size(); ++i) {
            sf.push_back(&slots[i].s_fine);
            sc.push_back(&slots[i].s_coarse);
            nf.push_back(&slots[i].next_fine);
            nc.push_back(&slots[i].next_coarse);
            if (!slots[i].ae_inputs.empty()) {
                vf.push_back(&slots[i].ae_inputs[0]);
                vc.push_back(&slots[i].ae_inputs[1]);
            }
            scalars.data[i * 3 + 0] = static_cast<float>(slots[i].action);
            scalars.data[i * 3 + 1] = slots[i].reward;
            scalars.data[i * 3 + 2] = slots[i].terminal ? 1.0f : 0.0f;
        }
        ckpt.tensors.emplace(bk + ".s_fine", stack(sf));
        ckpt.tensors.emplace(bk + ".s_coarse", stack(sc));
        ckpt.tensors.emplace(bk + ".next_fine", stack(nf));
        ckpt.tensors.emplace(bk + ".next_coarse", stack(nc));
        ckpt.tensors.emplace(bk + ".scalars", std::move(scalars));
        if (!vf.empty()) {
            ckpt.tensors.emplace(bk + ".v_fine", stack(vf));
            ckpt.tensors.emplace(bk + ".v_coarse", stack(vc));
        }
    }
}

void restore_worker(Worker& w, const Checkpoint& ckpt, int id) {
    const std::string wk = worker_key(id);
    for (auto& [name, st] : w.models_.named_adam()) {
        st->m = ckpt.tensors.at(wk + ".adam." + name + ".m");
        st->v = ckpt.tensors.at(wk + ".adam." + name + ".v");
        st->t = ckpt.meta.at("adam_t").at(wk + "." + name).get<std::int64_t>();
    }
    w.rng_ = rng_state_from_string(ckpt.meta.at("rng").at(wk).get<std::string>());
    for (Joint j : kJoints) {
        const std::string bk = wk + ".buf." + joint_name(j);
        const auto& bmeta = ckpt.meta.at("buffers").at(bk);
        const std::size_t count = bmeta.at("count").get<std::size_t>();
        if (count == 0) continue;
        const int n_inputs = bmeta.at("ae_inputs").get<int>();
        const Tensor& sf = ckpt.tensors.at(bk + ".s_fine");
        const Tensor& sc = ckpt.tensors.at(bk + ".s_coarse");
        const Tensor& nf = ckpt.tensors.at(bk + ".next_fine");
        const Tensor& nc = ckpt.tensors.at(bk + ".next_coarse");
        const Tensor& scalars = ckpt.tensors.at(bk + ".scalars");
        std::vector<Transition> slots(count);
        for (std::size_t i = 0; i < count; ++i) {
            Transition& t = slots[i];
            t.s_fine = unstack(sf, i);
            t.s_coarse = unstack(sc, i);
            t.next_fine = unstack(nf, i);
            t.next_coarse = unstack(nc, i);
            t.action = static_cast<int>(scalars.data[i * 3 + 0]);
            t.reward = scalars.data[i * 3 + 1];
            t.terminal = scalars.data[i * 3 + 2] != 0.0f;
            if (n_inputs == 2) {
                t.ae_inputs.push_back(unstack(ckpt.tensors.at(bk + ".v_fine"), i));
                t.ae_inputs.push_back(unstack(ckpt.tensors.at(bk + ".v_coarse"), i));
            }
        }
        w.buffers_[static_cast<std::size_t>(j)].restore(std::move(slots),
                                                        bmeta.at("next").get<std::size_t>());
    }
}

}  // namespace

TrainResult train(const RunConfig& cfg, const std::string& out_dir,
                  const std::string& resume_from, bool save_full_state) {
    cfg.validate();
    std::filesystem::create_directories(out_dir);

    const StimulusSet stimuli = StimulusSet::from_spec(cfg.stimuli);
    const StimulusSet eval_stimuli = StimulusSet::from_spec(cfg.eval_stimuli_or_default());

    const int n_workers = effective_worker_count(cfg.workers);
    long long start_episode = 0;

    Models init_models = Models::init(cfg);
    ParameterServer server(init_models);

    std::atomic<long long> counter{0};
    CsvSinks csv;
    const bool resuming = !resume_from.empty();
    const bool log_existed = std::filesystem::exists(out_dir + "/training_log.csv");
    csv.log.open(out_dir + "/training_log.csv", resuming ? std::ios::app : std::ios::trunc);
    csv.curve.open(out_dir + "/training_curve.csv", resuming ? std::ios::app : std::ios::trunc);
    if (!csv.log || !csv.curve)
        throw std::runtime_error("train: cannot write CSV logs under " + out_dir);
    if (!resuming || !log_existed) {
        csv.log << "episode,joint,final_abs_error,mean_ae_loss,reward_mode,worker\n";
        csv.curve << "episode,joint,train_error,test_error,reward_mode,seed\n";
    }

    std::vector<std::unique_ptr<Worker>> workers;
    for (int i = 0; i < n_workers; ++i)
        workers.push_back(std::make_unique<Worker>(i, cfg, &stimuli, &eval_stimuli, &server,
                                                   &counter, &csv, out_dir));

    if (resuming) {
        const Checkpoint ckpt = checkpoint_load(resume_from);
        if (!ckpt.meta.value("has_state", false))
            throw std::runtime_error("train: checkpoint " + resume_from +
                                     " has no training state to resume from");
        if (ckpt.meta.value("worker_count", 1) != n_workers)
            throw std::runtime_error("train: resume requires the original worker count (" +
                                     std::to_string(ckpt.meta.value("worker_count", 1)) + ")");
        std::vector<std::pair<std::string, Tensor>> replace;
        for (auto& [name, tensor] : init_models.named_tensors()) {
            Tensor delta = ckpt.tensors.at(name);
            const Tensor current = server.pull(name);
            for (std::size_t i = 0; i < delta.data.size(); ++i) delta.data[i] -= current.data[i];
            replace.emplace_back(name, std::move(delta));
        }
        server.apply(replace);
        for (int i = 0; i < n_workers; ++i) restore_worker(*workers[i], ckpt, i);
        start_episode = ckpt.meta.at("episodes_done").get<long long>();
        counter.store(start_episode);
    }

    {
        std::ofstream cfg_out(out_dir + "/config.txt");
        cfg_out << cfg.dump();
    }

    if (n_workers == 1) {
        workers[0]->run();
    } else {
        std::vector<std::thread> threads;
        threads.reserve(static_cast<std::size_t>(n_workers));
        for (auto& w : workers) threads.emplace_back([&w] { w->run(); });
        for (auto& t : threads) t.join();
    }

    Checkpoint final;
    final.config = cfg;
    final.meta["episodes_done"] = cfg.episodes;
    final.meta["has_state"] = save_full_state;
    final.meta["worker_count"] = n_workers;
    final.tensors = server.pull_all();
    if (save_full_state)
        for (int i = 0; i < n_workers; ++i) save_worker_state(*workers[i], final, i);
    const std::string final_path = out_dir + "/ckpt_final.agze";
    checkpoint_save(final_path, final);

    TrainResult result;
    result.final_checkpoint = final_path;
    result.episodes_run = static_cast<int>(cfg.episodes - start_episode);
    Models final_models = Models::init(cfg);
    server.pull_into(final_models);
    result.final_testing_error =
        testing_error(final_models, eval_stimuli, cfg.env_config(), cfg.episode_length);
    return result;
}

}  // namespace aec
