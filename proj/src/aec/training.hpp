#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "aec/checkpoint.hpp"
#include "aec/models.hpp"

namespace aec {

struct EpisodeStats {
    std::array<double, 3> final_abs_error{};  // per joint, px (px/it for pan/tilt)
    double mean_loss_binocular = 0.0;
    double mean_loss_temporal = 0.0;
};

struct EpisodeResult {
    std::array<std::vector<Transition>, 3> transitions;  // per joint, episode_length-1 each
    EpisodeStats stats;
};

// One episode on an already-reset environment: observe, encode, reward the
// previous step, act epsilon-greedily, apply. Produces episode_length-1
// complete transitions per joint; the final one is marked terminal.
EpisodeResult run_episode(Environment& env, const Models& models, const RunConfig& cfg,
                          ActionPolicy& policy, std::mt19937& rng);

// Authoritative tensor store shared by the workers. Reads and additive
// updates are serialized per tensor, so a pulled tensor is always a
// consistent (never torn) snapshot at some update count.
class ParameterServer {
public:
    explicit ParameterServer(Models& initial);

    void pull_into(Models& models) const;
    std::map<std::string, Tensor> pull_all() const;
    Tensor pull(const std::string& name) const;
    std::uint64_t version(const std::string& name) const;

    // Adds each delta to its tensor; unknown names are rejected.
    void apply(const std::vector<std::pair<std::string, Tensor>>& deltas);

private:
    struct Entry {
        Tensor value;
        mutable std::mutex mu;
        std::uint64_t version = 0;
    };
    const Entry& entry(const std::string& name) const;
    std::map<std::string, std::unique_ptr<Entry>> entries_;
};

struct TrainResult {
    std::string final_checkpoint;
    std::array<double, 3> final_testing_error{};  // per joint
    int episodes_run = 0;
};

// Full training run: spawns cfg.workers workers against a parameter
// server, writes training_log.csv / training_curve.csv / checkpoints into
// out_dir. `resume_from` continues from a full-state checkpoint.
// AGZ_THREADS (environment variable) caps the worker count.
TrainResult train(const RunConfig& cfg, const std::string& out_dir,
                  const std::string& resume_from = "", bool save_full_state = false);

// Assembles a checkpoint (models + optimizer state; optionally worker
// buffers and rng states) — exposed for the trainer and tests.
struct WorkerState {
    std::array<ReplayBuffer, 3> buffers;
    std::mt19937 rng;
};

int effective_worker_count(int requested);

}  // namespace aec
