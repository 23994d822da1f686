#pragma once

#include <array>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "aec/nn/adam.hpp"
#include "aec/nn/model_math.hpp"
#include "aec/tensor.hpp"

namespace aec {

// Shared discrete action set, px/it for vergence and px/it^2 for pan/tilt.
inline constexpr std::array<double, 9> kActionSetPx = {-4.0, -2.0, -1.0, -0.5, 0.0,
                                                       0.5,  1.0,  2.0,  4.0};
inline constexpr int kNullActionIndex = 4;

enum class Joint { Pan = 0, Tilt = 1, Vergence = 2 };
inline constexpr std::array<Joint, 3> kJoints = {Joint::Pan, Joint::Tilt, Joint::Vergence};
const char* joint_name(Joint j);

enum class RewardMode { New, Old };
RewardMode reward_mode_from_string(const std::string& s);
const char* reward_mode_name(RewardMode m);

// r_new = C*(l_t - l_next): improvement of encoding quality.
// r_old = -C*l_next: quality of the encoding.
double compute_reward(double l_t, double l_next, RewardMode mode, double scale_c);

// Q-network for one joint: per scale conv 2x2/1 + relu + maxpool 2x2/2,
// flatten, concatenate scales, dense 200 + relu, dense 9 linear.
struct CriticModel {
    Joint joint = Joint::Vergence;
    int cenc = 24;  // encoding channels per scale (24 binocular, 48 temporal)
    int filters = 32;
    int hidden = 200;

    Tensor conv_fine_w, conv_fine_b;      // [2,2,cenc,filters]
    Tensor conv_coarse_w, conv_coarse_b;
    Tensor fc0_w, fc0_b;  // [2*9*filters, hidden]
    Tensor fc1_w, fc1_b;  // [hidden, 9]

    nn::AdamState conv_fine_w_adam, conv_fine_b_adam, conv_coarse_w_adam, conv_coarse_b_adam,
        fc0_w_adam, fc0_b_adam, fc1_w_adam, fc1_b_adam;

    static CriticModel init(Joint joint, int cenc, int filters, std::mt19937& rng,
                            nn::AdamHyper hyper);

    nn::CriticParamsView<float> view() const;
    // Checkpoint/server names: critic.<joint>.<layer>.<w|b>.
    std::vector<std::pair<std::string, Tensor*>> named_tensors();
    std::vector<std::pair<std::string, nn::AdamState*>> named_adam();
};

// q-values [9] for one encoding pair (fine, coarse: [7,7,cenc] each).
Tensor q_values(const Tensor& s_fine, const Tensor& s_coarse, const CriticModel& critic);

// Epsilon-greedy: argmax with lowest-index tie-break, else uniform.
int select_action(const Tensor& q, double epsilon, std::mt19937& rng);

// One experience step; encodings are stored detached (plain values).
struct Transition {
    Tensor s_fine, s_coarse;
    int action = kNullActionIndex;
    float reward = 0.0f;
    Tensor next_fine, next_coarse;
    bool terminal = false;
    // Raw stream inputs ([32,32,C] fine, coarse) carried alongside for
    // autoencoder training; empty on joints that do not host a stream.
    std::vector<Tensor> ae_inputs;
};

// Fixed-capacity FIFO, oldest-first eviction, uniform sampling with
// replacement.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {}

    void push(Transition t);
    std::size_t size() const { return slots_.size(); }
    std::size_t capacity() const { return capacity_; }
    // i-th oldest element.
    const Transition& at(std::size_t i) const;
    std::vector<const Transition*> sample(std::size_t batch, std::mt19937& rng) const;
    void clear();

    // Physical ring storage, used by checkpointing: sampling indexes the
    // ring directly, so an exact resume must restore slot order and the
    // write cursor, not just the transition set.
    const std::vector<Transition>& raw_slots() const { return slots_; }
    std::size_t raw_next() const { return next_; }
    void restore(std::vector<Transition> slots, std::size_t next);

private:
    std::size_t capacity_;
    std::size_t next_ = 0;  // ring write position
    std::vector<Transition> slots_;
};

struct CriticStepStats {
    double mean_huber_loss = 0.0;
};

// Gradients of the one-step DQN Huber loss on the taken actions; target is
// r + gamma * max_a q(s') (r alone for terminal transitions).
nn::CriticGrads<float> critic_gradients(std::span<const Transition* const> batch,
                                        const CriticModel& critic, double gamma,
                                        double huber_delta, CriticStepStats* stats);

// Gradients + one Adam step on the critic's own optimizer state.
CriticStepStats critic_train_step(std::span<const Transition* const> batch, CriticModel& critic,
                                  double gamma, double huber_delta = 1.0);

}  // namespace aec
